#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "eitqnd/model.hpp"

using namespace eitqnd;

namespace {

SystemParams random_params(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> rate(0.0, 2.0);
    std::uniform_real_distribution<double> det(-2.0, 2.0);
    SystemParams p;
    p.omega_p = rate(gen);
    p.omega_c = rate(gen);
    p.delta_p = det(gen);
    p.delta_c = det(gen);
    p.gamma_eb = rate(gen);
    p.gamma_deph = rate(gen);
    p.kappa = rate(gen);
    p.g_disp = det(gen);
    return p;
}

} // namespace

TEST_CASE("build_h1 reproduces the reference atom-block entries", "[model]") {
    SystemParams p; // defaults: Omega_p=0.02, Omega_c=0.2, Delta_p=Delta_c=-1
    const SpaceSpec s{0};
    const Matrix h = build_h1(p, s).entries;
    CHECK(h(2, 0) == Complex(-0.02, 0));  // (e,a)
    CHECK(h(2, 1) == Complex(-0.2, 0));   // (e,b)
    CHECK(h(2, 2) == Complex(-1.0, 0));   // (e,e) = Delta_p
    CHECK(h(1, 1) == Complex(0.0, 0));    // (b,b) = delta = 0
    CHECK(h(0, 0) == Complex(0.0, 0));

    SystemParams zero;
    zero.omega_p = zero.omega_c = 0.0;
    zero.delta_p = zero.delta_c = 0.0;
    CHECK(build_h1(zero, s).entries.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_h1 and build_h2 are Hermitian for random parameters", "[model]") {
    std::mt19937_64 gen(11);
    const SpaceSpec s{3};
    for (int k = 0; k < 20; ++k) {
        const SystemParams p = random_params(gen);
        CHECK(build_h1(p, s).is_hermitian(1e-14));
        CHECK(build_h2(p, s).is_hermitian(1e-14));
    }
}

TEST_CASE("build_h2 is diagonal with eigenvalue G*n on |b>|n>", "[model]") {
    const SpaceSpec s{4};
    SystemParams p;
    p.g_disp = 0.03;
    const Matrix h2 = build_h2(p, s).entries;
    const StateVector b2 = composite_ket(Vector::Unit(3, 1), fock_ket(2, s), s);
    CHECK((h2 * b2.amplitudes - 0.06 * b2.amplitudes).cwiseAbs().maxCoeff() < 1e-15);

    p.g_disp = 0.08;
    const Matrix h2b = build_h2(p, s).entries;
    const StateVector b4 = composite_ket(Vector::Unit(3, 1), fock_ket(4, s), s);
    CHECK((h2b * b4.amplitudes - 0.32 * b4.amplitudes).cwiseAbs().maxCoeff() < 1e-15);

    // n = 0 subspace is inert
    for (int atom = 0; atom < 3; ++atom) {
        const StateVector k0 = composite_ket(Vector::Unit(3, atom), fock_ket(0, s), s);
        CHECK((h2b * k0.amplitudes).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("photon number is a QND observable of H2", "[model]") {
    const SpaceSpec s{3};
    SystemParams p;
    const Matrix h2 = build_h2(p, s).entries;
    const Matrix num = number_operator(s).entries;
    const Matrix sbb = sigma(AtomLevel::B, AtomLevel::B, s).entries;
    CHECK((h2 * num - num * h2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((h2 * sbb - sbb * h2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dispersive strength and cooperativity", "[model]") {
    SECTION("experimental reference values") {
        // (g0, kappa, gamma_e)/2pi = (27, 4.8, 6) MHz
        const CavityPhysical c{27.0e6, 270.0e6, 4.8e6, 6.0e6};
        CHECK_THAT(cooperativity(c), Catch::Matchers::WithinAbs(25.3125, 1e-10));
    }
    SECTION("small-photon relation g ~ 10 G") {
        const CavityPhysical c{0.3, 3.0, 0.3, 1.0};
        CHECK_THAT(dispersive_g(c), Catch::Matchers::WithinRel(0.03, 1e-12));
        CHECK(c.dispersive_regime_ok());
        CHECK_FALSE(CavityPhysical{0.3, 2.0, 0.3, 1.0}.dispersive_regime_ok());
    }
    SECTION("red-detuned cavity gives negative G") {
        const CavityPhysical c{0.3, -3.0, 0.3, 1.0};
        CHECK_THAT(dispersive_g(c), Catch::Matchers::WithinRel(-0.03, 1e-12));
    }
    SECTION("degenerate inputs") {
        CHECK(dispersive_g(CavityPhysical{0.0, 1.0, 0.1, 1.0}) == 0.0);
        CHECK(cooperativity(CavityPhysical{0.0, 1.0, 0.1, 1.0}) == 0.0);
        CHECK_THROWS_AS(dispersive_g(CavityPhysical{0.3, 0.0, 0.1, 1.0}),
                        InvalidParameterError);
        CHECK_THROWS_AS(cooperativity(CavityPhysical{0.3, 1.0, 0.0, 1.0}),
                        InvalidParameterError);
    }
}

TEST_CASE("collapse_ops yields the four channels with reference rates", "[model]") {
    const SpaceSpec s{2};
    SystemParams p; // reference common parameters
    const auto channels = collapse_ops(p, s);
    REQUIRE(channels.size() == 4);
    CHECK(channels[0].rate == 1.0);
    CHECK(channels[1].rate == 1.0);
    CHECK(channels[2].rate == 0.1);
    CHECK(channels[3].rate == 0.3);

    // factor structure: atomic channels act trivially on the Fock factor and
    // the cavity channel trivially on the atom factor
    CHECK((channels[0].op.entries - sigma(AtomLevel::A, AtomLevel::E, s).entries)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((channels[1].op.entries - sigma(AtomLevel::B, AtomLevel::E, s).entries)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((channels[2].op.entries - sigma(AtomLevel::E, AtomLevel::E, s).entries)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((channels[3].op.entries -
           kron(Matrix::Identity(3, 3), fock_annihilator(s.fock_dim())))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("h_non: Hermitian part is H1 + H2, anti-Hermitian part carries "
          "gamma_ea and kappa only",
          "[model]") {
    SystemParams p;
    const SpaceSpec s{2};

    // rates enter only anti-Hermitian terms, so the Hermitian part must be
    // exactly the dissipation-free H1 + H2
    const Operator h12 = build_h1(p, s) + build_h2(p, s);
    const Matrix herm_part =
        0.5 * (build_h_non(p, s).entries + build_h_non(p, s).entries.adjoint());
    CHECK((herm_part - h12.entries).cwiseAbs().maxCoeff() < 1e-14);

    // cross-check against the effective-Hamiltonian construction restricted to
    // the gamma_ea and kappa channels, which is exactly the printed form
    std::vector<CollapseChannel> two = {
        {p.gamma_ea, sigma(AtomLevel::A, AtomLevel::E, s), "gamma_ea"},
        {p.kappa, annihilator(s), "kappa"},
    };
    const Operator expected = effective_hamiltonian(h12, two);
    CHECK((build_h_non(p, s).entries - expected.entries).cwiseAbs().maxCoeff() < 1e-14);

    // anti-Hermitian part on the |e>|0> sector reads off -i gamma_ea / 2
    const Matrix hnon = build_h_non(p, s).entries;
    const Matrix anti = 0.5 * (hnon - hnon.adjoint());
    const StateVector e0 = composite_ket(Vector::Unit(3, 2), fock_ket(0, s), s);
    const Complex val = e0.amplitudes.dot(anti * e0.amplitudes);
    CHECK(std::abs(val - Complex(0, -0.5)) < 1e-14);

    // the full unraveling drift additionally carries gamma_eb and gamma_deph
    const Operator full = effective_hamiltonian(h12, collapse_ops(p, s));
    const Matrix diff = full.entries - hnon;
    const Matrix see = sigma(AtomLevel::E, AtomLevel::E, s).entries;
    CHECK((diff - Complex(0, -0.5) * (p.gamma_eb + p.gamma_deph) * see)
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

TEST_CASE("dark state is a zero eigenvector of H1 + H2 at delta = 0", "[model]") {
    SystemParams p;
    REQUIRE(p.delta() == 0.0);
    const SpaceSpec s{2};
    const Operator h = build_h1(p, s) + build_h2(p, s);
    const StateVector dark = composite_ket(dark_state_atom(p), fock_ket(0, s), s);
    CHECK((h.entries * dark.amplitudes).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("parameter validation", "[model]") {
    SystemParams p;
    p.gamma_eb = -0.1;
    CHECK_THROWS_AS(p.validate(), InvalidParameterError);
    SystemParams q;
    q.gamma_ea = 2.0;
    CHECK_THROWS_AS(q.validate(), InvalidParameterError);
}
