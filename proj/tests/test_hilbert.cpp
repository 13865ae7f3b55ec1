#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "eitqnd/hilbert.hpp"

using namespace eitqnd;

namespace {

Matrix random_matrix(int n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = Complex(dist(gen), dist(gen));
    return m;
}

} // namespace

TEST_CASE("sigma builds atomic projectors on the composite space", "[hilbert]") {
    const SpaceSpec s0{0};
    const Operator saa = sigma(AtomLevel::A, AtomLevel::A, s0);
    REQUIRE(saa.entries.rows() == 3);
    CHECK(saa.entries(0, 0) == Complex(1, 0));
    CHECK(saa.entries(1, 1) == Complex(0, 0));
    CHECK(saa.entries(2, 2) == Complex(0, 0));

    const SpaceSpec s{3};
    const Operator sea = sigma(AtomLevel::E, AtomLevel::A, s);
    const Operator sae = sigma(AtomLevel::A, AtomLevel::E, s);
    const Operator see = sigma(AtomLevel::E, AtomLevel::E, s);
    CHECK(((sea * sae).entries - see.entries).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sigma(AtomLevel::A, AtomLevel::B, s).trace() == Complex(0, 0));

    // sigma_xi_eta^dag = sigma_eta_xi exactly
    for (auto xi : {AtomLevel::A, AtomLevel::B, AtomLevel::E})
        for (auto eta : {AtomLevel::A, AtomLevel::B, AtomLevel::E}) {
            const Operator fwd = sigma(xi, eta, s);
            const Operator rev = sigma(eta, xi, s);
            CHECK((fwd.dagger().entries - rev.entries).cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("sigma rejects unknown atom labels", "[hilbert]") {
    CHECK_THROWS_AS(sigma(static_cast<AtomLevel>(7), AtomLevel::A, SpaceSpec{0}),
                    InvalidParameterError);
}

TEST_CASE("annihilator acts as sqrt(n) lowering with truncation", "[hilbert]") {
    const SpaceSpec s{1};
    const Operator a = annihilator(s);
    const Vector one = fock_ket(1, s);
    const Vector zero = fock_ket(0, s);
    const StateVector k1 = composite_ket(Vector::Unit(3, 0), one, s);
    const StateVector k0 = composite_ket(Vector::Unit(3, 0), zero, s);
    CHECK((a.entries * k1.amplitudes - k0.amplitudes).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.entries * k0.amplitudes).cwiseAbs().maxCoeff() == 0.0);

    const SpaceSpec s5{5};
    const Operator num = number_operator(s5);
    for (int n = 0; n <= 5; ++n) {
        const StateVector kn = composite_ket(Vector::Unit(3, 1), fock_ket(n, s5), s5);
        CHECK((num.entries * kn.amplitudes - static_cast<double>(n) * kn.amplitudes)
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }

    // [a, a^dag] = 1 except in the top Fock row, where truncation bites.
    const Operator ad = annihilator(s5).dagger();
    const Matrix comm = (annihilator(s5) * ad - ad * annihilator(s5)).entries;
    const int f = s5.fock_dim();
    for (int atom = 0; atom < 3; ++atom)
        for (int n = 0; n < f - 1; ++n)
            CHECK(std::abs(comm(atom * f + n, atom * f + n) - 1.0) < 1e-14);
    for (int atom = 0; atom < 3; ++atom)
        CHECK(std::abs(comm(atom * f + f - 1, atom * f + f - 1) + 5.0) < 1e-14);
}

TEST_CASE("number operator is Hermitian with spectrum 0..n_max", "[hilbert]") {
    const SpaceSpec s{4};
    const Operator num = number_operator(s);
    REQUIRE(num.is_hermitian());
    Eigen::SelfAdjointEigenSolver<Matrix> es(num.entries);
    // each of 0..4 appears three times (once per atomic level)
    for (int k = 0; k < s.dim(); ++k)
        CHECK(std::abs(es.eigenvalues()(k) - k / 3) < 1e-12);
}

TEST_CASE("kron satisfies the mixed-product property and trace factorization",
          "[hilbert]") {
    std::mt19937_64 gen(42);
    const Matrix a = random_matrix(3, gen);
    const Matrix b = random_matrix(4, gen);
    const Matrix c = random_matrix(3, gen);
    const Matrix d = random_matrix(4, gen);

    CHECK((kron(a, b) * kron(c, d) - kron(Matrix(a * c), Matrix(b * d)))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(std::abs(kron(a, b).trace() - a.trace() * b.trace()) < 1e-12);

    const Matrix e = random_matrix(2, gen);
    CHECK((kron(kron(a, b), e) - kron(a, kron(b, e))).cwiseAbs().maxCoeff() < 1e-12);

    const SpaceSpec s{3};
    const Operator eye = tensor_op(Matrix::Identity(3, 3), Matrix::Identity(4, 4), s);
    CHECK((eye.entries - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tensor_op rejects dimension mismatches", "[hilbert]") {
    const SpaceSpec s{3};
    CHECK_THROWS_AS(tensor_op(Matrix::Identity(2, 2), Matrix::Identity(4, 4), s),
                    DimensionError);
    CHECK_THROWS_AS(tensor_op(Matrix::Identity(3, 3), Matrix::Identity(5, 5), s),
                    DimensionError);
    CHECK_THROWS_AS(Operator(s, Matrix::Identity(4, 4)), DimensionError);
}

TEST_CASE("dagger is an involution", "[hilbert]") {
    std::mt19937_64 gen(7);
    const SpaceSpec s{2};
    const Operator op(s, random_matrix(s.dim(), gen));
    CHECK((op.dagger().dagger().entries - op.entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fock and coherent kets", "[hilbert]") {
    const SpaceSpec s{12};

    SECTION("coherent_ket(0) equals fock_ket(0)") {
        CHECK((coherent_ket(Complex(0, 0), s) - fock_ket(0, s)).cwiseAbs().maxCoeff() ==
              0.0);
    }

    SECTION("Poisson single-photon weight at |alpha|^2 = 1") {
        const Vector alpha = coherent_ket(Complex(1, 0), s);
        CHECK(std::abs(std::norm(alpha(1)) - std::exp(-1.0)) < 1e-6);
    }

    SECTION("mean photon number is |alpha|^2 within truncation tolerance") {
        const Complex a(0.9, 0.5);
        const Vector ket = coherent_ket(a, s);
        const Matrix ann = fock_annihilator(s.fock_dim());
        const Complex mean = ket.dot(ann.adjoint() * ann * ket);
        CHECK(std::abs(mean.real() - std::norm(a)) < 1e-5);
        CHECK(std::abs(mean.imag()) < 1e-12);
    }

    SECTION("cutoff errors") {
        CHECK_THROWS_AS(fock_ket(13, s), CutoffError);
        CHECK_THROWS_AS(fock_ket(-1, s), CutoffError);
        CHECK_THROWS_AS(coherent_ket(Complex(3.0, 0), SpaceSpec{3}), CutoffError);
    }

    SECTION("default cutoff bounds the Poisson tail") {
        const Complex a(1.0, 0.0);
        const int cut = default_fock_cutoff(a);
        CHECK(cut == 10);
        CHECK_NOTHROW(coherent_ket(a, SpaceSpec{cut}));
        CHECK(default_fock_cutoff(a, 15) == 15);
    }
}

TEST_CASE("partial trace over the Fock factor", "[hilbert]") {
    std::mt19937_64 gen(3);
    const SpaceSpec s{2};
    const Matrix atom = random_matrix(3, gen);
    Matrix fock = random_matrix(s.fock_dim(), gen);
    const Matrix rho = kron(atom, fock);
    const Matrix reduced = partial_trace_fock(rho, s);
    CHECK((reduced - Matrix(atom * fock.trace())).cwiseAbs().maxCoeff() < 1e-12);
}
