// Hamiltonians and collapse channels of the Lambda-type EIT system with a
// dispersively coupled cavity mode. All rates and frequencies are expressed
// in units of gamma_ea, which is pinned to 1.
#pragma once

#include <string>
#include <vector>

#include "eitqnd/hilbert.hpp"

namespace eitqnd {

/// All physical rates, detunings and couplings, in units of gamma_ea.
/// Defaults are the common parameter set used throughout the experiments.
/// G is signed: the reference experiments run a red-detuned cavity
/// (varsigma < 0, so G = g^2/varsigma < 0), which shifts the Raman
/// resonance toward the absorptive side of the detuned EIT line.
struct SystemParams {
    double omega_p = 0.02;          // probe Rabi frequency
    double omega_c = 0.2;           // coupling Rabi frequency
    double delta_p = -1.0;          // probe detuning
    double delta_c = -1.0;          // coupling detuning
    double gamma_ea = 1.0;          // |e> -> |a> decay; the unit, always 1
    double gamma_eb = 1.0;          // |e> -> |b> decay
    double gamma_deph = 0.1;        // pure dephasing of |e>
    double kappa = 0.3;             // cavity decay
    double g_disp = -0.03;          // dispersive strength G = g^2/varsigma, signed
    double suscept_prefactor = 1.0; // N |mu_ae|^2 / (eps0 hbar gamma_ea)

    /// Two-photon detuning; derived, never stored.
    double delta() const { return delta_p - delta_c; }

    void validate() const {
        if (gamma_ea != 1.0)
            throw InvalidParameterError("gamma_ea is the unit and must equal 1");
        if (omega_p < 0 || omega_c < 0 || gamma_eb < 0 || gamma_deph < 0 || kappa < 0 ||
            suscept_prefactor < 0)
            throw InvalidParameterError("rates and Rabi frequencies must be >= 0");
    }
};

/// Cavity QED parameters in physical (angular frequency) units, used only to
/// translate an experimental setup into the dimensionless model.
struct CavityPhysical {
    double g = 0.0;        // atom-cavity coupling
    double varsigma = 0.0; // cavity detuning from the |b> <-> |f> transition
    double kappa = 0.0;    // cavity decay
    double gamma_e = 0.0;  // atomic linewidth

    /// Dispersive-regime sanity check; callers may warn when false.
    bool dispersive_regime_ok() const { return std::abs(varsigma) >= 10.0 * g; }
};

/// Dispersive coupling strength G = g^2 / varsigma.
inline double dispersive_g(const CavityPhysical& c) {
    if (c.varsigma == 0.0)
        throw InvalidParameterError("dispersive strength undefined at varsigma = 0");
    return c.g * c.g / c.varsigma;
}

/// Cooperativity eta = g^2 / (kappa gamma_e).
inline double cooperativity(const CavityPhysical& c) {
    if (c.kappa <= 0.0 || c.gamma_e <= 0.0)
        throw InvalidParameterError("cooperativity needs kappa, gamma_e > 0");
    return c.g * c.g / (c.kappa * c.gamma_e);
}

namespace detail {

/// Atom-factor part of H1 (3x3): -(Op|e><a| + Oc|e><b| + h.c.) + Dp|e><e| + delta|b><b|.
inline Matrix h1_atom_block(const SystemParams& p) {
    Matrix h = Matrix::Zero(3, 3);
    const int a = atom_index(AtomLevel::A);
    const int b = atom_index(AtomLevel::B);
    const int e = atom_index(AtomLevel::E);
    h(e, a) = -p.omega_p;
    h(a, e) = -p.omega_p;
    h(e, b) = -p.omega_c;
    h(b, e) = -p.omega_c;
    h(e, e) = p.delta_p;
    h(b, b) = p.delta();
    return h;
}

} // namespace detail

/// EIT interaction Hamiltonian H1, tensored with the Fock identity.
inline Operator build_h1(const SystemParams& p, const SpaceSpec& s) {
    p.validate();
    return tensor_op(detail::h1_atom_block(p),
                     Matrix::Identity(s.fock_dim(), s.fock_dim()), s);
}

/// Dispersive Hamiltonian H2 = G a^dag a |b><b|; diagonal in the product basis.
inline Operator build_h2(const SystemParams& p, const SpaceSpec& s) {
    Matrix bb = Matrix::Zero(3, 3);
    bb(atom_index(AtomLevel::B), atom_index(AtomLevel::B)) = 1.0;
    const Matrix a = fock_annihilator(s.fock_dim());
    return tensor_op(p.g_disp * bb, a.adjoint() * a, s);
}

/// One Lindblad dissipation channel: rate gamma and collapse operator C, in the
/// convention drho/dt += (gamma/2)(2 C rho C^dag - C^dag C rho - rho C^dag C).
struct CollapseChannel {
    double rate = 0.0;
    Operator op;
    std::string label;
};

/// The four dissipation channels of the master equation:
/// (gamma_ea, sigma_ae), (gamma_eb, sigma_be), (gamma_deph, sigma_ee), (kappa, a).
inline std::vector<CollapseChannel> collapse_ops(const SystemParams& p, const SpaceSpec& s) {
    p.validate();
    return {
        {p.gamma_ea, sigma(AtomLevel::A, AtomLevel::E, s), "gamma_ea"},
        {p.gamma_eb, sigma(AtomLevel::B, AtomLevel::E, s), "gamma_eb"},
        {p.gamma_deph, sigma(AtomLevel::E, AtomLevel::E, s), "gamma_deph"},
        {p.kappa, annihilator(s), "kappa"},
    };
}

/// Non-Hermitian Hamiltonian exactly as used in the stochastic wave-function
/// picture of the transient dynamics:
///   H_non = -(Op s_ea + Oc s_eb + h.c.) + a^dag a (G s_bb - i kappa/2)
///           + (Dp - i gamma_ea/2) s_ee + delta s_bb.
/// Its anti-Hermitian part carries only the gamma_ea and kappa channels; see
/// effective_hamiltonian for the full four-channel version the trajectory
/// solver evolves under.
inline Operator build_h_non(const SystemParams& p, const SpaceSpec& s) {
    p.validate();
    Matrix atom = detail::h1_atom_block(p);
    atom(atom_index(AtomLevel::E), atom_index(AtomLevel::E)) =
        p.delta_p - 0.5 * kImag * p.gamma_ea;
    const Matrix eye_f = Matrix::Identity(s.fock_dim(), s.fock_dim());
    const Matrix a = fock_annihilator(s.fock_dim());
    const Matrix num = a.adjoint() * a;

    Matrix bb = Matrix::Zero(3, 3);
    bb(atom_index(AtomLevel::B), atom_index(AtomLevel::B)) = 1.0;
    const Matrix eye_a = Matrix::Identity(3, 3);

    Matrix h = kron(atom, eye_f);
    h += kron(p.g_disp * bb - 0.5 * kImag * p.kappa * eye_a, num);
    return Operator(s, std::move(h));
}

/// H - (i/2) sum_k gamma_k C_k^dag C_k over the given channels; the drift
/// Hamiltonian of the quantum-jump unraveling.
inline Operator effective_hamiltonian(const Operator& h,
                                      const std::vector<CollapseChannel>& channels) {
    Matrix heff = h.entries;
    for (const auto& ch : channels) {
        check_same_space(h, ch.op);
        heff -= 0.5 * kImag * ch.rate * (ch.op.entries.adjoint() * ch.op.entries);
    }
    return Operator(h.space, std::move(heff));
}

/// Normalized dark state (Oc|a> - Op|b>)/sqrt(Op^2 + Oc^2) on the atom factor.
inline Vector dark_state_atom(const SystemParams& p) {
    if (p.omega_p == 0.0 && p.omega_c == 0.0)
        throw InvalidParameterError("dark state undefined with both Rabi frequencies zero");
    Vector v = Vector::Zero(3);
    v(atom_index(AtomLevel::A)) = p.omega_c;
    v(atom_index(AtomLevel::B)) = -p.omega_p;
    return v / v.norm();
}

} // namespace eitqnd
