// DensityMatrix type, the vectorized Liouvillian, and the steady-state EIT
// solve that seeds every transient run.
#pragma once

#include <utility>
#include <vector>

#include "eitqnd/model.hpp"

namespace eitqnd {

/// Hermitian, unit-trace state of atom (tensor) cavity. Construction
/// symmetrizes the entries and rejects trace or hermiticity deviations
/// beyond the given slack.
class DensityMatrix {
public:
    DensityMatrix() = default;

    DensityMatrix(SpaceSpec space, Matrix entries, double trace_tol = 1e-8,
                  double herm_tol = 1e-8)
        : space_(space) {
        check_cutoff(space_);
        if (entries.rows() != space_.dim() || entries.cols() != space_.dim())
            throw DimensionError("density matrix dimension does not match space");
        const double herm_dev = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
        if (herm_dev > herm_tol)
            throw NumericalFailureError("density matrix hermiticity deviation " +
                                        std::to_string(herm_dev) + " beyond tolerance");
        rho_ = 0.5 * (entries + entries.adjoint());
        const double trace_dev = std::abs(rho_.trace() - 1.0);
        if (trace_dev > trace_tol)
            throw NumericalFailureError("density matrix trace deviation " +
                                        std::to_string(trace_dev) + " beyond tolerance");
    }

    static DensityMatrix pure(const StateVector& psi) {
        const Vector v = psi.normalized().amplitudes;
        return DensityMatrix(psi.space, v * v.adjoint(), 1e-12, 1e-12);
    }

    const SpaceSpec& space() const { return space_; }
    const Matrix& entries() const { return rho_; }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    /// Positivity within numerical slack.
    void validate_positive(double slack = 1e-8) const {
        const double lo = min_eigenvalue();
        if (lo < -slack)
            throw NumericalFailureError("density matrix eigenvalue " + std::to_string(lo) +
                                        " below positivity slack");
    }

private:
    SpaceSpec space_;
    Matrix rho_;
};

/// Column-stacking vectorization: vec(rho) stacks columns, so with Eigen's
/// column-major storage vec is a straight memory copy and
/// vec(A rho B) = (B^T kron A) vec(rho).
inline Vector vec(const Matrix& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Matrix unvec(const Vector& v, int dim) {
    if (v.size() != static_cast<Eigen::Index>(dim) * dim)
        throw DimensionError("vectorized state has wrong length");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

/// Dense superoperator L with vec(drho/dt) = L vec(rho):
///   L = -i(I kron H - H^T kron I)
///       + sum_k gamma_k/2 (2 conj(C_k) kron C_k - I kron C_k^dag C_k
///                          - (C_k^dag C_k)^T kron I).
inline Matrix liouvillian_matrix(const Operator& h,
                                 const std::vector<CollapseChannel>& channels) {
    const Eigen::Index d = h.entries.rows();
    const Matrix eye = Matrix::Identity(d, d);
    Matrix lv = -kImag * (kron(eye, h.entries) - kron(h.entries.transpose(), eye));
    for (const auto& ch : channels) {
        if (ch.op.entries.rows() != d)
            throw DimensionError("collapse operator dimension mismatch");
        const Matrix& c = ch.op.entries;
        const Matrix cdc = c.adjoint() * c;
        lv += 0.5 * ch.rate *
              (2.0 * kron(c.conjugate(), c) - kron(eye, cdc) - kron(cdc.transpose(), eye));
    }
    return lv;
}

namespace detail {

/// Atom-only (n_max = 0) channels: the kappa channel acts trivially on vacuum.
inline std::vector<CollapseChannel> atom_channels(const SystemParams& p) {
    const SpaceSpec atom_only{0};
    return {
        {p.gamma_ea, sigma(AtomLevel::A, AtomLevel::E, atom_only), "gamma_ea"},
        {p.gamma_eb, sigma(AtomLevel::B, AtomLevel::E, atom_only), "gamma_eb"},
        {p.gamma_deph, sigma(AtomLevel::E, AtomLevel::E, atom_only), "gamma_deph"},
    };
}

} // namespace detail

/// Steady state of the atom-only master equation (3x3). Solved by replacing
/// the first Liouvillian row with the trace constraint; the null-space
/// residual of the unmodified Liouvillian must come out below residual_tol.
inline DensityMatrix steady_state_atom(const SystemParams& p, double residual_tol = 1e-10) {
    p.validate();
    if (p.omega_c <= 0.0)
        throw InvalidParameterError(
            "steady state requires omega_c > 0; the ground manifold is degenerate otherwise");

    const SpaceSpec atom_only{0};
    const Operator h = build_h1(p, atom_only);
    const Matrix lv = liouvillian_matrix(h, detail::atom_channels(p));

    const int d = atom_only.dim();
    Matrix sys = lv;
    Vector rhs = Vector::Zero(d * d);
    // Trace row: diagonal entries of rho sit at vec index i*(d+1).
    sys.row(0).setZero();
    for (int i = 0; i < d; ++i)
        sys(0, i * (d + 1)) = 1.0;
    rhs(0) = 1.0;

    const Eigen::FullPivLU<Matrix> lu(sys);
    if (!lu.isInvertible())
        throw DegenerateSteadyStateError(
            "Liouvillian null space is degenerate beyond the trace deficiency");
    const Vector v = lu.solve(rhs);

    const double residual = (lv * v).cwiseAbs().maxCoeff();
    if (residual > residual_tol)
        throw DegenerateSteadyStateError("steady-state residual " + std::to_string(residual) +
                                         " above tolerance");
    return DensityMatrix(atom_only, unvec(v, d), 1e-10, 1e-10);
}

/// Composite initial state rho_atom (tensor) |psi><psi| with a Fock-factor ket.
inline DensityMatrix initial_state(const DensityMatrix& rho_atom, const Vector& photon_ket,
                                   const SpaceSpec& s) {
    if (rho_atom.space().fock_dim() != 1)
        throw DimensionError("rho_atom must be an atom-only (3x3) density matrix");
    if (photon_ket.size() != s.fock_dim())
        throw CutoffError("photon ket does not fit the Fock cutoff");
    const double n = photon_ket.norm();
    if (n <= 0.0)
        throw InvalidParameterError("photon ket must be nonzero");
    const Vector ket = photon_ket / n;
    return DensityMatrix(s, kron(rho_atom.entries(), Matrix(ket * ket.adjoint())), 1e-10,
                         1e-10);
}

/// Convenience overload: photon prepared in Fock state |n>.
inline DensityMatrix initial_state(const DensityMatrix& rho_atom, int fock_n,
                                   const SpaceSpec& s) {
    return initial_state(rho_atom, fock_ket(fock_n, s), s);
}

} // namespace eitqnd
