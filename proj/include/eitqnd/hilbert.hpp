// Operator algebra on the composite space: 3-level atom (a, b, e) tensor a
// truncated Fock mode. Atom factor comes first in every tensor product; the
// atom basis order is (a, b, e) and the Fock basis is |0>..|n_max>.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "eitqnd/errors.hpp"

namespace eitqnd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kImag{0.0, 1.0};

/// Composite-space descriptor: fixed 3 atomic levels times (n_max + 1) Fock states.
struct SpaceSpec {
    int fock_cutoff = 0; // n_max

    static constexpr int atom_levels = 3;

    int fock_dim() const { return fock_cutoff + 1; }
    int dim() const { return atom_levels * fock_dim(); }

    /// Composite basis index for (atom level i, Fock level n), atom factor first.
    int index(int atom, int fock) const { return atom * fock_dim() + fock; }

    friend bool operator==(const SpaceSpec& l, const SpaceSpec& r) {
        return l.fock_cutoff == r.fock_cutoff;
    }
};

inline void check_cutoff(const SpaceSpec& s) {
    if (s.fock_cutoff < 0)
        throw InvalidParameterError("fock_cutoff must be >= 0, got " +
                                    std::to_string(s.fock_cutoff));
}

enum class AtomLevel : int { A = 0, B = 1, E = 2 };

inline int atom_index(AtomLevel l) {
    const int i = static_cast<int>(l);
    if (i < 0 || i > 2)
        throw InvalidParameterError("unknown atom level label " + std::to_string(i));
    return i;
}

inline char atom_label(AtomLevel l) { return "abe"[atom_index(l)]; }

/// Dense operator on the composite space.
struct Operator {
    SpaceSpec space;
    Matrix entries;

    Operator() = default;
    Operator(SpaceSpec s, Matrix m) : space(s), entries(std::move(m)) {
        check_cutoff(space);
        if (entries.rows() != space.dim() || entries.cols() != space.dim())
            throw DimensionError("operator is " + std::to_string(entries.rows()) + "x" +
                                 std::to_string(entries.cols()) + " but space dim is " +
                                 std::to_string(space.dim()));
    }

    Operator dagger() const { return Operator(space, entries.adjoint()); }
    Complex trace() const { return entries.trace(); }

    bool is_hermitian(double tol = 1e-12) const {
        return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }
};

inline void check_same_space(const Operator& x, const Operator& y) {
    if (!(x.space == y.space))
        throw DimensionError("operators live on different spaces");
}

inline Operator operator+(const Operator& x, const Operator& y) {
    check_same_space(x, y);
    return Operator(x.space, x.entries + y.entries);
}
inline Operator operator-(const Operator& x, const Operator& y) {
    check_same_space(x, y);
    return Operator(x.space, x.entries - y.entries);
}
inline Operator operator*(const Operator& x, const Operator& y) {
    check_same_space(x, y);
    return Operator(x.space, x.entries * y.entries);
}
inline Operator operator*(Complex c, const Operator& x) {
    return Operator(x.space, c * x.entries);
}
inline Operator operator*(double c, const Operator& x) {
    return Operator(x.space, c * x.entries);
}

/// Pure state on the composite space.
struct StateVector {
    SpaceSpec space;
    Vector amplitudes;

    StateVector() = default;
    StateVector(SpaceSpec s, Vector v) : space(s), amplitudes(std::move(v)) {
        check_cutoff(space);
        if (amplitudes.size() != space.dim())
            throw DimensionError("state has " + std::to_string(amplitudes.size()) +
                                 " amplitudes but space dim is " + std::to_string(space.dim()));
    }

    double norm() const { return amplitudes.norm(); }

    StateVector normalized() const {
        const double n = norm();
        if (n <= 0.0)
            throw InvalidParameterError("cannot normalize zero state");
        return StateVector(space, amplitudes / n);
    }
};

/// Tensor product of two dense matrices (Kronecker product, left factor major).
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// Lift a (3x3 atom, FxF Fock) operator pair onto the composite space.
inline Operator tensor_op(const Matrix& atom_part, const Matrix& fock_part,
                          const SpaceSpec& space) {
    check_cutoff(space);
    if (atom_part.rows() != 3 || atom_part.cols() != 3)
        throw DimensionError("atom factor must be 3x3");
    if (fock_part.rows() != space.fock_dim() || fock_part.cols() != space.fock_dim())
        throw DimensionError("Fock factor must be " + std::to_string(space.fock_dim()) +
                             "x" + std::to_string(space.fock_dim()));
    return Operator(space, kron(atom_part, fock_part));
}

inline Operator identity(const SpaceSpec& space) {
    check_cutoff(space);
    return Operator(space, Matrix::Identity(space.dim(), space.dim()));
}

inline Operator zero(const SpaceSpec& space) {
    check_cutoff(space);
    return Operator(space, Matrix::Zero(space.dim(), space.dim()));
}

/// Atomic projection operator |xi><eta| tensored with the Fock identity.
inline Operator sigma(AtomLevel xi, AtomLevel eta, const SpaceSpec& space) {
    Matrix atom = Matrix::Zero(3, 3);
    atom(atom_index(xi), atom_index(eta)) = 1.0;
    return tensor_op(atom, Matrix::Identity(space.fock_dim(), space.fock_dim()), space);
}

/// Annihilation operator on the Fock factor alone: a|n> = sqrt(n)|n-1>.
inline Matrix fock_annihilator(int fock_dim) {
    Matrix a = Matrix::Zero(fock_dim, fock_dim);
    for (int n = 1; n < fock_dim; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

/// Cavity annihilation operator on the composite space (atom identity tensor a).
inline Operator annihilator(const SpaceSpec& space) {
    check_cutoff(space);
    return tensor_op(Matrix::Identity(3, 3), fock_annihilator(space.fock_dim()), space);
}

/// Photon number operator a^dag a on the composite space.
inline Operator number_operator(const SpaceSpec& space) {
    const Operator a = annihilator(space);
    return Operator(space, a.entries.adjoint() * a.entries);
}

/// Fock ket |n> on the Fock factor (length n_max + 1).
inline Vector fock_ket(int n, const SpaceSpec& space) {
    check_cutoff(space);
    if (n < 0 || n > space.fock_cutoff)
        throw CutoffError("Fock index " + std::to_string(n) + " outside cutoff n_max=" +
                          std::to_string(space.fock_cutoff));
    Vector v = Vector::Zero(space.fock_dim());
    v(n) = 1.0;
    return v;
}

/// Truncated coherent ket |alpha> on the Fock factor, renormalized after truncation.
/// Throws CutoffError if the truncated Poisson tail exceeds tail_tol.
inline Vector coherent_ket(Complex alpha, const SpaceSpec& space, double tail_tol = 1e-6) {
    check_cutoff(space);
    Vector v(space.fock_dim());
    // c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), built up recursively.
    Complex c = std::exp(-0.5 * std::norm(alpha));
    double kept = 0.0;
    for (int n = 0; n < space.fock_dim(); ++n) {
        if (n > 0)
            c *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = c;
        kept += std::norm(c);
    }
    const double tail = 1.0 - kept;
    if (tail > tail_tol)
        throw CutoffError("coherent-state truncation tail " + std::to_string(tail) +
                          " exceeds tolerance at n_max=" + std::to_string(space.fock_cutoff));
    return v / std::sqrt(kept);
}

/// Composite pure state from an atom-factor ket and a Fock-factor ket.
inline StateVector composite_ket(const Vector& atom, const Vector& fock,
                                 const SpaceSpec& space) {
    if (atom.size() != 3)
        throw DimensionError("atom ket must have 3 amplitudes");
    if (fock.size() != space.fock_dim())
        throw DimensionError("Fock ket size does not match cutoff");
    return StateVector(space, kron(atom, fock));
}

/// Trace out the Fock factor of a composite-space matrix, leaving the 3x3
/// atomic reduced matrix.
inline Matrix partial_trace_fock(const Matrix& rho, const SpaceSpec& space) {
    if (rho.rows() != space.dim() || rho.cols() != space.dim())
        throw DimensionError("matrix dimension does not match space");
    const int f = space.fock_dim();
    Matrix out = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int n = 0; n < f; ++n)
                out(i, j) += rho(i * f + n, j * f + n);
    return out;
}

/// Default truncation for a coherent injection: bounds the Poisson tail below ~1e-6.
inline int default_fock_cutoff(Complex alpha, int injected_n = 0) {
    const double m = std::abs(alpha);
    const int from_alpha = static_cast<int>(std::ceil(m * m + 5.0 * m + 4.0));
    return std::max(injected_n, from_alpha);
}

} // namespace eitqnd
