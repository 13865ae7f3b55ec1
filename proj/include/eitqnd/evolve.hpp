// Master-equation propagation: adaptive RK45 / fixed RK4 time stepping plus a
// matrix-exponential propagator that serves as the independent oracle.
#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "eitqnd/ode.hpp"
#include "eitqnd/steadystate.hpp"

namespace eitqnd {

/// Sampled observable record. Times in units of 1/gamma_ea.
struct TimeSeries {
    std::string label;
    std::vector<double> times;
    std::vector<Complex> values;

    void validate() const {
        if (times.size() != values.size())
            throw DimensionError("time series '" + label + "': length mismatch");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw InvalidParameterError("time series '" + label +
                                            "': times must be strictly increasing");
    }

    std::vector<double> imag_part() const {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            out[i] = values[i].imag();
        return out;
    }

    std::vector<double> real_part() const {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            out[i] = values[i].real();
        return out;
    }
};

enum class Method { Rk4Fixed, Rk45Adaptive, ExpmOracle };

inline std::string method_name(Method m) {
    switch (m) {
    case Method::Rk4Fixed: return "rk4-fixed";
    case Method::Rk45Adaptive: return "rk45-adaptive";
    case Method::ExpmOracle: return "expm-oracle";
    }
    return "?";
}

struct PropagationConfig {
    double t_end = 50.0;
    double sample_dt = 0.05;
    Method method = Method::Rk45Adaptive;
    double step_dt = 0.01;  // fixed-step RK4 only
    double rel_tol = 1e-8;  // adaptive only
    double abs_tol = 1e-10; // adaptive only

    // Invariant slacks checked on the sample grid.
    bool check_invariants = true;
    double trace_tol = 1e-8;
    double herm_tol = 1e-8;
    double positivity_slack = 1e-6;
    int positivity_stride = 10; // eigenvalue check every this many samples

    void validate() const {
        if (t_end <= 0.0)
            throw InvalidParameterError("t_end must be > 0");
        if (sample_dt <= 0.0 || sample_dt > t_end)
            throw InvalidParameterError("sample_dt must be in (0, t_end]");
        if (method == Method::Rk4Fixed && step_dt <= 0.0)
            throw InvalidParameterError("step_dt must be > 0");
    }
};

/// Observable extracted from the composite density matrix at each sample.
/// When the observable is a plain expectation Tr(A rho), linear_op holds A so
/// that pure-state solvers can evaluate <psi|A|psi> without forming rho.
struct Probe {
    std::string label;
    std::function<Complex(const Matrix& rho)> eval;
    std::shared_ptr<const Matrix> linear_op{};
};

/// Tr(A rho) probe for a fixed operator.
inline Probe probe_expectation(std::string label, const Operator& op) {
    auto m = std::make_shared<const Matrix>(op.entries);
    return {std::move(label), [m](const Matrix& rho) { return ((*m) * rho).trace(); }, m};
}

/// Atomic coherence <e| Tr_Fock(rho) |a>, the matrix element entering X(t);
/// equivalently the expectation of sigma_ae.
inline Probe probe_rho_ea(const SpaceSpec& space) {
    Probe p = probe_expectation("rho_ea", sigma(AtomLevel::A, AtomLevel::E, space));
    p.eval = [space](const Matrix& rho) {
        return partial_trace_fock(rho, space)(atom_index(AtomLevel::E),
                                              atom_index(AtomLevel::A));
    };
    return p;
}

inline Probe probe_photon_number(const SpaceSpec& space) {
    return probe_expectation("photon_number", number_operator(space));
}

inline Probe probe_population(AtomLevel level, const SpaceSpec& space) {
    return probe_expectation(std::string("pop_") + atom_label(level),
                             sigma(level, level, space));
}

/// Worst invariant deviations observed on the sample grid of one propagation.
struct InvariantReport {
    double max_trace_dev = 0.0;
    double max_herm_dev = 0.0;
    double min_eigenvalue = 1.0;

    void merge(const InvariantReport& o) {
        max_trace_dev = std::max(max_trace_dev, o.max_trace_dev);
        max_herm_dev = std::max(max_herm_dev, o.max_herm_dev);
        min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
    }

    bool within(const PropagationConfig& cfg) const {
        return max_trace_dev <= cfg.trace_tol && max_herm_dev <= cfg.herm_tol &&
               min_eigenvalue >= -cfg.positivity_slack;
    }
};

struct PropagationResult {
    std::vector<TimeSeries> series;
    DensityMatrix final_state;
    InvariantReport invariants;
    std::size_t steps = 0;
    std::size_t rhs_evals = 0;
};

/// Right-hand side of the master equation in matrix form,
///   drho/dt = K rho + rho K^dag + sum_k gamma_k C_k rho C_k^dag,
/// with the drift K = -iH - (1/2) sum_k gamma_k C_k^dag C_k precomputed.
class LindbladRhs {
public:
    LindbladRhs(const Operator& h, const std::vector<CollapseChannel>& channels) {
        const Eigen::Index d = h.entries.rows();
        drift_ = -kImag * h.entries;
        for (const auto& ch : channels) {
            if (ch.op.entries.rows() != d)
                throw DimensionError("collapse operator dimension mismatch");
            if (ch.rate == 0.0)
                continue;
            jump_.push_back({ch.rate, ch.op.entries, ch.op.entries.adjoint()});
            drift_ -= 0.5 * ch.rate * (jump_.back().cdag * jump_.back().c);
        }
        drift_dag_ = drift_.adjoint();
        tmp_.resize(d, d);
    }

    void operator()(double /*t*/, const Matrix& rho, Matrix& out) {
        out.noalias() = drift_ * rho;
        out.noalias() += rho * drift_dag_;
        for (const auto& j : jump_) {
            tmp_.noalias() = j.c * rho;
            out.noalias() += j.rate * (tmp_ * j.cdag);
        }
    }

private:
    struct Jump {
        double rate;
        Matrix c, cdag;
    };
    Matrix drift_, drift_dag_, tmp_;
    std::vector<Jump> jump_;
};

namespace detail {

inline std::vector<double> sample_grid(const PropagationConfig& cfg) {
    std::vector<double> grid{0.0};
    const auto n = static_cast<std::size_t>(std::floor(cfg.t_end / cfg.sample_dt + 1e-9));
    for (std::size_t k = 1; k <= n; ++k)
        grid.push_back(static_cast<double>(k) * cfg.sample_dt);
    if (grid.back() < cfg.t_end - 1e-9 * cfg.t_end)
        grid.push_back(cfg.t_end);
    return grid;
}

inline InvariantReport sample_invariants(const Matrix& rho, bool with_eigs) {
    InvariantReport rep;
    rep.max_trace_dev = std::abs(rho.trace() - 1.0);
    rep.max_herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (with_eigs) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                                 Eigen::EigenvaluesOnly);
        rep.min_eigenvalue = es.eigenvalues().minCoeff();
    }
    return rep;
}

} // namespace detail

/// Integrate the master equation from rho0 and record the probes on the
/// sample grid. Invariant deviations beyond the configured slack raise
/// NumericalFailureError.
inline PropagationResult propagate(const DensityMatrix& rho0, const Operator& h,
                                   const std::vector<CollapseChannel>& channels,
                                   const PropagationConfig& cfg,
                                   const std::vector<Probe>& probes) {
    cfg.validate();
    if (!(rho0.space() == h.space))
        throw DimensionError("initial state and Hamiltonian spaces differ");

    const std::vector<double> grid = detail::sample_grid(cfg);
    PropagationResult res;
    res.series.resize(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        res.series[p].label = probes[p].label;
        res.series[p].times = grid;
        res.series[p].values.reserve(grid.size());
    }

    Matrix rho = rho0.entries();
    LindbladRhs rhs(h, channels);
    ode::Rk4<Matrix> rk4;
    ode::Dopri5<Matrix> rk45({cfg.rel_tol, cfg.abs_tol});

    // Expm stepping: one Pade exponential per distinct interval length,
    // then pure matrix-vector semigroup steps.
    Matrix expm_step;
    double expm_step_dt = -1.0;
    const int dim = h.space.dim();
    Matrix lv;
    if (cfg.method == Method::ExpmOracle) {
        if (static_cast<long>(dim) * dim > 4096)
            throw DimensionError("expm propagator guard: dim^2 > 4096");
        lv = liouvillian_matrix(h, channels);
    }

    std::size_t rk4_steps = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (k > 0) {
            const double t0 = grid[k - 1];
            const double t1 = grid[k];
            switch (cfg.method) {
            case Method::Rk45Adaptive:
                rk45.integrate(rhs, rho, t0, t1);
                break;
            case Method::Rk4Fixed: {
                const double span = t1 - t0;
                const auto n = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::ceil(span / cfg.step_dt - 1e-12)));
                const double hstep = span / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i)
                    rk4.step(rhs, t0 + static_cast<double>(i) * hstep, hstep, rho);
                rk4_steps += n;
                break;
            }
            case Method::ExpmOracle: {
                const double span = t1 - t0;
                if (std::abs(span - expm_step_dt) > 1e-12) {
                    expm_step = (span * lv).exp();
                    expm_step_dt = span;
                }
                Vector v = expm_step * vec(rho);
                rho = unvec(v, dim);
                break;
            }
            }
        }
        for (std::size_t p = 0; p < probes.size(); ++p)
            res.series[p].values.push_back(probes[p].eval(rho));
        if (cfg.check_invariants) {
            const bool with_eigs =
                cfg.positivity_stride > 0 &&
                (k % static_cast<std::size_t>(cfg.positivity_stride) == 0 ||
                 k + 1 == grid.size());
            InvariantReport rep = detail::sample_invariants(rho, with_eigs);
            res.invariants.merge(rep);
            if (!res.invariants.within(cfg))
                throw NumericalFailureError(
                    "invariant violation at t = " + std::to_string(grid[k]) +
                    ": trace dev " + std::to_string(res.invariants.max_trace_dev) +
                    ", herm dev " + std::to_string(res.invariants.max_herm_dev) +
                    ", min eig " + std::to_string(res.invariants.min_eigenvalue));
        }
    }

    res.steps = cfg.method == Method::Rk45Adaptive ? rk45.steps_taken() : rk4_steps;
    res.rhs_evals = cfg.method == Method::Rk45Adaptive ? rk45.rhs_evals() : 4 * rk4_steps;
    res.final_state = DensityMatrix(rho0.space(), rho, cfg.trace_tol, cfg.herm_tol);
    for (auto& s : res.series)
        s.validate();
    return res;
}

/// Exact propagation to a single time via the matrix exponential of the
/// vectorized Liouvillian (scaling-and-squaring). Independent of the
/// time-stepping path: no discretization error, only expm tolerance.
inline DensityMatrix propagate_expm(const DensityMatrix& rho0, const Operator& h,
                                    const std::vector<CollapseChannel>& channels,
                                    double t) {
    if (!(rho0.space() == h.space))
        throw DimensionError("initial state and Hamiltonian spaces differ");
    const int dim = h.space.dim();
    if (static_cast<long>(dim) * dim > 4096)
        throw DimensionError("expm propagator guard: dim^2 > 4096");
    if (t < 0.0)
        throw InvalidParameterError("propagation time must be >= 0");

    const Matrix lv = liouvillian_matrix(h, channels);
    const Matrix u = (t * lv).exp();
    const Vector v = u * vec(rho0.entries());
    return DensityMatrix(rho0.space(), unvec(v, dim), 1e-7, 1e-7);
}

} // namespace eitqnd
