// Stochastic wave-function (quantum-jump) unraveling of the master equation.
// Deterministic drift under H_eff = H - (i/2) sum_k gamma_k C_k^dag C_k with
// norm-threshold waiting times; all four collapse channels jump, so the
// ensemble average reproduces the full master equation.
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "eitqnd/evolve.hpp"
#include "eitqnd/rng.hpp"

namespace eitqnd {

struct TrajectoryConfig {
    int n_traj = 1;
    std::uint64_t seed = 0;
    double dt = 0.01;       // fixed RK4 step for the drift
    double t_end = 50.0;
    double sample_dt = 0.25;
    std::vector<CollapseChannel> channels;
    int jobs = 1;
    bool record_jumps = false;
    double max_step_jump_prob = 0.1; // per-step norm-loss guard

    void validate() const {
        if (n_traj < 1)
            throw InvalidParameterError("n_traj must be >= 1");
        if (dt <= 0.0 || t_end <= 0.0 || sample_dt <= 0.0 || sample_dt > t_end)
            throw InvalidParameterError("bad trajectory time grid");
    }
};

/// Ensemble mean and standard error of one probe over the sample grid.
struct TrajectoryStats {
    std::string label;
    std::vector<double> times;
    std::vector<Complex> mean;
    std::vector<double> se_re;
    std::vector<double> se_im;
};

struct JumpEvent {
    int trajectory;
    double time;
    int channel;
};

struct TrajectoryResult {
    std::vector<TrajectoryStats> stats;
    std::vector<JumpEvent> jumps; // populated only when record_jumps
    std::size_t total_jumps = 0;
};

/// Draws a pure initial state for one trajectory from its private stream.
using InitialSampler = std::function<StateVector(Rng&)>;

/// Sample an eigenvector of a mixed atomic state with probability equal to its
/// eigenvalue and tensor it with the photon ket.
inline StateVector sample_mixed_initial(const DensityMatrix& rho_atom,
                                        const Vector& photon_ket, const SpaceSpec& space,
                                        Rng& rng) {
    if (rho_atom.space().fock_dim() != 1)
        throw DimensionError("rho_atom must be atom-only (3x3)");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_atom.entries());
    double probs[3];
    for (int i = 0; i < 3; ++i)
        probs[i] = std::max(0.0, es.eigenvalues()(i));
    const int pick = rng.discrete(probs, 3);
    return composite_ket(es.eigenvectors().col(pick),
                         Vector(photon_ket / photon_ket.norm()), space);
}

inline InitialSampler make_mixed_initial_sampler(const DensityMatrix& rho_atom,
                                                 const Vector& photon_ket,
                                                 const SpaceSpec& space) {
    return [rho_atom, photon_ket, space](Rng& rng) {
        return sample_mixed_initial(rho_atom, photon_ket, space, rng);
    };
}

namespace detail {

struct ChunkAccum {
    // Per probe, per sample: running sums of the complex value and of the
    // squared real/imag parts.
    std::vector<std::vector<Complex>> sum;
    std::vector<std::vector<double>> sum_re2;
    std::vector<std::vector<double>> sum_im2;
    std::vector<JumpEvent> jumps;
    std::size_t jump_count = 0;

    ChunkAccum(std::size_t n_probes, std::size_t n_samples)
        : sum(n_probes, std::vector<Complex>(n_samples, Complex{0, 0})),
          sum_re2(n_probes, std::vector<double>(n_samples, 0.0)),
          sum_im2(n_probes, std::vector<double>(n_samples, 0.0)) {}
};

inline constexpr int kChunkSize = 32;

} // namespace detail

/// Run the quantum-jump ensemble. h is the Hermitian Hamiltonian of the
/// master equation being unraveled; the drift H_eff is derived from it and
/// cfg.channels. The result is bit-identical for a given (seed, config)
/// regardless of cfg.jobs: chunks of trajectories are reduced in index order.
inline TrajectoryResult run_trajectories(const InitialSampler& sampler, const Operator& h,
                                         const TrajectoryConfig& cfg,
                                         const std::vector<Probe>& probes) {
    cfg.validate();
    const SpaceSpec space = h.space;
    const Operator heff = effective_hamiltonian(h, cfg.channels);
    const Matrix drift = -kImag * heff.entries;

    // Trajectory averages are defined for linear observables only.
    std::vector<std::shared_ptr<const Matrix>> probe_ops;
    for (const auto& p : probes) {
        if (!p.linear_op)
            throw InvalidParameterError("trajectory probe '" + p.label +
                                        "' is not a linear expectation");
        if (p.linear_op->rows() != space.dim())
            throw DimensionError("probe operator dimension mismatch");
        probe_ops.push_back(p.linear_op);
    }

    struct JumpOp {
        double rate;
        Matrix c;
        int index;
    };
    std::vector<JumpOp> jump_ops;
    for (std::size_t k = 0; k < cfg.channels.size(); ++k) {
        if (cfg.channels[k].rate > 0.0)
            jump_ops.push_back(
                {cfg.channels[k].rate, cfg.channels[k].op.entries, static_cast<int>(k)});
    }

    std::vector<double> grid{0.0};
    {
        PropagationConfig gcfg;
        gcfg.t_end = cfg.t_end;
        gcfg.sample_dt = cfg.sample_dt;
        grid = detail::sample_grid(gcfg);
    }
    const std::size_t n_samples = grid.size();

    const int n_chunks =
        (cfg.n_traj + detail::kChunkSize - 1) / detail::kChunkSize;
    std::vector<detail::ChunkAccum> chunks(
        static_cast<std::size_t>(n_chunks),
        detail::ChunkAccum(probes.size(), n_samples));

    std::atomic<int> next_chunk{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        ode::Rk4<Vector> stepper;
        const auto rhs = [&drift](double, const Vector& psi, Vector& out) {
            out.noalias() = drift * psi;
        };
        std::vector<double> weights(jump_ops.size());
        Vector applied(space.dim());
        try {
            for (;;) {
                const int c = next_chunk.fetch_add(1);
                if (c >= n_chunks || failed.load())
                    return;
                auto& acc = chunks[static_cast<std::size_t>(c)];
                const int t_begin = c * detail::kChunkSize;
                const int t_end_idx =
                    std::min(cfg.n_traj, t_begin + detail::kChunkSize);
                for (int traj = t_begin; traj < t_end_idx; ++traj) {
                    Rng rng = Rng::for_stream(cfg.seed, static_cast<std::uint64_t>(traj));
                    StateVector psi0 = sampler(rng);
                    if (!(psi0.space == space))
                        throw DimensionError("sampled initial state on wrong space");
                    Vector psi = psi0.amplitudes / psi0.amplitudes.norm();
                    double threshold = rng.uniform_open();

                    const auto record = [&](std::size_t sample_idx) {
                        const double n2 = psi.squaredNorm();
                        for (std::size_t p = 0; p < probe_ops.size(); ++p) {
                            applied.noalias() = (*probe_ops[p]) * psi;
                            const Complex v = psi.dot(applied) / n2;
                            acc.sum[p][sample_idx] += v;
                            acc.sum_re2[p][sample_idx] += v.real() * v.real();
                            acc.sum_im2[p][sample_idx] += v.imag() * v.imag();
                        }
                    };

                    record(0);
                    for (std::size_t k = 1; k < n_samples; ++k) {
                        const double t0 = grid[k - 1];
                        const double t1 = grid[k];
                        const auto n_steps = std::max<std::size_t>(
                            1, static_cast<std::size_t>(
                                   std::ceil((t1 - t0) / cfg.dt - 1e-12)));
                        const double hstep = (t1 - t0) / static_cast<double>(n_steps);
                        for (std::size_t i = 0; i < n_steps; ++i) {
                            const double t = t0 + static_cast<double>(i) * hstep;
                            const double n2_before = psi.squaredNorm();
                            stepper.step(rhs, t, hstep, psi);
                            const double n2_after = psi.squaredNorm();
                            if (n2_after <
                                (1.0 - cfg.max_step_jump_prob) * n2_before)
                                throw StepSizeError(
                                    "single-step jump probability above guard; "
                                    "reduce dt");
                            if (n2_after < threshold) {
                                // Jump: pick the channel with weight gamma ||C psi||^2.
                                double total = 0.0;
                                for (std::size_t j = 0; j < jump_ops.size(); ++j) {
                                    weights[j] =
                                        jump_ops[j].rate *
                                        (jump_ops[j].c * psi).squaredNorm();
                                    total += weights[j];
                                }
                                if (total <= 0.0)
                                    throw NumericalFailureError(
                                        "norm decayed with no open jump channel");
                                const int j = rng.discrete(weights,
                                                           static_cast<int>(weights.size()));
                                psi = jump_ops[static_cast<std::size_t>(j)].c * psi;
                                psi /= psi.norm();
                                ++acc.jump_count;
                                if (cfg.record_jumps)
                                    acc.jumps.push_back(
                                        {traj, t + hstep, jump_ops[static_cast<std::size_t>(j)].index});
                                threshold = rng.uniform_open();
                            }
                        }
                        record(k);
                    }
                }
            }
        } catch (...) {
            failed.store(true);
            const std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
        }
    };

    const int n_workers = std::max(1, std::min(cfg.jobs, n_chunks));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    // Deterministic reduction in chunk order.
    TrajectoryResult res;
    res.stats.resize(probes.size());
    const double n = static_cast<double>(cfg.n_traj);
    for (std::size_t p = 0; p < probes.size(); ++p) {
        auto& st = res.stats[p];
        st.label = probes[p].label;
        st.times = grid;
        st.mean.assign(n_samples, Complex{0, 0});
        st.se_re.assign(n_samples, 0.0);
        st.se_im.assign(n_samples, 0.0);
        for (std::size_t k = 0; k < n_samples; ++k) {
            Complex sum{0, 0};
            double re2 = 0.0, im2 = 0.0;
            for (const auto& acc : chunks) {
                sum += acc.sum[p][k];
                re2 += acc.sum_re2[p][k];
                im2 += acc.sum_im2[p][k];
            }
            st.mean[k] = sum / n;
            if (cfg.n_traj > 1) {
                const double var_re =
                    std::max(0.0, (re2 - sum.real() * sum.real() / n) / (n - 1.0));
                const double var_im =
                    std::max(0.0, (im2 - sum.imag() * sum.imag() / n) / (n - 1.0));
                st.se_re[k] = std::sqrt(var_re / n);
                st.se_im[k] = std::sqrt(var_im / n);
            }
        }
    }
    for (const auto& acc : chunks) {
        res.total_jumps += acc.jump_count;
        res.jumps.insert(res.jumps.end(), acc.jumps.begin(), acc.jumps.end());
    }
    return res;
}

/// Fixed pure initial state for every trajectory.
inline TrajectoryResult run_trajectories(const StateVector& psi0, const Operator& h,
                                         const TrajectoryConfig& cfg,
                                         const std::vector<Probe>& probes) {
    const StateVector normalized = psi0.normalized();
    return run_trajectories([normalized](Rng&) { return normalized; }, h, cfg, probes);
}

} // namespace eitqnd
