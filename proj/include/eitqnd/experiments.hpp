// Reusable experiment runners behind the figure commands, the sweep and the
// acceptance suite: transient X(t) for a Fock injection, panel batches over
// photon number, and Cartesian parameter sweeps.
#pragma once

#include "eitqnd/observables.hpp"
#include "eitqnd/parallel.hpp"

namespace eitqnd::experiments {

struct TransientRun {
    TimeSeries x; // complex X(t)
    double area = 0.0;
    double peak_time = 0.0;
    double peak_value = 0.0;
    InvariantReport invariants;
    DensityMatrix final_state;
};

/// One transient: steady-state EIT atoms, photon prepared in |n>, X(t) over
/// the configured horizon, S over [0, t_window].
inline TransientRun transient(const SystemParams& p, int photon_n, int fock_cutoff,
                              const PropagationConfig& cfg,
                              double t_window = kMeasurementWindow) {
    if (fock_cutoff < photon_n)
        throw CutoffError("fock_cutoff below injected photon number");
    const SpaceSpec space{fock_cutoff};
    const DensityMatrix rho0 = initial_state(steady_state_atom(p), photon_n, space);
    const Operator h = build_h1(p, space) + build_h2(p, space);
    const PropagationResult res =
        propagate(rho0, h, collapse_ops(p, space), cfg, {probe_susceptibility(p, space)});

    TransientRun run;
    run.x = res.series[0];
    run.area = area_s(run.x, t_window);
    const auto [pt, pv] = peak_absorption(run.x);
    run.peak_time = pt;
    run.peak_value = pv;
    run.invariants = res.invariants;
    run.final_state = res.final_state;
    return run;
}

/// A figure panel: one parameter set, several Fock injections.
struct Panel {
    std::vector<int> n_list;
    std::vector<TransientRun> runs; // aligned with n_list
    InvariantReport invariants;
};

inline Panel transient_panel(const SystemParams& p, const std::vector<int>& n_list,
                             int fock_cutoff, const PropagationConfig& cfg,
                             double t_window = kMeasurementWindow, int jobs = 1) {
    Panel panel;
    panel.n_list = n_list;
    panel.runs.resize(n_list.size());
    parallel_for(static_cast<int>(n_list.size()), jobs, [&](int i) {
        panel.runs[static_cast<std::size_t>(i)] =
            transient(p, n_list[static_cast<std::size_t>(i)], fock_cutoff, cfg, t_window);
    });
    for (const auto& r : panel.runs)
        panel.invariants.merge(r.invariants);
    return panel;
}

/// Steady-state susceptibility of the bare EIT medium (n = 0 baseline).
inline Complex steady_susceptibility(const SystemParams& p) {
    const DensityMatrix rho = steady_state_atom(p);
    return susceptibility(rho.entries(), p, rho.space());
}

struct SweepPoint {
    double g = 0.0;
    double kappa = 0.0;
    double delta = 0.0; // single-photon detuning, applied to both lasers
    int n = 0;
    double area = 0.0;
    double peak_time = 0.0;
    double peak_value = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points; // grid order: g, kappa, delta, n (n fastest)
    InvariantReport invariants;
};

/// Cartesian product sweep over (G, kappa, Delta, n). The Fock cutoff is
/// max(n_list) + 2 for every point so that rows are directly comparable.
inline SweepResult sweep(const SystemParams& base, const std::vector<double>& g_list,
                         const std::vector<double>& kappa_list,
                         const std::vector<double>& delta_list,
                         const std::vector<int>& n_list, const PropagationConfig& cfg,
                         double t_window = kMeasurementWindow, int jobs = 1) {
    if (g_list.empty() || kappa_list.empty() || delta_list.empty() || n_list.empty())
        throw InvalidParameterError("sweep grids must be nonempty");
    int max_n = 0;
    for (const int n : n_list) {
        if (n < 0)
            throw InvalidParameterError("photon numbers must be >= 0");
        max_n = std::max(max_n, n);
    }
    const int cutoff = max_n + 2;

    SweepResult res;
    res.points.resize(g_list.size() * kappa_list.size() * delta_list.size() *
                      n_list.size());
    std::vector<InvariantReport> reports(res.points.size());
    const int total = static_cast<int>(res.points.size());
    const auto n_count = n_list.size();
    const auto d_count = delta_list.size();
    const auto k_count = kappa_list.size();

    parallel_for(total, jobs, [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const std::size_t ni = i % n_count;
        const std::size_t di = (i / n_count) % d_count;
        const std::size_t ki = (i / (n_count * d_count)) % k_count;
        const std::size_t gi = i / (n_count * d_count * k_count);

        SystemParams p = base;
        p.g_disp = g_list[gi];
        p.kappa = kappa_list[ki];
        p.delta_p = delta_list[di];
        p.delta_c = delta_list[di];

        const TransientRun run = transient(p, n_list[ni], cutoff, cfg, t_window);
        res.points[i] = {p.g_disp,      p.kappa,       p.delta_p,     n_list[ni],
                         run.area,      run.peak_time, run.peak_value};
        reports[i] = run.invariants;
    });
    for (const auto& r : reports)
        res.invariants.merge(r);
    return res;
}

} // namespace eitqnd::experiments
