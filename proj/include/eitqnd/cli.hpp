// Figure and protocol commands behind the command-line tool: each one runs
// its experiment, asserts the qualitative claims it reproduces, writes
// machine-readable data files plus a run manifest, and reports every file it
// wrote.
#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>

#include "eitqnd/config.hpp"
#include "eitqnd/experiments.hpp"
#include "eitqnd/version.hpp"

namespace eitqnd::cli {

struct CommandResult {
    std::vector<std::filesystem::path> outputs;
    InvariantReport invariants;
};

namespace detail {

inline const std::vector<double> kDefaultGList = {-0.08, -0.03, -0.008, -0.003};
inline const std::vector<double> kDefaultKappaList = {1.0, 0.7, 0.5, 0.3};
inline const std::vector<double> kDefaultDeltaList = {0.0, -0.5, -1.0, -1.5};
inline const std::vector<int> kDefaultNList = {0, 1, 2, 3, 4};

inline int resolved_cutoff(const ExperimentConfig& cfg) {
    int max_n = 0;
    for (const int n : cfg.grid.n_list)
        max_n = std::max(max_n, n);
    return cfg.grid.fock_cutoff.value_or(max_n + 2);
}

inline nlohmann::json invariants_json(const InvariantReport& r) {
    return {{"max_trace_dev", r.max_trace_dev},
            {"max_herm_dev", r.max_herm_dev},
            {"min_eigenvalue", r.min_eigenvalue}};
}

/// Emitted alongside every output set; rerunning with resolved_config
/// reproduces the outputs bit for bit.
inline std::filesystem::path write_manifest(const std::filesystem::path& dir,
                                            const std::string& command,
                                            const ExperimentConfig& cfg,
                                            const CommandResult& res, double wall_time_s,
                                            nlohmann::json extra) {
    nlohmann::json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["rng"] = kRngAlgorithm;
    m["seed"] = cfg.seed;
    m["wall_time_s"] = wall_time_s;
    m["resolved_config"] = dump_config(cfg);
    m["tolerances"] = {{"rel_tol", cfg.solver.rel_tol},
                       {"abs_tol", cfg.solver.abs_tol},
                       {"trace_tol", cfg.solver.trace_tol},
                       {"herm_tol", cfg.solver.herm_tol},
                       {"positivity_slack", cfg.solver.positivity_slack}};
    m["invariants"] = invariants_json(res.invariants);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& p : res.outputs)
        files.push_back(p.filename().string());
    m["outputs"] = std::move(files);
    if (!extra.is_null())
        m["results"] = std::move(extra);
    const std::filesystem::path path = dir / (command + "_manifest.json");
    write_text_file(path, m.dump(2) + "\n");
    return path;
}

inline void require_strictly_increasing(const std::vector<double>& xs,
                                        const std::string& what) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw NumericalFailureError(what + " not strictly increasing (index " +
                                        std::to_string(i) + ")");
}

/// time_gamma plus one column per run of either Im[X] or Re[X].
inline Table panel_table(const experiments::Panel& panel,
                         const std::vector<std::string>& labels, bool imaginary) {
    Table t;
    t.columns.push_back("time_gamma");
    for (const auto& l : labels)
        t.columns.push_back(l);
    const auto& times = panel.runs.front().x.times;
    t.rows.resize(times.size());
    for (std::size_t r = 0; r < times.size(); ++r) {
        t.rows[r].push_back(times[r]);
        for (const auto& run : panel.runs)
            t.rows[r].push_back(imaginary ? run.x.values[r].imag()
                                          : run.x.values[r].real());
    }
    return t;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

} // namespace detail

/// Im[X(t)] panels for each dispersive strength, all Fock injections.
inline CommandResult cmd_fig2(ExperimentConfig cfg, const std::filesystem::path& out_dir) {
    detail::Timer timer;
    if (cfg.grid.g_list.empty())
        cfg.grid.g_list = detail::kDefaultGList;
    if (cfg.grid.n_list.empty())
        cfg.grid.n_list = detail::kDefaultNList;
    cfg.grid.fock_cutoff = detail::resolved_cutoff(cfg);
    cfg.validate();

    CommandResult res;
    nlohmann::json panels = nlohmann::json::array();
    for (const double g : cfg.grid.g_list) {
        SystemParams p = cfg.params;
        p.g_disp = g;
        const auto panel = experiments::transient_panel(
            p, cfg.grid.n_list, *cfg.grid.fock_cutoff, cfg.solver, cfg.t_window, cfg.jobs);
        res.invariants.merge(panel.invariants);

        std::vector<std::string> labels;
        std::vector<double> peaks;
        for (std::size_t i = 0; i < panel.n_list.size(); ++i) {
            labels.push_back("n=" + std::to_string(panel.n_list[i]));
            peaks.push_back(panel.runs[i].peak_value);
        }
        detail::require_strictly_increasing(
            peaks, "fig2 peak ordering at G=" + format_double(g));

        const std::string stem = "fig2_G" + format_double(g);
        res.outputs.push_back(
            write_table(out_dir, stem, detail::panel_table(panel, labels, true), cfg.format));
        res.outputs.push_back(write_table(out_dir, stem + "_rex",
                                          detail::panel_table(panel, labels, false),
                                          cfg.format));
        panels.push_back({{"G", g}, {"peaks", peaks}});
    }
    res.outputs.push_back(
        detail::write_manifest(out_dir, "fig2", cfg, res, timer.seconds(), panels));
    return res;
}

/// Accumulated-absorption area S(n) per dispersive strength.
inline CommandResult cmd_fig3(ExperimentConfig cfg, const std::filesystem::path& out_dir) {
    detail::Timer timer;
    if (cfg.grid.g_list.empty())
        cfg.grid.g_list = detail::kDefaultGList;
    if (cfg.grid.n_list.empty())
        cfg.grid.n_list = detail::kDefaultNList;
    cfg.grid.fock_cutoff = detail::resolved_cutoff(cfg);
    cfg.validate();

    CommandResult res;
    Table t;
    t.columns.push_back("n");
    nlohmann::json areas_json = nlohmann::json::object();
    std::vector<std::vector<double>> areas_per_g;
    for (const double g : cfg.grid.g_list) {
        SystemParams p = cfg.params;
        p.g_disp = g;
        const auto panel = experiments::transient_panel(
            p, cfg.grid.n_list, *cfg.grid.fock_cutoff, cfg.solver, cfg.t_window, cfg.jobs);
        res.invariants.merge(panel.invariants);
        std::vector<double> areas;
        for (const auto& run : panel.runs)
            areas.push_back(run.area);
        detail::require_strictly_increasing(areas,
                                            "fig3 S(n) at G=" + format_double(g));
        t.columns.push_back("G=" + format_double(g));
        areas_json["G=" + format_double(g)] = areas;
        areas_per_g.push_back(std::move(areas));
    }
    for (std::size_t i = 0; i < cfg.grid.n_list.size(); ++i) {
        std::vector<double> row{static_cast<double>(cfg.grid.n_list[i])};
        for (const auto& areas : areas_per_g)
            row.push_back(areas[i]);
        t.rows.push_back(std::move(row));
    }
    res.outputs.push_back(write_table(out_dir, "fig3_area", t, cfg.format));
    res.outputs.push_back(
        detail::write_manifest(out_dir, "fig3", cfg, res, timer.seconds(), areas_json));
    return res;
}

namespace detail {

/// Shared shape of fig4 (kappa scan) and fig5 (detuning scan): Im[X(t)] for
/// n=1 per scanned value plus the S(n=0), S(n=1) areas. assert_fn sees the
/// area rows (value, S0, S1) and throws on a violated claim.
inline CommandResult scan_command(
    ExperimentConfig cfg, const std::filesystem::path& out_dir, const std::string& command,
    const std::vector<double>& values, const std::string& value_name,
    const std::function<void(SystemParams&, double)>& apply,
    const std::function<void(const std::vector<std::array<double, 3>>&)>& assert_fn) {
    Timer timer;
    cfg.grid.n_list = {0, 1};
    cfg.grid.fock_cutoff = resolved_cutoff(cfg);
    cfg.validate();

    CommandResult res;
    Table imx, area;
    area.columns = {value_name, "S_n0", "S_n1", "S_diff"};
    std::vector<experiments::Panel> panels(values.size());
    std::vector<std::array<double, 3>> area_rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        SystemParams p = cfg.params;
        apply(p, values[i]);
        panels[i] = experiments::transient_panel(p, cfg.grid.n_list, *cfg.grid.fock_cutoff,
                                                 cfg.solver, cfg.t_window, cfg.jobs);
        res.invariants.merge(panels[i].invariants);
        const double s0 = panels[i].runs[0].area;
        const double s1 = panels[i].runs[1].area;
        area.rows.push_back({values[i], s0, s1, s1 - s0});
        area_rows.push_back({values[i], s0, s1});
    }
    assert_fn(area_rows);

    imx.columns.push_back("time_gamma");
    const auto& times = panels.front().runs[1].x.times;
    imx.rows.resize(times.size());
    for (std::size_t r = 0; r < times.size(); ++r)
        imx.rows[r].push_back(times[r]);
    for (std::size_t i = 0; i < values.size(); ++i) {
        imx.columns.push_back(value_name + "=" + format_double(values[i]));
        for (std::size_t r = 0; r < times.size(); ++r)
            imx.rows[r].push_back(panels[i].runs[1].x.values[r].imag());
    }

    res.outputs.push_back(write_table(out_dir, command + "_imx", imx, cfg.format));
    res.outputs.push_back(write_table(out_dir, command + "_area", area, cfg.format));

    nlohmann::json extra;
    extra[value_name + "_list"] = values;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : area.rows)
        rows.push_back({{value_name, r[0]}, {"S_n0", r[1]}, {"S_n1", r[2]}, {"S_diff", r[3]}});
    extra["areas"] = std::move(rows);
    res.outputs.push_back(
        write_manifest(out_dir, command, cfg, res, timer.seconds(), extra));
    return res;
}

} // namespace detail

/// Single-photon transient versus cavity decay rate; asserts the injected
/// photon stays visible (S(1) > S(0)) at every kappa.
inline CommandResult cmd_fig4(ExperimentConfig cfg, const std::filesystem::path& out_dir) {
    if (cfg.grid.kappa_list.empty())
        cfg.grid.kappa_list = detail::kDefaultKappaList;
    const auto values = cfg.grid.kappa_list;
    return detail::scan_command(
        std::move(cfg), out_dir, "fig4", values, "kappa",
        [](SystemParams& p, double kappa) { p.kappa = kappa; },
        [](const std::vector<std::array<double, 3>>& rows) {
            for (const auto& r : rows)
                if (!(r[2] - r[1] > 0.0))
                    throw NumericalFailureError(
                        "fig4: single photon not visible, S(1) <= S(0) at kappa=" +
                        format_double(r[0]));
        });
}

/// Single-photon transient versus single-photon detuning; asserts the
/// detuning benefit S(Delta=-1) > S(Delta=0) when both are scanned.
inline CommandResult cmd_fig5(ExperimentConfig cfg, const std::filesystem::path& out_dir) {
    if (cfg.grid.delta_list.empty())
        cfg.grid.delta_list = detail::kDefaultDeltaList;
    const auto values = cfg.grid.delta_list;
    return detail::scan_command(
        std::move(cfg), out_dir, "fig5", values, "delta",
        [](SystemParams& p, double delta) {
            p.delta_p = delta;
            p.delta_c = delta;
        },
        [](const std::vector<std::array<double, 3>>& rows) {
            const auto find = [&rows](double v) -> const std::array<double, 3>* {
                for (const auto& r : rows)
                    if (r[0] == v)
                        return &r;
                return nullptr;
            };
            const auto* at_res = find(0.0);
            const auto* at_det = find(-1.0);
            if (at_res && at_det && !(at_det->at(2) > at_res->at(2)))
                throw NumericalFailureError(
                    "fig5: detuning benefit violated, S(Delta=-1) <= S(Delta=0)");
        });
}

/// Steady-state EIT: the atomic density matrix, its susceptibility and the
/// stationarity residual.
inline CommandResult cmd_steady(ExperimentConfig cfg, const std::filesystem::path& out_dir) {
    detail::Timer timer;
    cfg.validate();
    CommandResult res;

    const DensityMatrix rho = steady_state_atom(cfg.params);
    const Complex x = susceptibility(rho.entries(), cfg.params, rho.space());
    const SpaceSpec atom_only{0};
    const Matrix lv = liouvillian_matrix(build_h1(cfg.params, atom_only),
                                         eitqnd::detail::atom_channels(cfg.params));
    const double residual = (lv * vec(rho.entries())).cwiseAbs().maxCoeff();

    Table t;
    t.columns = {"row", "col", "re", "im"};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t.rows.push_back({static_cast<double>(i), static_cast<double>(j),
                              rho.entries()(i, j).real(), rho.entries()(i, j).imag()});
    res.outputs.push_back(write_table(out_dir, "steady_rho", t, cfg.format));

    res.invariants.max_trace_dev = std::abs(rho.entries().trace() - 1.0);
    res.invariants.min_eigenvalue = rho.min_eigenvalue();
    nlohmann::json extra = {{"X_re", x.real()},
                            {"X_im", x.imag()},
                            {"residual", residual},
                            {"pop_a", rho.entries()(0, 0).real()},
                            {"pop_b", rho.entries()(1, 1).real()},
                            {"pop_e", rho.entries()(2, 2).real()}};
    res.outputs.push_back(
        detail::write_manifest(out_dir, "steady", cfg, res, timer.seconds(), extra));
    return res;
}

/// Heralded-source protocol: calibration table, shot records, summary stats.
inline CommandResult cmd_herald(ExperimentConfig cfg, const std::filesystem::path& out_dir) {
    detail::Timer timer;
    cfg.validate();
    CommandResult res;

    const ClassifierModel model =
        calibrate(cfg.params, cfg.herald.calibrate_n, cfg.t_window, cfg.solver,
                  cfg.herald.sigma_s, &res.invariants);

    ProtocolOptions opts;
    opts.shots = cfg.herald.shots;
    opts.seed = cfg.seed;
    opts.mode = cfg.herald.mode;
    opts.target_n = cfg.herald.target_n;
    opts.t_window = cfg.t_window;
    opts.solver = cfg.solver;
    const ProtocolResult protocol =
        run_protocol(cfg.herald.alpha, model, opts, cfg.params, &res.invariants);

    Table calib;
    calib.columns = {"n", "area_s"};
    for (std::size_t i = 0; i < model.n_list.size(); ++i)
        calib.rows.push_back({static_cast<double>(model.n_list[i]), model.s_table[i]});
    res.outputs.push_back(write_table(out_dir, "herald_calibration", calib, cfg.format));

    Table shots;
    shots.columns = {"shot", "alpha_re", "alpha_im", "true_n", "measured_s",
                     "verdict_n", "accept"};
    for (const auto& r : protocol.records)
        shots.rows.push_back({static_cast<double>(r.shot), r.alpha.real(), r.alpha.imag(),
                              static_cast<double>(r.true_n), r.measured_s,
                              static_cast<double>(r.verdict_n), r.accept ? 1.0 : 0.0});
    res.outputs.push_back(write_table(out_dir, "herald_shots", shots, cfg.format));

    const auto& s = protocol.summary;
    nlohmann::json extra = {{"alpha_re", cfg.herald.alpha.real()},
                            {"alpha_im", cfg.herald.alpha.imag()},
                            {"mean_photon_number", std::norm(cfg.herald.alpha)},
                            {"mode", measure_mode_name(cfg.herald.mode)},
                            {"sigma_s", cfg.herald.sigma_s},
                            {"thresholds", model.thresholds},
                            {"s_table", model.s_table},
                            {"shots", s.shots},
                            {"target_n", s.target_n},
                            {"accepted", s.accepted},
                            {"heralding_rate", s.heralding_rate}};
    extra["conditional_fidelity"] =
        s.conditional_fidelity ? nlohmann::json(*s.conditional_fidelity)
                               : nlohmann::json(nullptr);
    extra["multiphoton_contamination"] =
        s.multiphoton_contamination ? nlohmann::json(*s.multiphoton_contamination)
                                    : nlohmann::json(nullptr);
    res.outputs.push_back(
        detail::write_manifest(out_dir, "herald", cfg, res, timer.seconds(), extra));
    return res;
}

/// Cartesian product over (G, kappa, Delta, n); long-format rows of S and peak.
inline CommandResult cmd_sweep(ExperimentConfig cfg, const std::filesystem::path& out_dir) {
    detail::Timer timer;
    if (cfg.grid.g_list.empty())
        cfg.grid.g_list = detail::kDefaultGList;
    if (cfg.grid.kappa_list.empty())
        cfg.grid.kappa_list = {cfg.params.kappa};
    if (cfg.grid.delta_list.empty())
        cfg.grid.delta_list = {cfg.params.delta_p};
    if (cfg.grid.n_list.empty())
        cfg.grid.n_list = detail::kDefaultNList;
    cfg.validate();

    const auto sw = experiments::sweep(cfg.params, cfg.grid.g_list, cfg.grid.kappa_list,
                                       cfg.grid.delta_list, cfg.grid.n_list, cfg.solver,
                                       cfg.t_window, cfg.jobs);
    CommandResult res;
    res.invariants = sw.invariants;

    Table t;
    t.columns = {"g_disp", "kappa", "delta", "n", "area_s", "peak_time", "peak_imx"};
    for (const auto& pt : sw.points)
        t.rows.push_back({pt.g, pt.kappa, pt.delta, static_cast<double>(pt.n), pt.area,
                          pt.peak_time, pt.peak_value});
    res.outputs.push_back(write_table(out_dir, "sweep", t, cfg.format));
    res.outputs.push_back(detail::write_manifest(out_dir, "sweep", cfg, res,
                                                 timer.seconds(),
                                                 {{"points", sw.points.size()}}));
    return res;
}

/// Dispatch by command name; unknown names raise ConfigError.
inline CommandResult run_command(const std::string& command, const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir) {
    if (command == "fig2") return cmd_fig2(cfg, out_dir);
    if (command == "fig3") return cmd_fig3(cfg, out_dir);
    if (command == "fig4") return cmd_fig4(cfg, out_dir);
    if (command == "fig5") return cmd_fig5(cfg, out_dir);
    if (command == "steady") return cmd_steady(cfg, out_dir);
    if (command == "herald") return cmd_herald(cfg, out_dir);
    if (command == "sweep") return cmd_sweep(cfg, out_dir);
    throw ConfigError("unknown command '" + command + "'");
}

/// Exit codes: 0 success, 2 config error, 3 numerical-invariant failure,
/// 4 calibration failure, 1 anything else.
inline int run_command_checked(const std::string& command, const ExperimentConfig& cfg,
                               const std::filesystem::path& out_dir,
                               std::ostream& err = std::cerr) {
    try {
        run_command(command, cfg, out_dir);
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CalibrationError& e) {
        err << "calibration failure: " << e.what() << "\n";
        return 4;
    } catch (const StiffnessError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericalFailureError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace eitqnd::cli
