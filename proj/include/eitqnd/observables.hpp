// Measured quantities: the linear susceptibility X(t), the accumulated
// absorption area S, peak absorption, and the probe transmission change.
#pragma once

#include <algorithm>
#include <cmath>

#include "eitqnd/evolve.hpp"

namespace eitqnd {

inline constexpr double kMeasurementWindow = 50.0; // T, in units of 1/gamma_ea

/// X = prefactor * rho_ea / Omega_p for a composite-space density matrix.
/// rho_ea is the <e|.|a> element of the Fock-traced atomic state; with the
/// Hamiltonian sign convention used here this makes Im[X] >= 0 in absorptive
/// regimes (verified against the resonant two-level limit).
inline Complex susceptibility(const Matrix& rho, const SystemParams& p,
                              const SpaceSpec& space) {
    if (p.omega_p <= 0.0)
        throw InvalidParameterError("susceptibility undefined at omega_p = 0");
    const Complex rho_ea = partial_trace_fock(rho, space)(atom_index(AtomLevel::E),
                                                          atom_index(AtomLevel::A));
    return p.suscept_prefactor * rho_ea / p.omega_p;
}

inline Complex susceptibility(const DensityMatrix& rho, const SystemParams& p) {
    return susceptibility(rho.entries(), p, rho.space());
}

/// Map a rho_ea(t) record to X(t).
inline TimeSeries susceptibility_series(const TimeSeries& rho_ea, const SystemParams& p) {
    if (p.omega_p <= 0.0)
        throw InvalidParameterError("susceptibility undefined at omega_p = 0");
    TimeSeries out;
    out.label = "X";
    out.times = rho_ea.times;
    out.values.reserve(rho_ea.values.size());
    for (const Complex v : rho_ea.values)
        out.values.push_back(p.suscept_prefactor * v / p.omega_p);
    return out;
}

/// Probe emitting X(t) directly during propagation.
inline Probe probe_susceptibility(const SystemParams& p, const SpaceSpec& space) {
    if (p.omega_p <= 0.0)
        throw InvalidParameterError("susceptibility undefined at omega_p = 0");
    Probe pr = probe_expectation(
        "X", (p.suscept_prefactor / p.omega_p) * sigma(AtomLevel::A, AtomLevel::E, space));
    pr.label = "X";
    return pr;
}

/// Trapezoidal integral of Im[X(t)] over [0, T]. The series must cover the
/// window; a sample landing beyond T contributes a linearly interpolated
/// partial segment.
inline double area_s(const TimeSeries& imx, double t_window = kMeasurementWindow) {
    imx.validate();
    if (imx.times.empty() || imx.times.front() > 1e-12 ||
        imx.times.back() < t_window - 1e-9 * t_window)
        throw InvalidParameterError("series does not cover the measurement window [0, T]");

    double s = 0.0;
    for (std::size_t i = 1; i < imx.times.size(); ++i) {
        const double t0 = imx.times[i - 1];
        if (t0 >= t_window)
            break;
        const double t1 = imx.times[i];
        const double f0 = imx.values[i - 1].imag();
        const double f1 = imx.values[i].imag();
        if (t1 <= t_window) {
            s += 0.5 * (f0 + f1) * (t1 - t0);
        } else {
            const double fw = f0 + (f1 - f0) * (t_window - t0) / (t1 - t0);
            s += 0.5 * (f0 + fw) * (t_window - t0);
        }
    }
    return s;
}

/// Global maximum of Im[X(t)] over the sampled window; ties break toward the
/// earliest time. Returns {time, value}.
inline std::pair<double, double> peak_absorption(const TimeSeries& imx) {
    imx.validate();
    if (imx.times.empty())
        throw InvalidParameterError("peak of an empty series");
    double best_t = imx.times[0];
    double best_v = imx.values[0].imag();
    for (std::size_t i = 1; i < imx.times.size(); ++i) {
        if (imx.values[i].imag() > best_v) {
            best_v = imx.values[i].imag();
            best_t = imx.times[i];
        }
    }
    return {best_t, best_v};
}

/// Sample geometry entering the transmission estimate.
struct TransmissionParams {
    double sample_length = 0.0; // l
    double wavelength = 0.0;    // lambda

    void validate() const {
        if (sample_length <= 0.0 || wavelength <= 0.0)
            throw InvalidParameterError("sample length and wavelength must be > 0");
    }
};

/// Linearized transmission change P = 2 pi S l / lambda (valid for alpha*l << 1).
inline double transmission_linearized(double s_area, const TransmissionParams& tp) {
    tp.validate();
    return 2.0 * M_PI * s_area * tp.sample_length / tp.wavelength;
}

struct TransmissionChange {
    double exact = 0.0;      // integral of (1 - e^{-alpha l}) over the window
    double linearized = 0.0; // 2 pi S l / lambda
    double max_alpha_l = 0.0;
    bool linear_regime = true; // false once max alpha*l > 0.1
};

/// Both transmission-change forms from an Im[X] series, with the
/// weak-absorption validity flag. alpha(t) = 2 pi Im[X(t)] / lambda.
inline TransmissionChange transmission_change(const TimeSeries& imx,
                                              const TransmissionParams& tp,
                                              double t_window = kMeasurementWindow) {
    tp.validate();
    imx.validate();
    TransmissionChange out;
    out.linearized = transmission_linearized(area_s(imx, t_window), tp);

    const auto alpha_l = [&](double im) {
        return 2.0 * M_PI * im * tp.sample_length / tp.wavelength;
    };
    const auto integrand = [&](double im) { return 1.0 - std::exp(-alpha_l(im)); };
    for (std::size_t i = 1; i < imx.times.size(); ++i) {
        const double t0 = imx.times[i - 1];
        if (t0 >= t_window)
            break;
        const double t1 = imx.times[i];
        const double f0 = imx.values[i - 1].imag();
        const double f1 = imx.values[i].imag();
        out.max_alpha_l = std::max({out.max_alpha_l, alpha_l(f0), alpha_l(f1)});
        if (t1 <= t_window) {
            out.exact += 0.5 * (integrand(f0) + integrand(f1)) * (t1 - t0);
        } else {
            const double fw = f0 + (f1 - f0) * (t_window - t0) / (t1 - t0);
            out.exact += 0.5 * (integrand(f0) + integrand(fw)) * (t_window - t0);
        }
    }
    out.linear_regime = out.max_alpha_l <= 0.1;
    return out;
}

} // namespace eitqnd
