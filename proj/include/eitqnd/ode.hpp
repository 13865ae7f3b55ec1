// Fixed-step RK4 and adaptive Dormand-Prince 5(4) steppers, generic over any
// Eigen-like dense state (complex matrices and vectors both fit).
#pragma once

#include <algorithm>
#include <cmath>

#include "eitqnd/errors.hpp"

namespace eitqnd::ode {

/// Classic fixed-step RK4. Stage storage is reused across steps.
template <class State>
class Rk4 {
public:
    /// Advance y in place from t by h, with f(t, y, dydt).
    template <class Rhs>
    void step(Rhs&& f, double t, double h, State& y) {
        k1_.resizeLike(y);
        k2_.resizeLike(y);
        k3_.resizeLike(y);
        k4_.resizeLike(y);
        tmp_.resizeLike(y);

        f(t, y, k1_);
        tmp_ = y + (0.5 * h) * k1_;
        f(t + 0.5 * h, tmp_, k2_);
        tmp_ = y + (0.5 * h) * k2_;
        f(t + 0.5 * h, tmp_, k3_);
        tmp_ = y + h * k3_;
        f(t + h, tmp_, k4_);
        y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

private:
    State k1_, k2_, k3_, k4_, tmp_;
};

struct AdaptiveOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double h_min = 1e-12;   // below this the problem is declared stiff
    double safety = 0.9;
    double max_shrink = 0.2;
    double max_grow = 5.0;
};

/// Dormand-Prince 5(4) with componentwise scaled error control.
template <class State>
class Dopri5 {
public:
    explicit Dopri5(AdaptiveOptions opts = {}) : opts_(opts) {}

    std::size_t rhs_evals() const { return rhs_evals_; }
    std::size_t steps_taken() const { return steps_; }

    /// Integrate y from t0 to t1 (t1 > t0), adapting the step. The suggested
    /// step size persists across calls so consecutive intervals stay cheap.
    template <class Rhs>
    void integrate(Rhs&& f, State& y, double t0, double t1) {
        const double span = t1 - t0;
        if (span <= 0.0)
            return;
        alloc(y);
        if (h_next_ <= 0.0)
            h_next_ = span;

        double t = t0;
        f(t, y, k_[0]);
        ++rhs_evals_;

        while (t < t1 - 1e-14 * std::max(1.0, std::abs(t1))) {
            double h = std::min(h_next_, t1 - t);
            if (h < opts_.h_min)
                throw StiffnessError("adaptive step size underflow at t = " +
                                     std::to_string(t));

            for (int s = 1; s < 6; ++s) {
                tmp_ = y;
                for (int j = 0; j < s; ++j)
                    tmp_ += (h * kA[s - 1][j]) * k_[j];
                f(t + kC[s] * h, tmp_, k_[s]);
                ++rhs_evals_;
            }
            // 5th-order solution; also the last stage point (c7 = 1).
            ynew_ = y;
            for (int j = 0; j < 6; ++j)
                if (kB5[j] != 0.0)
                    ynew_ += (h * kB5[j]) * k_[j];
            f(t + h, ynew_, k_[6]);
            ++rhs_evals_;

            yerr_ = (h * (kB5[0] - kB4[0])) * k_[0];
            for (int j = 1; j < 7; ++j)
                yerr_ += (h * (kB5[j] - kB4[j])) * k_[j];

            const double err = scaled_error(y, ynew_, yerr_);
            if (err <= 1.0) {
                t += h;
                y.swap(ynew_);
                k_[0].swap(k_[6]); // FSAL
                ++steps_;
                const double grow =
                    err == 0.0 ? opts_.max_grow
                               : std::min(opts_.max_grow,
                                          opts_.safety * std::pow(err, -0.2));
                h_next_ = h * std::max(1.0, grow);
            } else {
                // rejected: k1 still holds f at the unchanged (t, y)
                h_next_ = h * std::max(opts_.max_shrink,
                                       opts_.safety * std::pow(err, -0.2));
                if (h_next_ < opts_.h_min)
                    throw StiffnessError("adaptive step size underflow at t = " +
                                         std::to_string(t));
            }
        }
    }

private:
    void alloc(const State& y) {
        for (auto& k : k_)
            k.resizeLike(y);
        tmp_.resizeLike(y);
        ynew_.resizeLike(y);
        yerr_.resizeLike(y);
    }

    double scaled_error(const State& y0, const State& y1, const State& err) const {
        const auto scale = opts_.abs_tol +
                           opts_.rel_tol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
        return (err.cwiseAbs().array() / scale).maxCoeff();
    }

    // Dormand-Prince tableau.
    static constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double kA[5][5] = {
        {1.0 / 5, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656}};
    static constexpr double kB5[7] = {35.0 / 384,     0.0,        500.0 / 1113, 125.0 / 192,
                                      -2187.0 / 6784, 11.0 / 84, 0.0};
    static constexpr double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695,
                                      393.0 / 640,       -92097.0 / 339200,
                                      187.0 / 2100,      1.0 / 40};

    AdaptiveOptions opts_;
    double h_next_ = 0.0;
    std::size_t rhs_evals_ = 0;
    std::size_t steps_ = 0;
    State k_[7], tmp_, ynew_, yerr_;
};

} // namespace eitqnd::ode
