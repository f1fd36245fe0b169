#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta integrator for dense matrix
// states Y' = F(t, Y), with steps landing exactly on requested output times.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "hdicho/errors.hpp"

namespace hdicho {

template <typename Scalar>
struct StepControl {
    Scalar rel_tol = Scalar(1e-10);
    Scalar abs_tol = Scalar(1e-12);
    Scalar max_step = std::numeric_limits<Scalar>::infinity();
    std::size_t max_steps = 2'000'000;
};

template <typename Scalar>
class DormandPrince {
public:
    using State = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    explicit DormandPrince(StepControl<Scalar> control = {}) : control_(control) {}

    const StepControl<Scalar>& control() const { return control_; }
    std::size_t accepted_steps() const { return accepted_; }
    std::size_t rejected_steps() const { return rejected_; }

    /// Integrates from t0 through every time in `outputs` (monotone in the
    /// direction of integration), calling `emit(i, y)` as each is reached.
    template <typename Rhs, typename Emit>
    void march(Rhs&& rhs, Scalar t0, State y, std::span<const Scalar> outputs, Emit&& emit) {
        if (outputs.empty()) return;
        const Scalar dir = outputs.back() >= t0 ? Scalar(1) : Scalar(-1);
        Scalar t = t0;
        State k1 = rhs(t, y);
        Scalar h = initial_step(rhs, t, y, k1, dir, outputs.back());
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            const Scalar target = outputs[i];
            if ((target - t) * dir < 0)
                throw NumericalError("output times must be monotone in the integration direction");
            advance(rhs, t, y, k1, h, target, dir);
            emit(i, static_cast<const State&>(y));
        }
    }

    template <typename Rhs>
    State integrate(Rhs&& rhs, Scalar t0, State y, Scalar t1) {
        State out;
        const Scalar target[1] = {t1};
        march(rhs, t0, std::move(y), std::span<const Scalar>(target, 1),
              [&](std::size_t, const State& v) { out = v; });
        return out;
    }

private:
    // Butcher tableau (Dormand & Prince 1980).
    static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5,
                            c5 = Scalar(8) / 9;
    static constexpr Scalar a21 = Scalar(1) / 5;
    static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
    static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
    static constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                            a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
    static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                            a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                            a65 = Scalar(-5103) / 18656;
    static constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113, b4 = Scalar(125) / 192,
                            b5 = Scalar(-2187) / 6784, b6 = Scalar(11) / 84;
    static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                            e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                            e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;

    template <typename Rhs>
    Scalar initial_step(Rhs& rhs, Scalar t, const State& y, const State& f0, Scalar dir,
                        Scalar t_end) const {
        const Scalar span = std::abs(t_end - t);
        if (span == 0) return 0;
        const State scale =
            (control_.abs_tol + control_.rel_tol * y.array().abs()).matrix();
        const Scalar d0 = rms(y, scale);
        const Scalar d1 = rms(f0, scale);
        Scalar h0 = (d0 < Scalar(1e-5) || d1 < Scalar(1e-5)) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
        h0 = std::min({h0, span, control_.max_step});
        const State y1 = y + dir * h0 * f0;
        const State f1 = rhs(t + dir * h0, y1);
        const Scalar d2 = rms(f1 - f0, scale) / h0;
        const Scalar dmax = std::max(d1, d2);
        const Scalar h1 = dmax <= Scalar(1e-15) ? std::max(Scalar(1e-6), h0 * Scalar(1e-3))
                                                : std::pow(Scalar(0.01) / dmax, Scalar(0.2));
        return std::min({Scalar(100) * h0, h1, span, control_.max_step});
    }

    static Scalar rms(const State& v, const State& scale) {
        return std::sqrt((v.array() / scale.array()).square().mean());
    }

    template <typename Rhs>
    void advance(Rhs& rhs, Scalar& t, State& y, State& k1, Scalar& h, Scalar target, Scalar dir) {
        const Scalar eps = std::numeric_limits<Scalar>::epsilon();
        while ((target - t) * dir > 0) {
            if (++steps_ > control_.max_steps)
                throw IntegrationError("step budget exhausted", t, target);
            const Scalar remaining = std::abs(target - t);
            const Scalar floor = 16 * eps * std::max(Scalar(1), std::abs(t));
            if (remaining <= floor) {
                // Output within rounding of the current time: an Euler step is exact to O(eps^2).
                y += (target - t) * k1;
                t = target;
                k1 = rhs(t, y);
                break;
            }
            const Scalar step = std::min({h, remaining, control_.max_step});
            const bool hits = step == remaining;
            if (step <= floor) throw IntegrationError("step size underflow", t, target);
            const Scalar hs = dir * step;

            const State k2 = rhs(t + c2 * hs, y + hs * (a21 * k1));
            const State k3 = rhs(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
            const State k4 = rhs(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
            const State k5 =
                rhs(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const State k6 = rhs(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                                                   a65 * k5));
            State y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Scalar t_new = hits ? target : t + hs;
            State k7 = rhs(t_new, y_new);
            const State err =
                hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            if (!y_new.allFinite() || !err.allFinite())
                throw IntegrationError("non-finite state", t, target);

            const State scale = (control_.abs_tol +
                                 control_.rel_tol * y.array().abs().max(y_new.array().abs()))
                                    .matrix();
            const Scalar err_norm = (err.array().abs() / scale.array()).maxCoeff();

            if (err_norm <= 1) {
                ++accepted_;
                t = t_new;
                y = std::move(y_new);
                k1 = std::move(k7);
                const Scalar grow =
                    err_norm == 0 ? Scalar(5)
                                  : std::clamp(Scalar(0.9) * std::pow(err_norm, Scalar(-0.2)),
                                               Scalar(0.2), Scalar(5));
                // A step shortened to land on an output time keeps the earlier proposal.
                h = step < h ? std::max(h, step * grow) : step * grow;
            } else {
                ++rejected_;
                h = step * std::max(Scalar(0.2), Scalar(0.9) * std::pow(err_norm, Scalar(-0.2)));
            }
        }
    }

    StepControl<Scalar> control_;
    std::size_t steps_ = 0;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

}  // namespace hdicho
