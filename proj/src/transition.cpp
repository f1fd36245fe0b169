#include "hdicho/transition.hpp"

#include <algorithm>
#include <numeric>

namespace hdicho {

TransitionEvaluator::TransitionEvaluator(LinearSystem system, GrowthRated growth,
                                         TransitionOptions options)
    : system_(std::move(system)), growth_(std::move(growth)), options_(options) {
    if (system_.dim <= 0 || !system_.coefficient)
        throw ArgumentError("transition evaluator needs a system with a coefficient map");
    if (!(options_.rel_tol > 0) || !(options_.abs_tol > 0) || !(options_.max_step > 0))
        throw ArgumentError("integrator tolerances and max_step must be positive");
    anchor_ = options_.anchor.value_or(identity_element(growth_));
    require_in_domain(growth_, anchor_, "anchor");
}

TransitionEvaluator::TransitionEvaluator(const TransitionEvaluator& other)
    : system_(other.system_), growth_(other.growth_), options_(other.options_),
      anchor_(other.anchor_) {}

std::size_t TransitionEvaluator::cache_size() const {
    std::lock_guard lock(cache_mutex_);
    return cache_.size();
}

void TransitionEvaluator::march(double from, std::span<const double> targets,
                                const std::function<void(std::size_t, const Matrix&)>& emit) const {
    if (targets.empty()) return;
    const bool forward = targets.back() >= from;

    // Interleave the coefficient breakpoints so that no step straddles a kink.
    std::vector<double> stops;
    std::vector<std::ptrdiff_t> owner;  // index into targets, -1 for breakpoints
    std::vector<double> kinks;
    for (double b : system_.breakpoints) {
        const bool between = forward ? (b > from && b < targets.back())
                                     : (b < from && b > targets.back());
        if (between) kinks.push_back(b);
    }
    std::sort(kinks.begin(), kinks.end());
    if (!forward) std::reverse(kinks.begin(), kinks.end());
    std::size_t k = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        while (k < kinks.size() && (forward ? kinks[k] < targets[i] : kinks[k] > targets[i])) {
            stops.push_back(kinks[k++]);
            owner.push_back(-1);
        }
        stops.push_back(targets[i]);
        owner.push_back(static_cast<std::ptrdiff_t>(i));
    }

    StepControl<double> control;
    control.rel_tol = options_.rel_tol;
    control.abs_tol = options_.abs_tol;
    control.max_step = options_.max_step;
    DormandPrince<double> solver(control);
    const auto& A = system_.coefficient;
    auto rhs = [&A](double t, const Matrix& y) -> Matrix { return A(t) * y; };

    // Each segment between kinks restarts the step-size selection.
    std::size_t begin = 0;
    double t0 = from;
    Matrix y = Matrix::Identity(system_.dim, system_.dim);
    while (begin < stops.size()) {
        std::size_t end = begin;
        while (end < stops.size() && owner[end] >= 0) ++end;
        if (end < stops.size()) ++end;  // include the kink itself
        const std::span<const double> segment(stops.data() + begin, end - begin);
        solver.march(rhs, t0, y, segment, [&](std::size_t j, const Matrix& state) {
            const std::ptrdiff_t who = owner[begin + j];
            if (who >= 0) emit(static_cast<std::size_t>(who), state);
            if (begin + j + 1 == end) y = state;
        });
        t0 = stops[end - 1];
        begin = end;
    }
}

Matrix TransitionEvaluator::integrate(double from, double to) const {
    Matrix out;
    const double target[1] = {to};
    march(from, std::span<const double>(target, 1), [&](std::size_t, const Matrix& m) { out = m; });
    return out;
}

Matrix TransitionEvaluator::transition(double t, double s) const {
    require_in_domain(growth_, t);
    require_in_domain(growth_, s);
    if (t == s) return Matrix::Identity(system_.dim, system_.dim);
    const auto key = std::make_pair(t, s);
    if (options_.use_cache) {
        std::lock_guard lock(cache_mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    Matrix phi = integrate(s, t);
    if (options_.use_cache) {
        std::lock_guard lock(cache_mutex_);
        cache_.emplace(key, phi);
    }
    return phi;
}

Matrix TransitionEvaluator::fundamental(double t) const { return transition(t, anchor_); }

Vector TransitionEvaluator::solve(double t, double t0, const Vector& x0) const {
    if (x0.size() != system_.dim) throw ArgumentError("initial vector has the wrong dimension");
    if (t == t0) return x0;
    return transition(t, t0) * x0;
}

std::vector<Matrix> TransitionEvaluator::fundamental_on(std::span<const double> times) const {
    for (double t : times) require_in_domain(growth_, t);
    std::vector<Matrix> out(times.size());

    std::vector<double> above, below;
    for (double t : times) {
        if (t > anchor_)
            above.push_back(t);
        else if (t < anchor_)
            below.push_back(t);
    }
    std::sort(above.begin(), above.end());
    above.erase(std::unique(above.begin(), above.end()), above.end());
    std::sort(below.begin(), below.end(), std::greater<>());
    below.erase(std::unique(below.begin(), below.end()), below.end());

    std::map<double, Matrix> values;
    values.emplace(anchor_, Matrix::Identity(system_.dim, system_.dim));
    march(anchor_, above, [&](std::size_t i, const Matrix& m) { values.emplace(above[i], m); });
    march(anchor_, below, [&](std::size_t i, const Matrix& m) { values.emplace(below[i], m); });
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = values.at(times[i]);
    return out;
}

FundamentalTable FundamentalTable::build(const TransitionEvaluator& ev,
                                         std::span<const double> times) {
    FundamentalTable table;
    table.times.assign(times.begin(), times.end());
    table.phi = ev.fundamental_on(times);
    table.phi_inv.reserve(times.size());
    table.log_h.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        Eigen::PartialPivLU<Matrix> lu(table.phi[i]);
        table.phi_inv.push_back(lu.inverse());
        table.log_h.push_back(hdicho::log_h(ev.growth(), times[i]));
    }
    return table;
}

}  // namespace hdicho
