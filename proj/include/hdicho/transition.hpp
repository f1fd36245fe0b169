#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hdicho/growth_group.hpp"
#include "hdicho/integrator.hpp"
#include "hdicho/linear_system.hpp"

namespace hdicho {

struct TransitionOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    /// Normalization point of the fundamental matrix; e* when absent.
    std::optional<double> anchor;
    bool use_cache = true;
};

/// Computes transition matrices Phi(t,s) of a linear system by integrating
/// X' = A(tau) X, X(s) = I from s to t. Results do not depend on the cache.
class TransitionEvaluator {
public:
    TransitionEvaluator(LinearSystem system, GrowthRated growth, TransitionOptions options = {});

    TransitionEvaluator(const TransitionEvaluator& other);
    TransitionEvaluator& operator=(const TransitionEvaluator&) = delete;

    const LinearSystem& system() const { return system_; }
    const GrowthRated& growth() const { return growth_; }
    const TransitionOptions& options() const { return options_; }
    double anchor() const { return anchor_; }
    int dim() const { return system_.dim; }

    Matrix transition(double t, double s) const;

    /// Phi(t) = Phi(t, anchor).
    Matrix fundamental(double t) const;

    /// x(t, t0, x0) = Phi(t, t0) x0.
    Vector solve(double t, double t0, const Vector& x0) const;

    /// Phi(t_i, anchor) for every requested time, computed by two marches
    /// outward from the anchor. Times may be in any order and repeat.
    std::vector<Matrix> fundamental_on(std::span<const double> times) const;

    std::size_t cache_size() const;

private:
    Matrix integrate(double from, double to) const;
    void march(double from, std::span<const double> sorted_targets,
               const std::function<void(std::size_t, const Matrix&)>& emit) const;

    LinearSystem system_;
    GrowthRated growth_;
    TransitionOptions options_;
    double anchor_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<double, double>, Matrix> cache_;
};

/// Fundamental matrices and their inverses sampled on a grid.
struct FundamentalTable {
    std::vector<double> times;
    std::vector<double> log_h;
    std::vector<Matrix> phi;
    std::vector<Matrix> phi_inv;

    static FundamentalTable build(const TransitionEvaluator& ev, std::span<const double> times);
    std::size_t size() const { return times.size(); }
};

}  // namespace hdicho
