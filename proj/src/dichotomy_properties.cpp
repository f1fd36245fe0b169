#include <algorithm>
#include <cmath>
#include <map>

#include "hdicho/dichotomy.hpp"
#include "hdicho/linalg.hpp"
#include "hdicho/parallel.hpp"

namespace hdicho {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fundamental matrices on an arbitrary set of times, looked up by exact value.
class FundamentalLookup {
public:
    FundamentalLookup(const TransitionEvaluator& ev, std::vector<double> times) {
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        const auto phi = ev.fundamental_on(times);
        for (std::size_t i = 0; i < times.size(); ++i) values_.emplace(times[i], phi[i]);
    }

    const Matrix& at(double t) const { return values_.at(t); }

private:
    std::map<double, Matrix> values_;
};

}  // namespace

std::string to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::found: return "found";
        case SearchStatus::none: return "none";
        case SearchStatus::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

NoncriticalityReport noncritical_check(const TransitionEvaluator& ev, double T,
                                       std::span<const double> t_grid,
                                       const std::vector<Vector>& directions,
                                       std::size_t window_points, double tol) {
    const auto& g = ev.growth();
    require_in_domain(g, T, "window radius T");
    const double radius = log_h(g, T);
    if (!(radius > 0)) throw ArgumentError("T must exceed the identity element");
    if (window_points < 3) throw ArgumentError("window needs at least 3 points");
    if (directions.empty()) throw ArgumentError("noncriticality needs at least one direction");
    if (window_points % 2 == 0) ++window_points;  // keep t itself at the center

    NoncriticalityReport report;
    report.T = T;
    report.window_points = window_points;
    report.directions = directions.size();

    // Windows uniform in ln h on the closed ball of radius ln h(T); the center is t itself.
    std::vector<double> kept;
    std::vector<std::vector<double>> windows;
    const std::size_t half = window_points / 2;
    for (double t : t_grid) {
        require_in_domain(g, t);
        const double y = log_h(g, t);
        std::vector<double> window(window_points);
        bool escaped = false;
        for (std::size_t k = 0; k < window_points; ++k) {
            if (k == half) {
                window[k] = t;
                continue;
            }
            const double offset =
                radius * (static_cast<double>(k) - static_cast<double>(half)) / half;
            try {
                window[k] = from_log_h(g, y + offset);
            } catch (const OverflowError&) {
                escaped = true;
                break;
            }
        }
        if (escaped) {
            report.escaped.push_back(t);
            continue;
        }
        kept.push_back(t);
        windows.push_back(std::move(window));
    }
    report.t_grid = kept;
    if (kept.empty()) {
        report.verdict = Verdict::inconclusive;
        return report;
    }

    std::vector<double> all;
    for (const auto& w : windows) all.insert(all.end(), w.begin(), w.end());
    const FundamentalLookup phi(ev, std::move(all));

    struct Best {
        double ratio = -1;
        std::size_t direction = 0;
    };
    std::vector<Best> best(kept.size());
    parallel_for(kept.size(), [&](std::size_t i) {
        const auto& window = windows[i];
        std::vector<const Matrix*> mats;
        mats.reserve(window.size());
        for (double u : window) mats.push_back(&phi.at(u));
        const Matrix& center = phi.at(kept[i]);
        for (std::size_t d = 0; d < directions.size(); ++d) {
            const Vector& xi = directions[d];
            double sup = 0;
            for (const Matrix* m : mats) sup = std::max(sup, (*m * xi).norm());
            const double ratio = sup > 0 ? (center * xi).norm() / sup : 0.0;
            if (ratio > best[i].ratio) best[i] = {ratio, d};
        }
    });

    report.ratios.resize(kept.size());
    report.theta = -1;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        report.ratios[i] = best[i].ratio;
        if (best[i].ratio > report.theta) {
            report.theta = best[i].ratio;
            report.witness_t = kept[i];
            report.witness_direction = directions[best[i].direction];
        }
    }
    report.verdict = report.theta < 1 - tol ? Verdict::holds : Verdict::violated;
    return report;
}

std::vector<Triple> make_triples(std::span<const double> points) {
    std::vector<double> p(points.begin(), points.end());
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    std::vector<Triple> out;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t k = i + 1; k < p.size(); ++k)
            for (std::size_t j = i; j <= k; ++j) out.push_back({p[i], p[j], p[k]});
    return out;
}

ExpansivenessReport expansive_check(const TransitionEvaluator& ev, double L, double beta,
                                    std::span<const Triple> triples,
                                    const std::vector<Vector>& directions, double tol) {
    if (!(L > 0) || !(beta > 0)) throw ArgumentError("expansiveness needs L > 0 and beta > 0");
    if (directions.empty()) throw ArgumentError("expansiveness needs at least one direction");
    const auto& g = ev.growth();
    std::vector<double> times;
    for (const auto& tr : triples) {
        if (!(tr.a <= tr.t && tr.t <= tr.b)) throw ArgumentError("triples need a <= t <= b");
        times.insert(times.end(), {tr.a, tr.t, tr.b});
    }

    ExpansivenessReport report;
    report.L = L;
    report.beta = beta;
    if (triples.empty()) {
        report.verdict = Verdict::inconclusive;
        return report;
    }
    const FundamentalLookup phi(ev, times);

    struct Worst {
        double margin = kInf;
        double scaled = kInf;
        std::size_t direction = 0;
    };
    std::vector<Worst> worst(triples.size());
    parallel_for(triples.size(), [&](std::size_t i) {
        const auto& tr = triples[i];
        const double ya = log_h(g, tr.a), yt = log_h(g, tr.t), yb = log_h(g, tr.b);
        const double wa = std::exp(-beta * (yt - ya));
        const double wb = std::exp(-beta * (yb - yt));
        const Matrix& pa = phi.at(tr.a);
        const Matrix& pt = phi.at(tr.t);
        const Matrix& pb = phi.at(tr.b);
        for (std::size_t d = 0; d < directions.size(); ++d) {
            const Vector& xi = directions[d];
            const double xt = (pt * xi).norm();
            const double rhs = L * (wa * (pa * xi).norm() + wb * (pb * xi).norm());
            const double margin = rhs - xt;
            const double scale = std::max(xt, rhs);
            const double scaled = scale > 0 ? margin / scale : 0.0;
            if (scaled < worst[i].scaled) worst[i] = {margin, scaled, d};
        }
    });

    std::map<double, double> by_t;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        auto [it, fresh] = by_t.emplace(triples[i].t, worst[i].scaled);
        if (!fresh) it->second = std::min(it->second, worst[i].scaled);
        if (worst[i].scaled < report.worst_scaled_margin) {
            report.worst_scaled_margin = worst[i].scaled;
            report.worst_margin = worst[i].margin;
            report.witness = triples[i];
            report.witness_direction = directions[worst[i].direction];
        }
    }
    report.worst_by_t.assign(by_t.begin(), by_t.end());
    report.samples = triples.size() * directions.size();
    report.verdict = report.worst_scaled_margin >= -tol ? Verdict::holds : Verdict::violated;
    return report;
}

namespace {

// Maximizes |Phi(t) xi| for t between lo and hi by golden-section search in ln h.
std::pair<double, double> refine_maximum(const TransitionEvaluator& ev, const Vector& xi,
                                         double lo, double hi) {
    const auto& g = ev.growth();
    auto value = [&](double y) {
        const double t = from_log_h(g, y);
        return std::make_pair((ev.fundamental(t) * xi).norm(), t);
    };
    const double invphi = (std::sqrt(5.0) - 1) / 2;
    double a = log_h(g, lo), b = log_h(g, hi);
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    auto fc = value(c), fd = value(d);
    for (int it = 0; it < 80 && b - a > 1e-12 * (1 + std::abs(a)); ++it) {
        if (fc.first >= fd.first) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = value(d);
        }
    }
    const auto best = fc.first >= fd.first ? fc : fd;
    return {best.first, best.second};
}

}  // namespace

BoundedSearchResult bounded_solution_search(const TransitionEvaluator& ev,
                                            std::span<const double> grid,
                                            const std::vector<Vector>& directions,
                                            const BoundedSearchOptions& options) {
    if (grid.size() < 3) throw ArgumentError("bounded-solution search needs at least 3 grid points");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw ArgumentError("grid must be sorted in increasing order");
    const int n = ev.dim();
    const auto& g = ev.growth();
    const auto phi = ev.fundamental_on(grid);
    const std::size_t m = grid.size();

    std::vector<Vector> candidates;
    for (const auto& d : directions) {
        if (d.size() != n) throw ArgumentError("direction has the wrong dimension");
        if (d.norm() > 0) candidates.push_back(d.normalized());
    }
    if (n >= 2) {
        // Directions that are smallest at the left end, at the right end, and at both.
        Matrix stacked(2 * n, n);
        stacked << phi.front(), phi.back();
        for (const Matrix* mat : {&phi.front(), &phi.back(), &static_cast<const Matrix&>(stacked)}) {
            Eigen::JacobiSVD<Matrix> svd(*mat, Eigen::ComputeFullV);
            Vector v = svd.matrixV().col(n - 1);
            candidates.push_back(v.normalized());
        }
    }
    if (candidates.empty()) throw ArgumentError("bounded-solution search needs directions");

    std::vector<double> sups(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t c) {
        double sup = 0;
        for (const auto& p : phi) sup = std::max(sup, (p * candidates[c]).norm());
        sups[c] = sup;
    });
    std::size_t pick = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
        if (sups[c] < sups[pick]) pick = c;

    BoundedSearchResult result;
    result.direction = candidates[pick];
    std::vector<double> profile(m);
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < m; ++i) {
        profile[i] = (phi[i] * result.direction).norm();
        if (profile[i] > profile[argmax]) argmax = i;
    }

    double threshold = 0;
    if (options.threshold) {
        threshold = *options.threshold;
    } else {
        const double window = std::log(10.0);
        double central = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (std::abs(log_h(g, grid[i])) <= window) central = std::max(central, profile[i]);
        if (central == 0) central = result.direction.norm();  // |x(e*)|
        threshold = 10 * central;
    }

    double sup = profile[argmax];
    result.argmax_t = grid[argmax];
    if (argmax > 0 && argmax + 1 < m) {
        const auto [value, t] = refine_maximum(ev, result.direction, grid[argmax - 1], grid[argmax + 1]);
        if (value > sup) {
            sup = value;
            result.argmax_t = t;
        }
    }

    constexpr double slack = 1e-9;
    result.boundary_monotone = profile[0] <= profile[1] * (1 + slack) &&
                               profile[m - 1] <= profile[m - 2] * (1 + slack);
    // Growth toward either end rules the candidate out; a bump that stays
    // monotone at the ends but exceeds the threshold cannot be classified.
    if (!result.boundary_monotone)
        result.status = SearchStatus::none;
    else if (sup <= threshold)
        result.status = SearchStatus::found;
    else
        result.status = SearchStatus::inconclusive;

    double scale = 1;
    if (options.normalize_at) {
        const double at = (ev.fundamental(*options.normalize_at) * result.direction).norm();
        if (!(at > 0)) throw NumericalError("solution vanishes at the normalization point");
        scale = 1 / at;
    }
    result.threshold = threshold * scale;
    result.sup_norm = sup * scale;
    for (auto& p : profile) p *= scale;
    result.profile = std::move(profile);
    return result;
}

BoundedSubspace bounded_subspace(const TransitionEvaluator& ev, double s, double horizon,
                                 Side side, double gap_tol) {
    if (!(gap_tol > 0)) throw ArgumentError("gap_tol must be positive");
    if (side == Side::forward ? !(horizon > s) : !(horizon < s))
        throw ArgumentError("horizon lies on the wrong side of s");
    const int n = ev.dim();
    const Matrix phi = ev.transition(horizon, s);
    Eigen::JacobiSVD<Matrix> svd(phi, Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();  // descending

    BoundedSubspace out;
    out.singular_values = sv;
    int unbounded = -1;  // number of leading singular values classified as unbounded
    if (sv(0) <= gap_tol) {
        unbounded = 0;
        out.gap_ratio = kInf;
    } else if (sv(n - 1) >= 10 * gap_tol) {
        unbounded = n;
        out.gap_ratio = kInf;
    } else {
        double best = 0;
        int split = 0;
        for (int i = 0; i + 1 < n; ++i) {
            const double ratio = sv(i + 1) > 0 ? sv(i) / sv(i + 1) : kInf;
            if (ratio > best) {
                best = ratio;
                split = i + 1;
            }
        }
        out.gap_ratio = best;
        if (best >= 10) unbounded = split;
    }
    if (unbounded < 0) {
        out.conclusive = false;
        out.basis = Matrix(n, 0);
        return out;
    }
    out.conclusive = true;
    out.basis = svd.matrixV().rightCols(n - unbounded);
    return out;
}

}  // namespace hdicho
