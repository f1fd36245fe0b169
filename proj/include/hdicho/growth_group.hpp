#pragma once

// Growth rates h: J=(a0,+inf) -> (0,+inf) and the ordered abelian group (J,*)
// they induce, t*s = h^{-1}(h(t)h(s)).
//
// Every group computation is carried out in logarithmic h-coordinates
// y = ln h(t) and mapped back to J exactly once.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hdicho/errors.hpp"

namespace hdicho {

template <typename Scalar>
struct GrowthRate {
    using Map = std::function<Scalar(Scalar)>;

    Map forward;         // h
    Map inverse;         // h^{-1}
    Map log_forward;     // ln h
    Map log_inverse;     // y -> h^{-1}(e^y)
    Map derivative;      // h', empty when not differentiable
    Map log_derivative;  // h'/h, empty when not differentiable
    Scalar lower_endpoint = -std::numeric_limits<Scalar>::infinity();
    std::string name;

    bool differentiable() const { return static_cast<bool>(derivative); }

    bool contains(Scalar t) const { return std::isfinite(t) && t > lower_endpoint; }
};

using GrowthRated = GrowthRate<double>;

namespace growth {

template <typename Scalar = double>
GrowthRate<Scalar> exponential() {
    GrowthRate<Scalar> g;
    g.forward = [](Scalar t) { return std::exp(t); };
    g.inverse = [](Scalar y) { return std::log(y); };
    g.log_forward = [](Scalar t) { return t; };
    g.log_inverse = [](Scalar y) { return y; };
    g.derivative = [](Scalar t) { return std::exp(t); };
    g.log_derivative = [](Scalar) { return Scalar(1); };
    g.name = "exp";
    return g;
}

template <typename Scalar = double>
GrowthRate<Scalar> power(Scalar p) {
    if (!(p > 0) || !std::isfinite(p))
        throw ArgumentError("power growth rate needs p > 0, got " + std::to_string(p));
    GrowthRate<Scalar> g;
    g.forward = [p](Scalar t) { return std::pow(t, p); };
    g.inverse = [p](Scalar y) { return std::pow(y, 1 / p); };
    g.log_forward = [p](Scalar t) { return p * std::log(t); };
    g.log_inverse = [p](Scalar y) { return std::exp(y / p); };
    g.derivative = [p](Scalar t) { return p * std::pow(t, p - 1); };
    g.log_derivative = [p](Scalar t) { return p / t; };
    g.lower_endpoint = 0;
    g.name = "power:" + std::to_string(p);
    return g;
}

template <typename Scalar = double>
GrowthRate<Scalar> identity() {
    GrowthRate<Scalar> g;
    g.forward = [](Scalar t) { return t; };
    g.inverse = [](Scalar y) { return y; };
    g.log_forward = [](Scalar t) { return std::log(t); };
    g.log_inverse = [](Scalar y) { return std::exp(y); };
    g.derivative = [](Scalar) { return Scalar(1); };
    g.log_derivative = [](Scalar t) { return 1 / t; };
    g.lower_endpoint = 0;
    g.name = "identity";
    return g;
}

/// h(t) = e^t - 1 on (0, +inf).
template <typename Scalar = double>
GrowthRate<Scalar> expm1() {
    GrowthRate<Scalar> g;
    g.forward = [](Scalar t) { return std::expm1(t); };
    g.inverse = [](Scalar y) { return std::log1p(y); };
    g.log_forward = [](Scalar t) {
        return t > 30 ? t + std::log1p(-std::exp(-t)) : std::log(std::expm1(t));
    };
    g.log_inverse = [](Scalar y) {
        return y > 30 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
    };
    g.derivative = [](Scalar t) { return std::exp(t); };
    g.log_derivative = [](Scalar t) { return 1 / -std::expm1(-t); };
    g.lower_endpoint = 0;
    g.name = "expm1";
    return g;
}

/// Resolves "exp", "identity", "power:<p>" or "expm1".
template <typename Scalar = double>
GrowthRate<Scalar> from_name(const std::string& name) {
    if (name == "exp") return exponential<Scalar>();
    if (name == "identity") return identity<Scalar>();
    if (name == "expm1") return expm1<Scalar>();
    if (name.rfind("power:", 0) == 0) {
        const std::string arg = name.substr(6);
        std::size_t used = 0;
        double p = 0;
        try {
            p = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != arg.size())
            throw ArgumentError("malformed power growth rate '" + name + "'");
        auto g = power<Scalar>(static_cast<Scalar>(p));
        g.name = name;
        return g;
    }
    throw ArgumentError("unknown growth rate '" + name + "'");
}

inline std::vector<std::string> builtin_names() { return {"exp", "identity", "power:3", "expm1"}; }

}  // namespace growth

template <typename Scalar>
void require_in_domain(const GrowthRate<Scalar>& g, Scalar t, const char* what = "point") {
    if (!g.contains(t))
        throw DomainError(std::string(what) + " " + std::to_string(t) + " lies outside J = (" +
                          std::to_string(g.lower_endpoint) + ", +inf) for growth rate " + g.name);
}

/// ln h(t), the coordinate in which the group is additive.
template <typename Scalar>
Scalar log_h(const GrowthRate<Scalar>& g, Scalar t) {
    return g.log_forward(t);
}

/// Maps a log h-coordinate back to J; fails when h leaves the floating range.
template <typename Scalar>
Scalar from_log_h(const GrowthRate<Scalar>& g, Scalar y) {
    constexpr Scalar kMaxLog = Scalar(709.0);
    if (!std::isfinite(y) || std::abs(y) > kMaxLog)
        throw OverflowError("h-coordinate e^" + std::to_string(y) + " exceeds the floating range");
    const Scalar t = g.log_inverse(y);
    if (!g.contains(t))
        throw OverflowError("h-coordinate e^" + std::to_string(y) + " maps outside J");
    return t;
}

/// e* = h^{-1}(1).
template <typename Scalar>
Scalar identity_element(const GrowthRate<Scalar>& g) {
    return g.inverse(Scalar(1));
}

template <typename Scalar>
Scalar star(const GrowthRate<Scalar>& g, Scalar t, Scalar s) {
    require_in_domain(g, t);
    require_in_domain(g, s);
    const Scalar lt = log_h(g, t);
    const Scalar ls = log_h(g, s);
    if (ls == 0) return t;
    if (lt == 0) return s;
    return from_log_h(g, lt + ls);
}

template <typename Scalar>
Scalar star_inverse(const GrowthRate<Scalar>& g, Scalar t) {
    require_in_domain(g, t);
    const Scalar lt = log_h(g, t);
    if (lt == 0) return t;
    return from_log_h(g, -lt);
}

/// t^{*k} = h^{-1}(h(t)^k).
template <typename Scalar>
Scalar star_power(const GrowthRate<Scalar>& g, Scalar t, long k) {
    require_in_domain(g, t);
    if (k == 0) return identity_element(g);
    if (k == 1) return t;
    const Scalar y = static_cast<Scalar>(k) * log_h(g, t);
    if (!std::isfinite(y) || std::abs(y) > Scalar(709.0))
        throw OverflowError("h(t)^k overflows for t = " + std::to_string(t) + ", k = " +
                            std::to_string(k));
    return from_log_h(g, y);
}

template <typename Scalar>
Scalar abs_star(const GrowthRate<Scalar>& g, Scalar t) {
    require_in_domain(g, t);
    return log_h(g, t) >= 0 ? t : star_inverse(g, t);
}

/// d(t,s) = |t * s^{*-1}|_*, computed as h^{-1}(exp|ln h(t) - ln h(s)|).
template <typename Scalar>
Scalar dist(const GrowthRate<Scalar>& g, Scalar t, Scalar s) {
    require_in_domain(g, t);
    require_in_domain(g, s);
    const Scalar y = std::abs(log_h(g, t) - log_h(g, s));
    if (y == 0) return identity_element(g);
    return from_log_h(g, y);
}

/// True iff 1/h(L) <= h(t)/h(s) <= h(L), i.e. d(t,s) <= L.
template <typename Scalar>
bool in_ball(const GrowthRate<Scalar>& g, Scalar t, Scalar s, Scalar L) {
    require_in_domain(g, t);
    require_in_domain(g, s);
    require_in_domain(g, L);
    const Scalar radius = log_h(g, L);
    if (!(radius > 0)) throw ArgumentError("ball radius L must exceed the identity element");
    const Scalar y = std::abs(log_h(g, t) - log_h(g, s));
    return y <= radius * (1 + 8 * std::numeric_limits<Scalar>::epsilon());
}

template <typename Scalar>
struct PartitionSpec {
    Scalar anchor;
    Scalar mesh;
    long kmin = 0;
    long kmax = 0;
};

/// Points s*T^{*k} for k in [kmin, kmax+1]; consecutive points sit at distance T.
template <typename Scalar>
std::vector<Scalar> partition(const GrowthRate<Scalar>& g, const PartitionSpec<Scalar>& spec) {
    require_in_domain(g, spec.anchor, "partition anchor");
    require_in_domain(g, spec.mesh, "partition mesh");
    const Scalar lT = log_h(g, spec.mesh);
    if (!(lT > 0)) throw ArgumentError("partition mesh T must exceed the identity element");
    if (spec.kmax < spec.kmin) throw ArgumentError("partition needs kmin <= kmax");
    const Scalar ls = log_h(g, spec.anchor);
    std::vector<Scalar> points;
    points.reserve(static_cast<std::size_t>(spec.kmax - spec.kmin + 2));
    for (long k = spec.kmin; k <= spec.kmax + 1; ++k) {
        if (k == 0) {
            points.push_back(spec.anchor);
            continue;
        }
        try {
            points.push_back(from_log_h(g, ls + static_cast<Scalar>(k) * lT));
        } catch (const OverflowError&) {
            throw DomainError("partition point k = " + std::to_string(k) + " escapes J");
        }
    }
    return points;
}

/// Points with ln h uniformly spaced over [log_lo, log_hi]; both ends included.
template <typename Scalar>
std::vector<Scalar> log_h_grid(const GrowthRate<Scalar>& g, Scalar log_lo, Scalar log_hi,
                               std::size_t count) {
    if (count < 2) throw ArgumentError("grid needs at least two points");
    if (!(log_lo < log_hi)) throw ArgumentError("grid needs log_lo < log_hi");
    std::vector<Scalar> points(count);
    const Scalar step = (log_hi - log_lo) / static_cast<Scalar>(count - 1);
    // A node within rounding of ln h = 0 is meant to be e*.
    const Scalar snap = 8 * std::numeric_limits<Scalar>::epsilon() *
                        std::max(std::abs(log_lo), std::abs(log_hi));
    for (std::size_t i = 0; i < count; ++i) {
        const Scalar y = i + 1 == count ? log_hi : log_lo + step * static_cast<Scalar>(i);
        points[i] = std::abs(y) <= snap ? identity_element(g) : from_log_h(g, y);
    }
    return points;
}

/// Grid geometric in h: `per_decade` points per factor 10 of h between h_lo and h_hi.
template <typename Scalar>
std::vector<Scalar> h_decade_grid(const GrowthRate<Scalar>& g, Scalar h_lo, Scalar h_hi,
                                  std::size_t per_decade) {
    if (!(h_lo > 0) || !(h_lo < h_hi)) throw ArgumentError("need 0 < h_lo < h_hi");
    const Scalar decades = std::log10(h_hi / h_lo);
    const auto count =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(decades * per_decade)) + 1);
    return log_h_grid(g, std::log(h_lo), std::log(h_hi), count);
}

}  // namespace hdicho
