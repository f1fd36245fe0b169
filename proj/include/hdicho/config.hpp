#pragma once

// JSON analysis configuration. Every numeric default lives in the member
// initializers below, so the echo in a report is self-describing.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdicho/transition.hpp"

namespace hdicho {

struct AnalysisConfig {
    std::string growth_name = "exp";
    GrowthRated growth;

    // Exactly one of builtin / expressions / constant is used.
    std::optional<BuiltinSystem> builtin;
    ParameterMap params;
    std::vector<std::vector<std::string>> expressions;
    std::optional<Matrix> constant;

    // Analysis interval in h-coordinates.
    double h_lo = 1e-2;
    double h_hi = 1e2;
    std::size_t points_per_decade = 200;
    std::vector<double> extra_points;

    TransitionOptions integrator;
    double rank_tol = 1e-8;
    double circle_tol = 1e-6;
    double verdict_tol = 1e-8;
    double gfs_threshold = 1e-6;

    std::optional<Matrix> projector;
    std::optional<Matrix> projector_plus;
    std::optional<Matrix> projector_minus;
    std::optional<double> K;
    std::optional<double> alpha;
    double safety = 0.95;
    // Half-lines (a0, left_end] and [right_start, +inf) in t; e* when absent.
    std::optional<double> left_end;
    std::optional<double> right_start;

    std::optional<double> floquet_T;
    int floquet_N = 20;
    std::size_t u_points = 1000;
    int n_max = 3;

    std::optional<double> noncritical_T;
    std::size_t noncritical_points = 60;
    std::size_t window_points = 81;

    std::optional<double> expansive_L;
    std::optional<double> expansive_beta;
    std::size_t triple_points = 24;

    std::size_t direction_count = 2000;
    std::optional<double> bounded_threshold;
    std::optional<double> normalize_at;
    double gap_tol = 10.0;

    std::vector<std::pair<double, double>> transition_pairs;
    std::size_t group_samples = 1000;
    std::uint64_t seed = 0;

    nlohmann::json source;  // the parsed file, echoed into reports

    LinearSystem make_system() const;
    TransitionEvaluator make_evaluator() const;
};

struct LoadedConfig {
    AnalysisConfig config;
    std::vector<std::string> warnings;  // unknown keys
};

/// Parses and validates; throws ConfigError listing every problem found.
LoadedConfig parse_config(const std::string& text, const std::string& source_name = "<config>");
LoadedConfig load_config(const std::string& path);

}  // namespace hdicho
