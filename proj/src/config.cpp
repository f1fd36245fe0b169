#include "hdicho/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hdicho {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// Walks one JSON object, remembering which keys were consumed so the rest
// can be reported as unknown.
class Section {
public:
    Section(const json* node, std::string path, std::vector<std::string>& errors)
        : node_(node), path_(std::move(path)), errors_(errors) {
        if (node_ && !node_->is_object()) {
            errors_.push_back(path_ + ": expected an object");
            node_ = nullptr;
        }
    }

    bool present() const { return node_ != nullptr; }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        if (!node_) return nullptr;
        const auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    std::optional<double> number(const std::string& key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            errors_.push_back(where(key) + ": expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    void number(const std::string& key, double& out) {
        if (auto v = number(key)) out = *v;
    }

    template <typename Int>
    void count(const std::string& key, Int& out, Int min_value) {
        const json* v = raw(key);
        if (!v) return;
        if (!v->is_number_integer() || v->get<long long>() < static_cast<long long>(min_value)) {
            errors_.push_back(where(key) + ": expected an integer >= " + std::to_string(min_value));
            return;
        }
        out = static_cast<Int>(v->get<long long>());
    }

    std::optional<Matrix> matrix(const std::string& key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        return parse_matrix(*v, where(key));
    }

    std::optional<Matrix> parse_matrix(const json& v, const std::string& at) {
        if (!v.is_array() || v.empty()) {
            errors_.push_back(at + ": expected a non-empty array of rows");
            return std::nullopt;
        }
        const std::size_t rows = v.size();
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
        for (std::size_t i = 0; i < rows; ++i) {
            if (!v[i].is_array() || v[i].size() != rows) {
                errors_.push_back(at + ": matrix must be square");
                return std::nullopt;
            }
            for (std::size_t j = 0; j < rows; ++j) {
                if (!v[i][j].is_number()) {
                    errors_.push_back(at + ": entries must be numbers");
                    return std::nullopt;
                }
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
            }
        }
        return m;
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void unknown_keys(std::vector<std::string>& warnings) const {
        if (!node_) return;
        for (const auto& [key, _] : node_->items())
            if (!seen_.count(key)) warnings.push_back("unknown key '" + where(key) + "' ignored");
    }

private:
    const json* node_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

LinearSystem AnalysisConfig::make_system() const {
    if (builtin) return make_builtin(*builtin, growth, params);
    if (constant) return make_constant_system(*constant, growth);
    return make_expression_system(expressions, growth);
}

TransitionEvaluator AnalysisConfig::make_evaluator() const {
    return TransitionEvaluator(make_system(), growth, integrator);
}

LoadedConfig parse_config(const std::string& text, const std::string& source_name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, col] = line_column(text, offset);
        throw ConfigError(source_name + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": parse error: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(source_name + ": top level must be an object");

    LoadedConfig out;
    AnalysisConfig& c = out.config;
    c.source = doc;
    std::vector<std::string> errors;
    std::vector<std::unique_ptr<Section>> sections;
    auto section = [&](Section& parent, const std::string& key) -> Section& {
        sections.push_back(std::make_unique<Section>(parent.raw(key), "config." + key, errors));
        return *sections.back();
    };
    Section root(&doc, "config", errors);

    // growth rate
    bool growth_ok = false;
    if (const json* g = root.raw("growth_rate")) {
        try {
            if (g->is_string()) {
                c.growth_name = g->get<std::string>();
            } else if (g->is_object() && g->contains("name")) {
                c.growth_name = (*g)["name"].get<std::string>();
                if (c.growth_name == "power") {
                    if (!g->contains("p") || !(*g)["p"].is_number())
                        throw ArgumentError("power growth rate needs a numeric 'p'");
                    c.growth_name = "power:" + fmt((*g)["p"].get<double>());
                }
            } else {
                throw ArgumentError("expected a name or {\"name\": ..., \"p\": ...}");
            }
            c.growth = growth::from_name<double>(c.growth_name);
            growth_ok = true;
        } catch (const std::exception& e) {
            errors.push_back(std::string("config.growth_rate: ") + e.what());
        }
    } else {
        c.growth = growth::exponential<double>();
        growth_ok = true;
    }
    const double e_star = growth_ok ? identity_element(c.growth) : 0.0;
    auto check_T = [&](const std::optional<double>& T, const std::string& where) {
        if (!T || !growth_ok) return;
        if (!c.growth.contains(*T) || !(log_h(c.growth, *T) > 0))
            errors.push_back(where + ": T must exceed identity element e* = " + fmt(e_star));
    };

    // system
    Section& sys = section(root, "system");
    if (!sys.present()) {
        errors.push_back("config.system: missing (builtin, matrix or constant)");
    } else {
        const json* b = sys.raw("builtin");
        const json* m = sys.raw("matrix");
        const json* k = sys.raw("constant");
        const int given = (b != nullptr) + (m != nullptr) + (k != nullptr);
        if (given != 1) errors.push_back("config.system: give exactly one of builtin, matrix, constant");
        if (b) {
            try {
                c.builtin = parse_builtin_system(b->get<std::string>());
            } catch (const std::exception& e) {
                errors.push_back(std::string("config.system.builtin: ") + e.what());
            }
        }
        Section& params = section(sys, "params");
        if (params.present())
            for (const auto& [key, value] : sys.raw("params")->items()) {
                params.raw(key);
                if (!value.is_number())
                    errors.push_back("config.system.params." + key + ": expected a number");
                else
                    c.params[key] = value.get<double>();
            }
        if (m) {
            if (!m->is_array() || m->empty()) {
                errors.push_back("config.system.matrix: expected an array of rows");
            } else {
                for (const auto& row : *m) {
                    std::vector<std::string> r;
                    if (!row.is_array() || row.size() != m->size()) {
                        errors.push_back("config.system.matrix: matrix must be square");
                        break;
                    }
                    for (const auto& cell : row) {
                        if (cell.is_string())
                            r.push_back(cell.get<std::string>());
                        else if (cell.is_number())
                            r.push_back(fmt(cell.get<double>()));
                        else
                            errors.push_back("config.system.matrix: entries must be strings or numbers");
                    }
                    c.expressions.push_back(std::move(r));
                }
            }
        }
        if (k) c.constant = sys.parse_matrix(*k, "config.system.constant");
    }

    // interval
    Section& interval = section(root, "interval");
    if (interval.present()) {
        const json* h = interval.raw("h");
        const json* t = interval.raw("t");
        const json* pick = h ? h : t;
        if ((h != nullptr) == (t != nullptr)) {
            errors.push_back("config.interval: give exactly one of h or t");
        } else if (!pick->is_array() || pick->size() != 2 || !(*pick)[0].is_number() ||
                   !(*pick)[1].is_number()) {
            errors.push_back("config.interval: expected [lo, hi]");
        } else {
            const double lo = (*pick)[0].get<double>(), hi = (*pick)[1].get<double>();
            if (!(lo < hi)) errors.push_back("config.interval: need lo < hi");
            if (h) {
                if (!(lo > 0)) errors.push_back("config.interval.h: h-coordinates must be positive");
                c.h_lo = lo;
                c.h_hi = hi;
            } else if (growth_ok) {
                for (double x : {lo, hi})
                    if (!c.growth.contains(x))
                        errors.push_back("config.interval.t: endpoint " + fmt(x) +
                                         " escapes J = (a0, +inf) with a0 = " +
                                         fmt(c.growth.lower_endpoint));
                if (c.growth.contains(lo) && c.growth.contains(hi) && lo < hi) {
                    c.h_lo = c.growth.forward(lo);
                    c.h_hi = c.growth.forward(hi);
                }
            }
        }
    }
    if (!(c.h_lo < 1 && c.h_hi > 1))
        errors.push_back("config.interval: the interval must contain e* (h = 1) in its interior");

    Section& grid = section(root, "grid");
    grid.count("points_per_decade", c.points_per_decade, std::size_t{2});
    if (const json* ex = grid.raw("extra_points")) {
        if (!ex->is_array())
            errors.push_back("config.grid.extra_points: expected an array");
        else
            for (const auto& v : *ex) {
                if (!v.is_number()) {
                    errors.push_back("config.grid.extra_points: entries must be numbers");
                    continue;
                }
                const double x = v.get<double>();
                if (growth_ok && !c.growth.contains(x))
                    errors.push_back("config.grid.extra_points: " + fmt(x) +
                                     " escapes J = (a0, +inf) with a0 = " +
                                     fmt(c.growth.lower_endpoint));
                c.extra_points.push_back(x);
            }
    }

    Section& tol = section(root, "tolerances");
    tol.number("rel", c.integrator.rel_tol);
    tol.number("abs", c.integrator.abs_tol);
    tol.number("max_step", c.integrator.max_step);
    tol.number("rank", c.rank_tol);
    tol.number("circle", c.circle_tol);
    tol.number("verdict", c.verdict_tol);
    tol.number("gfs", c.gfs_threshold);
    for (const auto& [name, value] :
         {std::pair{"rel", c.integrator.rel_tol}, {"abs", c.integrator.abs_tol},
          {"max_step", c.integrator.max_step}, {"rank", c.rank_tol}, {"circle", c.circle_tol},
          {"verdict", c.verdict_tol}, {"gfs", c.gfs_threshold}})
        if (!(value > 0)) errors.push_back(std::string("config.tolerances.") + name + ": must be positive");

    c.projector = root.matrix("projector");
    c.projector_plus = root.matrix("projector_plus");
    c.projector_minus = root.matrix("projector_minus");

    Section& dich = section(root, "dichotomy");
    c.K = dich.number("K");
    c.alpha = dich.number("alpha");
    dich.number("safety", c.safety);
    c.left_end = dich.number("left_end");
    c.right_start = dich.number("right_start");
    for (const auto& [name, v] : {std::pair{"left_end", c.left_end}, {"right_start", c.right_start}})
        if (v && growth_ok && !c.growth.contains(*v))
            errors.push_back(std::string("config.dichotomy.") + name + ": " + fmt(*v) +
                             " escapes J = (a0, +inf) with a0 = " + fmt(c.growth.lower_endpoint));
    if (c.left_end && c.right_start && !(*c.left_end <= *c.right_start))
        errors.push_back("config.dichotomy: need left_end <= right_start");
    if (c.K && !(*c.K >= 1)) errors.push_back("config.dichotomy.K: must be >= 1");
    if (c.alpha && !(*c.alpha > 0)) errors.push_back("config.dichotomy.alpha: must be > 0");
    if (!(c.safety > 0 && c.safety <= 1)) errors.push_back("config.dichotomy.safety: must lie in (0, 1]");

    Section& flo = section(root, "floquet");
    c.floquet_T = flo.number("T");
    flo.count("N", c.floquet_N, 5);
    flo.count("u_points", c.u_points, std::size_t{2});
    flo.count("n_max", c.n_max, 0);
    check_T(c.floquet_T, "config.floquet.T");

    Section& nc = section(root, "noncritical");
    c.noncritical_T = nc.number("T");
    nc.count("points", c.noncritical_points, std::size_t{1});
    nc.count("window_points", c.window_points, std::size_t{3});
    check_T(c.noncritical_T, "config.noncritical.T");

    Section& ex = section(root, "expansive");
    c.expansive_L = ex.number("L");
    c.expansive_beta = ex.number("beta");
    ex.count("points", c.triple_points, std::size_t{3});
    if (c.expansive_L && !(*c.expansive_L > 0)) errors.push_back("config.expansive.L: must be > 0");
    if (c.expansive_beta && !(*c.expansive_beta > 0))
        errors.push_back("config.expansive.beta: must be > 0");

    Section& dirs = section(root, "directions");
    dirs.count("count", c.direction_count, std::size_t{1});

    Section& bounded = section(root, "bounded");
    c.bounded_threshold = bounded.number("threshold");
    c.normalize_at = bounded.number("normalize_at");
    bounded.number("gap_tol", c.gap_tol);
    if (c.normalize_at && growth_ok && !c.growth.contains(*c.normalize_at))
        errors.push_back("config.bounded.normalize_at: escapes J = (a0, +inf) with a0 = " +
                         fmt(c.growth.lower_endpoint));

    Section& tr = section(root, "transition");
    if (const json* pairs = tr.raw("pairs")) {
        bool ok = pairs->is_array();
        if (ok)
            for (const auto& p : *pairs) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    ok = false;
                    break;
                }
                const double t = p[0].get<double>(), s = p[1].get<double>();
                if (growth_ok && (!c.growth.contains(t) || !c.growth.contains(s)))
                    errors.push_back("config.transition.pairs: (" + fmt(t) + ", " + fmt(s) +
                                     ") escapes J = (a0, +inf) with a0 = " +
                                     fmt(c.growth.lower_endpoint));
                c.transition_pairs.emplace_back(t, s);
            }
        if (!ok) errors.push_back("config.transition.pairs: expected [[t, s], ...]");
    }

    Section& group = section(root, "group");
    group.count("samples", c.group_samples, std::size_t{1});

    if (const json* s = root.raw("seed")) {
        if (!s->is_number_unsigned())
            errors.push_back("config.seed: expected a nonnegative integer");
        else
            c.seed = s->get<std::uint64_t>();
    }

    // Cross-checks that need the system itself.
    if (errors.empty()) {
        try {
            const LinearSystem sys_built = c.make_system();
            const int n = sys_built.dim;
            for (const auto& [name, m] : {std::pair{"projector", &c.projector},
                                          {"projector_plus", &c.projector_plus},
                                          {"projector_minus", &c.projector_minus}}) {
                if (!*m) continue;
                if ((*m)->rows() != n)
                    errors.push_back(std::string("config.") + name + ": must be " + std::to_string(n) +
                                     "x" + std::to_string(n));
                else if (((**m) * (**m) - **m).norm() > 1e-10)
                    errors.push_back(std::string("config.") + name + ": matrix is not idempotent");
            }
        } catch (const std::exception& e) {
            errors.push_back(std::string("config.system: ") + e.what());
        }
    }

    root.unknown_keys(out.warnings);
    for (const auto& s : sections) s->unknown_keys(out.warnings);

    if (!errors.empty()) {
        std::string msg = source_name + ": invalid configuration";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return out;
}

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace hdicho
