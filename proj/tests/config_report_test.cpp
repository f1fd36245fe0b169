#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hdicho/report.hpp"

using namespace hdicho;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("cli_reports") {

TEST_CASE("minimal config") {
    const auto loaded = parse_config(R"({"system": {"builtin": "h_diagonal"}})");
    CHECK(loaded.warnings.empty());
    const auto& c = loaded.config;
    CHECK(c.growth_name == "exp");
    CHECK(c.h_lo == 1e-2);
    CHECK(c.h_hi == 1e2);
    CHECK(c.builtin == BuiltinSystem::h_diagonal);
    CHECK(c.make_evaluator().dim() == 2);
}

TEST_CASE("growth rate spellings") {
    CHECK(parse_config(R"({"growth_rate": "power:3", "system": {"constant": [[0]]}})").config.growth_name == "power:3");
    CHECK(parse_config(R"({"growth_rate": {"name": "power", "p": 2}, "system": {"constant": [[0]]}})")
              .config.growth_name == "power:2");
    CHECK(error_of(R"({"growth_rate": "cosh", "system": {"constant": [[0]]}})") != "");
}

TEST_CASE("validation messages") {
    CHECK(error_of(R"({"system": {"constant": [[0]]}, "floquet": {"T": 0}})").find("T must exceed identity element") !=
          std::string::npos);
    const auto t = error_of(R"({"growth_rate": "identity", "system": {"constant": [[0]]}, "interval": {"t": [-1, 2]}})");
    CHECK(t.find("a0") != std::string::npos);
    CHECK(error_of(R"({"system": {"constant": [[0]]}, "interval": {"h": [2, 3]}})").find("e*") != std::string::npos);
    CHECK(error_of("{not json").find("parse") != std::string::npos);
}

TEST_CASE("errors are collected") {
    const auto e = error_of(R"({"system": {"constant": [[0]]}, "dichotomy": {"K": 0.5, "alpha": -1}, "grid": {"points_per_decade": 0}})");
    CHECK(e.find("dichotomy.K") != std::string::npos);
    CHECK(e.find("dichotomy.alpha") != std::string::npos);
    CHECK(e.find("points_per_decade") != std::string::npos);
}

TEST_CASE("projector shape must match the system") {
    CHECK(error_of(R"({"system": {"builtin": "h_diagonal"}, "projector": [[1]]})") != "");
}

TEST_CASE("half-line endpoints") {
    const auto ok = parse_config(
        R"({"growth_rate": "identity", "system": {"builtin": "counterexample"}, "dichotomy": {"left_end": 0.5, "right_start": 1.5}})");
    CHECK(*ok.config.left_end == 0.5);
    CHECK(error_of(
              R"({"growth_rate": "identity", "system": {"builtin": "counterexample"}, "dichotomy": {"left_end": 2, "right_start": 1}})") !=
          "");
}

TEST_CASE("unknown keys warn") {
    const auto loaded = parse_config(R"({"system": {"constant": [[0]], "colour": 1}, "extra": true})");
    REQUIRE(loaded.warnings.size() == 2);
}

TEST_CASE("commands round trip") {
    for (const auto& name : command_names()) CHECK(to_string(parse_command(name)) == name);
    CHECK_THROWS(parse_command("bogus"));
}

TEST_CASE("run exit codes and report shape") {
    const auto zero = parse_config(R"({"system": {"constant": [[0]]}, "interval": {"h": [0.1, 10]}, "floquet": {"T": 1}})").config;
    const auto r = run(zero, Command::floquet);
    CHECK(r.exit_code == kViolated);
    CHECK(r.verdict == "no_dichotomy");

    const auto stable = parse_config(R"({"system": {"constant": [[-1]]}, "interval": {"h": [0.1, 10]},
        "grid": {"points_per_decade": 20}, "projector": [[1]], "dichotomy": {"K": 1, "alpha": 1}})")
                            .config;
    const auto v = run(stable, Command::dichotomy_verify);
    CHECK(v.exit_code == kPositive);
    REQUIRE(v.tables.size() == 1);
    const auto report = make_report(stable, v, 0.25);
    CHECK(report["schema_version"] == kSchemaVersion);
    CHECK(report["timestamp"]["wall_seconds"] == 0.25);
    CHECK(report["summary"]["exit_code"] == 0);
    CHECK(report.contains("results"));
    // Exactly one time-dependent field.
    int stamps = 0;
    for (const auto& item : report.items()) stamps += item.key().find("time") != std::string::npos;
    CHECK(stamps == 1);

    const auto& table = v.tables.front();
    CHECK(table.header[0] == "t");
    CHECK(table.header[1] == "h(t)");
    const auto rendered = table.render();
    CHECK(std::count(rendered.begin(), rendered.end(), '\n') == static_cast<long>(table.rows.size() + 1));

    const auto bad = run(parse_config(R"({"system": {"constant": [[-1]]}})").config, Command::dichotomy_verify);
    CHECK(bad.exit_code == kConfigError);
    CHECK_FALSE(bad.error.empty());
}

TEST_CASE("group selftest passes") {
    const auto c = parse_config(R"({"growth_rate": "expm1", "system": {"constant": [[0]]}, "group": {"samples": 200}, "seed": 3})").config;
    CHECK(run(c, Command::group_selftest).exit_code == kPositive);
}

TEST_CASE("atomic writes replace the target") {
    const auto dir = std::filesystem::temp_directory_path() / "hdicho_atomic_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto path = (dir / "out.json").string();
    write_atomic(path, "first");
    write_atomic(path, "second");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "second");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    write_atomic((dir / "nested" / "x.json").string(), "x");
    CHECK(std::filesystem::exists(dir / "nested" / "x.json"));
    std::filesystem::remove_all(dir);
}

}
