#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "obscert/report.hpp"
#include "obscert/runner.hpp"
#include "obscert/scenario.hpp"

using namespace obscert;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(OBSCERT_TEST_DATA_DIR) + "/" + name; }
std::string example(const std::string& name) { return std::string(OBSCERT_SCENARIO_DIR) + "/" + name; }

fs::path scratch(const std::string& tag) {
    const auto p = fs::temp_directory_path() / ("obscert-test-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunOptions quiet(const fs::path& out) {
    RunOptions o;
    o.out_dir = out.string();
    o.timestamp = false;
    return o;
}

}  // namespace

TEST(ParseScenario, ExampleIsWellFormed) {
    const auto s = load_scenario(example("fractional_heat.yaml"));
    EXPECT_EQ(s.tasks.size(), 4u);
    EXPECT_TRUE(resolve_references(s).empty());
    EXPECT_TRUE(validate_scenario(example("fractional_heat.yaml")).empty());
}

TEST(ParseScenario, PiExpressions) {
    const auto s = parse_scenario(
        "schema: 1\nsets:\n  a: {pattern: periodic-slabs, rho: 0.25, period: 2*pi/3, width: pi/6, L: [pi]}\n");
    const auto& spec = s.sets.at("a").spec;
    EXPECT_DOUBLE_EQ(spec.period, 2 * std::numbers::pi / 3);
    EXPECT_DOUBLE_EQ(spec.width, std::numbers::pi / 6);
    EXPECT_DOUBLE_EQ(spec.L.at(0), std::numbers::pi);
}

TEST(ParseScenario, QuotedNumberRejectedWithPath) {
    try {
        load_scenario(data("bad_rho.yaml"));
        FAIL() << "accepted a string rho";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.path(), "sets.slabs.rho");
        EXPECT_EQ(e.line(), 5);
        EXPECT_GT(e.column(), 0);
    }
    const auto d = validate_scenario(data("bad_rho.yaml"));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kind, "ParseError");
    EXPECT_EQ(d[0].path, "sets.slabs.rho");
}

TEST(ParseScenario, UnknownKeysAndSchema) {
    EXPECT_THROW(parse_scenario("schema: 1\nbogus: 3\n"), ParseError);
    EXPECT_THROW(parse_scenario("schema: 2\n"), ParseError);
    EXPECT_THROW(parse_scenario("schema: 1\nrates:\n  g: {kind: polynomial, c: 1, gamma: 2, extra: 1}\n"), ParseError);
    EXPECT_THROW(parse_scenario("schema: 1\ntasks:\n  - {type: report, name: a}\n  - {type: report, name: a}\n"),
                 ParseError);
}

TEST(ParseScenario, JsonIsAccepted) {
    const auto s = parse_scenario(R"({"schema": 1, "constants": {"T": 0.5}, "tasks": []})");
    EXPECT_DOUBLE_EQ(*s.constants.T, 0.5);
}

TEST(ParseScenario, DottedOverrides) {
    const auto s = load_scenario(example("fractional_heat.yaml"), {"constants.T=0.5", "bernstein.frac.s=0.9"});
    EXPECT_DOUBLE_EQ(*s.constants.T, 0.5);
    EXPECT_DOUBLE_EQ(s.bernstein.at("frac").s, 0.9);
    EXPECT_THROW(load_scenario(example("fractional_heat.yaml"), {"constants.T"}), ParseError);
}

TEST(ResolveReferences, DanglingModel) {
    const auto d = validate_scenario(data("dangling.yaml"));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].kind, "ResolutionError");
    EXPECT_NE(d[0].message.find("missing"), std::string::npos);
    EXPECT_GT(d[0].line, 0);
}

TEST(Validate, LeavesFilesystemAlone) {
    const auto out = scratch("validate");
    ::setenv("OBSCERT_OUT_DIR", out.string().c_str(), 1);
    EXPECT_TRUE(validate_scenario(example("fractional_heat.yaml")).empty());
    validate_scenario(data("empty.yaml"));
    ::unsetenv("OBSCERT_OUT_DIR");
    EXPECT_FALSE(fs::exists(out));
    EXPECT_FALSE(fs::exists("should-not-exist"));
    EXPECT_FALSE(fs::exists("out/fractional-heat"));
}

TEST(Run, EmptyTaskListWritesNothing) {
    const auto out = scratch("empty");
    const auto res = run_scenario(data("empty.yaml"), quiet(out));
    EXPECT_EQ(res.exit_code, kExitOk);
    EXPECT_TRUE(res.artifacts.empty());
    EXPECT_FALSE(fs::exists(out));
}

TEST(Run, ResolutionErrorExitsOne) {
    const auto out = scratch("dangling");
    const auto res = run_scenario(data("dangling.yaml"), quiet(out));
    EXPECT_EQ(res.exit_code, kExitError);
    ASSERT_EQ(res.diagnostics.size(), 1u);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Run, FractionalHeatPasses) {
    const auto out = scratch("heat");
    const auto res = run_scenario(example("fractional_heat.yaml"), quiet(out));
    EXPECT_EQ(res.exit_code, kExitOk);
    for (const auto& t : res.tasks) EXPECT_EQ(t.status, "ok") << t.name << ": " << t.message;
    for (const char* f : {"certificate.certificate.json", "check.verification.json", "check.verification.csv",
                          "spectral.fit.json", "run.json", "summary.txt"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    const auto ver = nlohmann::json::parse(slurp(out / "check.verification.json"));
    EXPECT_TRUE(ver["report"]["all_pass"].get<bool>());
    const auto run = nlohmann::json::parse(slurp(out / "run.json"));
    EXPECT_FALSE(run.contains("generated_at"));
    fs::remove_all(out);
}

TEST(Run, HalfPowerIsNotAdmissible) {
    const auto out = scratch("half");
    auto opts = quiet(out);
    opts.overrides = {"bernstein.frac.s=0.5"};
    const auto res = run_scenario(example("fractional_heat.yaml"), opts);
    EXPECT_EQ(res.exit_code, kExitNotAdmissible);
    const auto adm = slurp(out / "certificate.admissibility.json");
    EXPECT_NE(adm.find("integrable"), std::string::npos);
    bool skipped = false;
    for (const auto& t : res.tasks) skipped |= t.status == "skipped";
    EXPECT_TRUE(skipped);
    fs::remove_all(out);
}

TEST(Run, DeterministicBytes) {
    const auto a = scratch("det-a"), b = scratch("det-b");
    auto oa = quiet(a), ob = quiet(b);
    oa.jobs = 1;
    ob.jobs = 4;
    const auto ra = run_scenario(example("fractional_heat.yaml"), oa);
    const auto rb = run_scenario(example("fractional_heat.yaml"), ob);
    ASSERT_EQ(ra.artifacts, rb.artifacts);
    for (const auto& f : ra.artifacts) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Run, OutputDirectoryPrecedence) {
    const auto env = scratch("env"), flag = scratch("flag");
    ::setenv("OBSCERT_OUT_DIR", env.string().c_str(), 1);
    RunOptions o;
    o.timestamp = false;
    auto res = run_scenario(data("polynomial.yaml"), o);
    EXPECT_EQ(res.exit_code, kExitOk);
    EXPECT_TRUE(fs::exists(env / "poly.certificate.json"));
    o.out_dir = flag.string();
    res = run_scenario(data("polynomial.yaml"), o);
    EXPECT_TRUE(fs::exists(flag / "poly.certificate.json"));
    ::unsetenv("OBSCERT_OUT_DIR");
    fs::remove_all(env);
    fs::remove_all(flag);
}

TEST(Run, SymbolRates) {
    const auto out = scratch("symbol");
    const auto res = run_scenario(data("symbol.yaml"), quiet(out));
    EXPECT_EQ(res.exit_code, kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out / "stable-rate.symbol-rate.json"));
    EXPECT_FALSE(doc.empty());
    fs::remove_all(out);
}

TEST(Run, SeedChangesSamplesOnly) {
    const auto a = scratch("seed-a"), b = scratch("seed-b");
    auto oa = quiet(a), ob = quiet(b);
    ob.seed = 99;
    run_scenario(example("fractional_heat.yaml"), oa);
    run_scenario(example("fractional_heat.yaml"), ob);
    EXPECT_NE(slurp(a / "check.verification.csv"), slurp(b / "check.verification.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Report, FormatDouble) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(INFINITY), "inf");
    EXPECT_EQ(format_double(-INFINITY), "-inf");
    EXPECT_EQ(format_double(NAN), "nan");
    for (double x : {1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Report, CertificateJsonUsesNullForOverflow) {
    ProblemData p;
    p.g = RateFunction::polynomial(1.0, 2.0);
    p.T = 0.01;
    const auto c = certify(p);
    const auto doc = nlohmann::json::parse(certificate_json(c));
    EXPECT_TRUE(doc["cobs_L1"].is_null());
    EXPECT_NEAR(doc["log_cobs_L1"].get<double>(), c.log_cobs_L1, 1e-9 * c.log_cobs_L1);
    EXPECT_TRUE(doc.contains("admissibility"));
}

TEST(Report, TraceCsvShape) {
    ProblemData p;
    p.g = RateFunction::polynomial(1.0, 2.0);
    const auto c = certify(p);
    const auto csv = trace_csv(iteration_trace(c, p, 10));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}

TEST(Report, StateRoundTrips) {
    const auto dir = scratch("state");
    fs::create_directories(dir);
    cvec x(5);
    x << std::complex<double>(1.0 / 3.0, -2.0), 0.0, std::complex<double>(1e-300, 7.0), 5.5, -0.0;
    write_state_csv((dir / "x.csv").string(), x);
    write_state_raw((dir / "x.bin").string(), x);
    EXPECT_EQ(read_state_csv((dir / "x.csv").string()), x);
    EXPECT_EQ(read_state_raw((dir / "x.bin").string()), x);
    EXPECT_EQ(fs::file_size(dir / "x.bin"), 5u * 16u);
    fs::remove_all(dir);
}
