#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "obscert/bernstein.hpp"
#include "obscert/certifier.hpp"
#include "obscert/levy_symbol.hpp"
#include "obscert/rates.hpp"
#include "obscert/simgroup.hpp"
#include "obscert/verify.hpp"

namespace obscert {

inline constexpr int kScenarioSchema = 1;

// Source position of a declaration, 1-based; 0 when unknown (e.g. set through an override).
struct Mark {
    int line = 0;
    int column = 0;
};

struct RateDecl {
    std::string kind;  // polynomial, exponential, log-power, log-log-power, affine, identity, compose, scale, symbol, subordinate
    double c = 1.0, gamma = 1.0, s = 1.0, a = 0.0, b = 1.0, kappa = 1.0;
    std::string outer, inner, of, symbol, phi;
    Mark mark;
};

struct HalfLineMeasureDecl {
    std::string kind = "zero";  // zero, stable, atoms
    double coefficient = 1.0, s = 0.5;
    std::vector<std::pair<double, double>> atoms;
};

struct BernsteinDecl {
    std::string kind;  // power, affine, triplet
    double s = 1.0, a = 0.0, b = 0.0;
    HalfLineMeasureDecl measure;
    Mark mark;
};

struct SymbolDecl {
    std::string kind;  // indicator, power-law, fractional-stable, gaussian
    int n = 1;
    double eps = 1.0, alpha = 0.5, c = 0.0;
    std::vector<std::vector<double>> Q;
    Mark mark;
};

struct SetDecl {
    ThickSetSpec spec;
    Mark mark;
};

struct ModelDecl {
    std::string type;  // diagonal, grid
    int N = 64;
    double L = 3.14159265358979323846;
    int G = 0;         // 0 means the type default
    std::string g;     // diagonal: rate on √λ_k
    std::vector<double> mu;
    std::string phi;   // diagonal: optional subordination
    std::string symbol;
    double box = 6.283185307179586;
    double p = 2.0;
    std::string set;
    Mark mark;
};

struct ConstantsDecl {
    std::optional<double> M, omega, C1, C2, normC, T, r, m;
};

struct TaskDecl {
    std::string type;  // certify, certify-polynomial, subordinate, symbol-rate, fit, verify, report
    std::string name;
    std::string f, g, h, model, phi, set, symbol, certificate, fit;
    ConstantsDecl constants;
    PolynomialRates poly;
    std::vector<double> lambdas, times;
    int samples = 200;
    int time_panels = 256;
    int trace_terms = 40;
    std::vector<std::string> checks;
    std::vector<std::string> include;
    AscentOptions ascent;
    Mark mark;
};

struct OutputDecl {
    std::string directory = "obscert-out";
    std::vector<std::string> formats = {"json", "csv"};
};

struct Scenario {
    int schema = kScenarioSchema;
    std::uint64_t seed = 0;
    std::string path;
    std::map<std::string, RateDecl> rates;
    ConstantsDecl constants;
    std::map<std::string, BernsteinDecl> bernstein;
    std::map<std::string, SymbolDecl> symbols;
    std::map<std::string, SetDecl> sets;
    std::map<std::string, ModelDecl> models;
    std::vector<TaskDecl> tasks;
    OutputDecl output;
};

// Parses YAML text (JSON is accepted as a subset), applies "dotted.path=value" overrides,
// then checks the schema. Throws ParseError with the offending key path and position.
Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {},
                        const std::string& source = "<scenario>");
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

struct Diagnostic {
    std::string kind;     // ParseError, ResolutionError
    std::string message;
    std::string path;
    int line = 0;
    int column = 0;
};

// Reference checks only; no computation and no filesystem writes.
std::vector<Diagnostic> resolve_references(const Scenario& s);

// Builders for the declarations; references are looked up in the scenario.
RateFunction build_rate(const Scenario& s, const std::string& name);
BernsteinFunction build_bernstein(const Scenario& s, const std::string& name);
SymbolModel build_symbol(const Scenario& s, const std::string& name);
ProblemData merge_constants(const ConstantsDecl& base, const ConstantsDecl& task);

}  // namespace obscert
