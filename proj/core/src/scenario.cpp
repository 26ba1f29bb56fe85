#include "obscert/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace obscert {

namespace {

Mark mark_of(const YAML::Node& n) {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) return {};
    return {m.line + 1, m.column + 1};
}

bool parse_plain_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

// Numbers, inf, and the forms  pi, a*pi, pi/b, a*pi/b.
bool parse_number(std::string s, double& out) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    if (s == "inf" || s == ".inf" || s == "infinity" || s == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (parse_plain_number(s, out)) return true;
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return false;
    double a = 1.0, b = 1.0;
    const std::string head = s.substr(0, pos);
    const std::string tail = s.substr(pos + 2);
    if (!head.empty()) {
        if (head.back() != '*' || !parse_plain_number(head.substr(0, head.size() - 1), a)) return false;
    }
    if (!tail.empty()) {
        if (tail.front() != '/' || !parse_plain_number(tail.substr(1), b) || b == 0.0) return false;
    }
    out = a * std::numbers::pi / b;
    return true;
}

class Reader {
public:
    Reader(YAML::Node node, std::string path, const std::string& source)
        : node_(std::move(node)), path_(std::move(path)), source_(source) {}

    [[noreturn]] void fail(const std::string& msg, const YAML::Node& at, const std::string& path) const {
        const Mark m = mark_of(at);
        std::string where = path.empty() ? "<root>" : path;
        throw ParseError(source_ + ":" + std::to_string(m.line) + ":" + std::to_string(m.column) + ": " + where + ": " +
                             msg,
                         where, m.line, m.column);
    }

    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void expect_map() const {
        if (!node_.IsMap()) fail("expected a mapping", node_, path_);
    }

    void allow(const std::set<std::string>& keys) const {
        expect_map();
        for (const auto& kv : node_) {
            const auto k = kv.first.as<std::string>();
            if (!keys.count(k)) fail("unknown key '" + k + "'", kv.first, child_path(k));
        }
    }

    bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull(); }

    Reader child(const std::string& key) const { return Reader(node_[key], child_path(key), source_); }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        for (const auto& kv : node_) out.push_back(kv.first.as<std::string>());
        return out;
    }

    double to_double(const YAML::Node& n, const std::string& path) const {
        if (!n.IsScalar()) fail("expected a number", n, path);
        if (n.Tag() == "!") fail("expected a number, got a string", n, path);
        double v;
        if (!parse_number(n.Scalar(), v)) fail("expected a number, got '" + n.Scalar() + "'", n, path);
        return v;
    }

    double num(const std::string& key, double def) const { return has(key) ? to_double(node_[key], child_path(key)) : def; }

    std::optional<double> opt_num(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return to_double(node_[key], child_path(key));
    }

    double req_num(const std::string& key) const {
        if (!has(key)) fail("missing required key '" + key + "'", node_, path_);
        return num(key, 0.0);
    }

    long long integer(const std::string& key, long long def) const {
        if (!has(key)) return def;
        const double v = to_double(node_[key], child_path(key));
        if (!(std::isfinite(v) && v == std::floor(v))) fail("expected an integer", node_[key], child_path(key));
        return static_cast<long long>(v);
    }

    std::string str(const std::string& key, const std::string& def = "") const {
        if (!has(key)) return def;
        const YAML::Node n = node_[key];
        if (!n.IsScalar()) fail("expected a string", n, child_path(key));
        return n.Scalar();
    }

    std::string req_str(const std::string& key) const {
        if (!has(key)) fail("missing required key '" + key + "'", node_, path_);
        return str(key);
    }

    std::vector<double> num_list(const std::string& key) const {
        std::vector<double> out;
        if (!has(key)) return out;
        const YAML::Node n = node_[key];
        if (!n.IsSequence()) fail("expected a list of numbers", n, child_path(key));
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(to_double(n[i], child_path(key) + "." + std::to_string(i)));
        return out;
    }

    std::vector<std::string> str_list(const std::string& key) const {
        std::vector<std::string> out;
        if (!has(key)) return out;
        const YAML::Node n = node_[key];
        if (!n.IsSequence()) fail("expected a list of strings", n, child_path(key));
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (!n[i].IsScalar()) fail("expected a string", n[i], child_path(key) + "." + std::to_string(i));
            out.push_back(n[i].Scalar());
        }
        return out;
    }

    std::vector<std::vector<double>> matrix(const std::string& key) const {
        std::vector<std::vector<double>> out;
        if (!has(key)) return out;
        const YAML::Node n = node_[key];
        if (!n.IsSequence()) fail("expected a list of rows", n, child_path(key));
        for (std::size_t i = 0; i < n.size(); ++i) {
            const std::string p = child_path(key) + "." + std::to_string(i);
            if (!n[i].IsSequence()) fail("expected a row of numbers", n[i], p);
            std::vector<double> r;
            for (std::size_t j = 0; j < n[i].size(); ++j) r.push_back(to_double(n[i][j], p + "." + std::to_string(j)));
            out.push_back(r);
        }
        return out;
    }

    const YAML::Node& node() const { return node_; }
    const std::string& path() const { return path_; }

private:
    YAML::Node node_;
    std::string path_;
    const std::string& source_;
};

const std::set<std::string> kConstantKeys = {"M", "omega", "C1", "C2", "normC", "T", "r", "m"};

ConstantsDecl read_constants(const Reader& r) {
    ConstantsDecl c;
    c.M = r.opt_num("M");
    c.omega = r.opt_num("omega");
    c.C1 = r.opt_num("C1");
    c.C2 = r.opt_num("C2");
    c.normC = r.opt_num("normC");
    c.T = r.opt_num("T");
    c.r = r.opt_num("r");
    c.m = r.opt_num("m");
    return c;
}

std::set<std::string> with(std::set<std::string> a, const std::set<std::string>& b) {
    a.insert(b.begin(), b.end());
    return a;
}

RateDecl read_rate(const Reader& r) {
    RateDecl d;
    d.mark = mark_of(r.node());
    d.kind = r.req_str("kind");
    if (d.kind == "polynomial") {
        r.allow({"kind", "c", "gamma"});
        d.c = r.num("c", 1.0);
        d.gamma = r.req_num("gamma");
    } else if (d.kind == "exponential") {
        r.allow({"kind", "c"});
        d.c = r.num("c", 1.0);
    } else if (d.kind == "log-power" || d.kind == "log-log-power") {
        r.allow({"kind", "s"});
        d.s = r.req_num("s");
    } else if (d.kind == "affine") {
        r.allow({"kind", "a", "b"});
        d.a = r.num("a", 0.0);
        d.b = r.num("b", 1.0);
    } else if (d.kind == "identity") {
        r.allow({"kind"});
    } else if (d.kind == "compose") {
        r.allow({"kind", "outer", "inner"});
        d.outer = r.req_str("outer");
        d.inner = r.req_str("inner");
    } else if (d.kind == "scale") {
        r.allow({"kind", "of", "kappa"});
        d.of = r.req_str("of");
        d.kappa = r.req_num("kappa");
    } else if (d.kind == "symbol") {
        r.allow({"kind", "symbol"});
        d.symbol = r.req_str("symbol");
    } else if (d.kind == "subordinate") {
        r.allow({"kind", "phi", "of"});
        d.phi = r.req_str("phi");
        d.of = r.req_str("of");
    } else {
        r.fail("unknown rate kind '" + d.kind + "'", r.node()["kind"], r.child_path("kind"));
    }
    return d;
}

BernsteinDecl read_bernstein(const Reader& r) {
    BernsteinDecl d;
    d.mark = mark_of(r.node());
    d.kind = r.req_str("kind");
    if (d.kind == "power") {
        r.allow({"kind", "s"});
        d.s = r.req_num("s");
    } else if (d.kind == "affine") {
        r.allow({"kind", "a", "b"});
        d.a = r.num("a", 0.0);
        d.b = r.num("b", 1.0);
    } else if (d.kind == "triplet") {
        r.allow({"kind", "a", "b", "measure"});
        d.a = r.num("a", 0.0);
        d.b = r.num("b", 0.0);
        if (r.has("measure")) {
            const Reader m = r.child("measure");
            d.measure.kind = m.req_str("kind");
            if (d.measure.kind == "zero") {
                m.allow({"kind"});
            } else if (d.measure.kind == "stable") {
                m.allow({"kind", "coefficient", "s"});
                d.measure.coefficient = m.num("coefficient", 1.0);
                d.measure.s = m.req_num("s");
            } else if (d.measure.kind == "atoms") {
                m.allow({"kind", "atoms"});
                for (const auto& row : m.matrix("atoms")) {
                    if (row.size() != 2) m.fail("each atom is [t, w]", m.node()["atoms"], m.child_path("atoms"));
                    d.measure.atoms.emplace_back(row[0], row[1]);
                }
            } else {
                m.fail("unknown measure kind '" + d.measure.kind + "'", m.node()["kind"], m.child_path("kind"));
            }
        }
    } else {
        r.fail("unknown bernstein kind '" + d.kind + "'", r.node()["kind"], r.child_path("kind"));
    }
    return d;
}

SymbolDecl read_symbol(const Reader& r) {
    SymbolDecl d;
    d.mark = mark_of(r.node());
    d.kind = r.req_str("kind");
    if (d.kind == "indicator") {
        r.allow({"kind", "n", "c"});
    } else if (d.kind == "power-law") {
        r.allow({"kind", "n", "eps", "c"});
        d.eps = r.req_num("eps");
    } else if (d.kind == "fractional-stable") {
        r.allow({"kind", "n", "alpha", "c"});
        d.alpha = r.req_num("alpha");
    } else if (d.kind == "gaussian") {
        r.allow({"kind", "Q", "c"});
        d.Q = r.matrix("Q");
        if (d.Q.empty()) r.fail("missing required key 'Q'", r.node(), r.path());
    } else {
        r.fail("unknown symbol kind '" + d.kind + "'", r.node()["kind"], r.child_path("kind"));
    }
    d.n = static_cast<int>(r.integer("n", d.kind == "gaussian" ? static_cast<long long>(d.Q.size()) : 1));
    d.c = r.num("c", 0.0);
    return d;
}

SetDecl read_set(const Reader& r) {
    SetDecl d;
    d.mark = mark_of(r.node());
    const std::string pattern = r.req_str("pattern");
    auto& sp = d.spec;
    if (pattern == "full") {
        r.allow({"pattern", "rho", "L"});
        sp.pattern = ThickSetSpec::Pattern::Full;
    } else if (pattern == "periodic-slabs") {
        r.allow({"pattern", "rho", "L", "period", "width"});
        sp.pattern = ThickSetSpec::Pattern::PeriodicSlabs;
        sp.period = r.req_num("period");
        sp.width = r.req_num("width");
    } else if (pattern == "checkerboard") {
        r.allow({"pattern", "rho", "L", "period"});
        sp.pattern = ThickSetSpec::Pattern::Checkerboard;
        sp.period = r.req_num("period");
    } else {
        r.fail("unknown set pattern '" + pattern + "'", r.node()["pattern"], r.child_path("pattern"));
    }
    sp.rho = r.num("rho", 1.0);
    sp.L = r.num_list("L");
    return d;
}

ModelDecl read_model(const Reader& r) {
    ModelDecl d;
    d.mark = mark_of(r.node());
    d.type = r.req_str("type");
    if (d.type == "diagonal") {
        r.allow({"type", "N", "L", "G", "g", "mu", "phi", "set"});
        d.N = static_cast<int>(r.integer("N", 64));
        d.L = r.num("L", std::numbers::pi);
        d.G = static_cast<int>(r.integer("G", 2048));
        d.g = r.str("g");
        d.mu = r.num_list("mu");
        d.phi = r.str("phi");
        if (d.g.empty() == d.mu.empty()) r.fail("diagonal model needs exactly one of 'g' or 'mu'", r.node(), r.path());
    } else if (d.type == "grid") {
        r.allow({"type", "symbol", "box", "G", "p", "set"});
        d.symbol = r.req_str("symbol");
        d.box = r.num("box", 2.0 * std::numbers::pi);
        d.G = static_cast<int>(r.integer("G", 32));
        d.p = r.num("p", 2.0);
    } else {
        r.fail("unknown model type '" + d.type + "'", r.node()["type"], r.child_path("type"));
    }
    d.set = r.str("set");
    return d;
}

TaskDecl read_task(const Reader& r) {
    TaskDecl t;
    t.mark = mark_of(r.node());
    r.expect_map();
    t.type = r.req_str("type");
    t.name = r.req_str("name");
    const std::set<std::string> base = {"type", "name"};
    const auto need_one = [&](const char* a, const char* b) {
        if (!r.has(a) && !r.has(b)) {
            r.fail(std::string("task needs '") + a + "' or '" + b + "'", r.node(), r.path());
        }
    };
    if (t.type == "certify") {
        r.allow(with(with(base, kConstantKeys), {"f", "g", "h", "model", "fit", "trace_terms"}));
        need_one("f", "fit");
        need_one("g", "model");
    } else if (t.type == "certify-polynomial") {
        r.allow(with(with(base, kConstantKeys), {"c1", "c2", "gamma1", "gamma2", "gamma3", "trace_terms"}));
        t.poly.c1 = r.num("c1", 1.0);
        t.poly.c2 = r.num("c2", 1.0);
        t.poly.gamma1 = r.num("gamma1", 1.0);
        t.poly.gamma2 = r.num("gamma2", 2.0);
        t.poly.gamma3 = r.num("gamma3", 1.0);
    } else if (t.type == "subordinate") {
        r.allow(with(with(base, kConstantKeys), {"phi", "f", "g", "h", "model", "fit"}));
        t.phi = r.req_str("phi");
        need_one("f", "fit");
        need_one("g", "model");
    } else if (t.type == "symbol-rate") {
        r.allow(with(base, {"symbol", "lambdas"}));
        t.symbol = r.req_str("symbol");
    } else if (t.type == "fit") {
        r.allow(with(base, {"model", "set", "lambdas", "samples"}));
        t.model = r.req_str("model");
    } else if (t.type == "verify") {
        r.allow(with(base, {"model", "set", "certificate", "fit", "checks", "lambdas", "times", "samples", "time_panels",
                            "restarts", "steps", "directions", "ascent_panels", "T", "r", "C1", "C2", "omega"}));
        t.model = r.req_str("model");
    } else if (t.type == "report") {
        r.allow(with(base, {"include"}));
    } else {
        r.fail("unknown task type '" + t.type + "'", r.node()["type"], r.child_path("type"));
    }
    t.f = r.str("f");
    t.g = r.str("g");
    t.h = r.str("h");
    if (t.model.empty()) t.model = r.str("model");
    if (t.phi.empty()) t.phi = r.str("phi");
    t.set = r.str("set");
    t.certificate = r.str("certificate");
    t.fit = r.str("fit");
    t.constants = read_constants(r);
    t.lambdas = r.num_list("lambdas");
    t.times = r.num_list("times");
    t.samples = static_cast<int>(r.integer("samples", t.type == "verify" ? 100 : 200));
    t.time_panels = static_cast<int>(r.integer("time_panels", 256));
    t.trace_terms = static_cast<int>(r.integer("trace_terms", 40));
    t.checks = r.str_list("checks");
    t.include = r.str_list("include");
    t.ascent.restarts = static_cast<int>(r.integer("restarts", t.ascent.restarts));
    t.ascent.steps = static_cast<int>(r.integer("steps", t.ascent.steps));
    t.ascent.directions = static_cast<int>(r.integer("directions", t.ascent.directions));
    t.ascent.time_panels = static_cast<int>(r.integer("ascent_panels", t.ascent.time_panels));
    static const std::set<std::string> known_checks = {"dissipation", "uncertainty", "observability", "optimal",
                                                       "lower-bound"};
    for (std::size_t i = 0; i < t.checks.size(); ++i) {
        if (!known_checks.count(t.checks[i])) {
            r.fail("unknown check '" + t.checks[i] + "'", r.node()["checks"][i], r.child_path("checks") + "." + std::to_string(i));
        }
    }
    if (t.samples < 1) r.fail("samples must be >= 1", r.node()["samples"], r.child_path("samples"));
    if (t.time_panels < 1) r.fail("time_panels must be >= 1", r.node()["time_panels"], r.child_path("time_panels"));
    return t;
}

void apply_override(YAML::Node& root, const std::string& spec, const std::string& source) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ParseError(source + ": override '" + spec + "' is not KEY=VALUE", spec);
    }
    const std::string key = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string p; std::getline(ss, p, '.');) {
        if (p.empty()) throw ParseError(source + ": override key '" + key + "' has an empty segment", key);
        parts.push_back(p);
    }
    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next;
        if (cur.IsSequence()) {
            std::size_t idx = 0;
            const auto r = std::from_chars(parts[i].data(), parts[i].data() + parts[i].size(), idx);
            if (r.ec != std::errc() || idx >= cur.size()) {
                throw ParseError(source + ": override key '" + key + "': no element " + parts[i], key);
            }
            next = cur[idx];
        } else {
            if (!cur[parts[i]].IsDefined() || cur[parts[i]].IsNull()) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
            next = cur[parts[i]];
        }
        cur.reset(next);
    }
    YAML::Node parsed;
    try {
        parsed = YAML::Load(value);
    } catch (const YAML::Exception& e) {
        throw ParseError(source + ": override '" + spec + "': " + e.msg, key);
    }
    if (cur.IsSequence()) {
        std::size_t idx = 0;
        const auto r = std::from_chars(parts.back().data(), parts.back().data() + parts.back().size(), idx);
        if (r.ec != std::errc() || idx >= cur.size()) {
            throw ParseError(source + ": override key '" + key + "': no element " + parts.back(), key);
        }
        cur[idx] = parsed;
    } else {
        cur[parts.back()] = parsed;
    }
}

template <class Decl, class Fn>
void read_section(const Reader& root, const std::string& key, std::map<std::string, Decl>& out, Fn read) {
    if (!root.has(key)) return;
    const Reader sec = root.child(key);
    sec.expect_map();
    for (const auto& name : sec.keys()) out.emplace(name, read(sec.child(name)));
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                             ": syntax error: " + e.msg,
                         "<root>", e.mark.line + 1, e.mark.column + 1);
    }
    if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) apply_override(root, o, source);

    Scenario s;
    s.path = source;
    const Reader r(root, "", source);
    r.allow({"schema", "seed", "rates", "constants", "bernstein", "symbols", "sets", "models", "tasks", "output"});
    if (!r.has("schema")) r.fail("missing required key 'schema'", root, "");
    s.schema = static_cast<int>(r.integer("schema", 0));
    if (s.schema != kScenarioSchema) {
        r.fail("unsupported schema " + std::to_string(s.schema) + " (expected " + std::to_string(kScenarioSchema) + ")",
               root["schema"], "schema");
    }
    const long long seed = r.integer("seed", 0);
    if (seed < 0) r.fail("seed must be non-negative", root["seed"], "seed");
    s.seed = static_cast<std::uint64_t>(seed);

    read_section(r, "rates", s.rates, read_rate);
    read_section(r, "bernstein", s.bernstein, read_bernstein);
    read_section(r, "symbols", s.symbols, read_symbol);
    read_section(r, "sets", s.sets, read_set);
    read_section(r, "models", s.models, read_model);
    if (r.has("constants")) {
        const Reader c = r.child("constants");
        c.allow(kConstantKeys);
        s.constants = read_constants(c);
    }
    if (r.has("tasks")) {
        const YAML::Node tasks = root["tasks"];
        if (!tasks.IsSequence()) r.fail("expected a list of tasks", tasks, "tasks");
        std::set<std::string> names;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const Reader tr(tasks[i], "tasks." + std::to_string(i), source);
            TaskDecl t = read_task(tr);
            if (!names.insert(t.name).second) tr.fail("duplicate task name '" + t.name + "'", tasks[i]["name"], tr.child_path("name"));
            s.tasks.push_back(std::move(t));
        }
    }
    if (r.has("output")) {
        const Reader o = r.child("output");
        o.allow({"directory", "formats"});
        s.output.directory = o.str("directory", s.output.directory);
        if (o.has("formats")) s.output.formats = o.str_list("formats");
        for (std::size_t i = 0; i < s.output.formats.size(); ++i) {
            const auto& f = s.output.formats[i];
            if (f != "json" && f != "csv") {
                o.fail("unknown format '" + f + "'", root["output"]["formats"][i], "output.formats." + std::to_string(i));
            }
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot read scenario file " + path, path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str(), overrides, path);
}

std::vector<Diagnostic> resolve_references(const Scenario& s) {
    std::vector<Diagnostic> out;
    auto report = [&](const std::string& path, const Mark& m, const std::string& msg) {
        out.push_back({"ResolutionError", msg, path, m.line, m.column});
    };
    auto need = [&](const auto& table, const std::string& ref, const char* what, const std::string& path, const Mark& m) {
        if (!ref.empty() && !table.count(ref)) report(path, m, std::string("unknown ") + what + " '" + ref + "'");
    };
    for (const auto& [name, d] : s.rates) {
        const std::string p = "rates." + name;
        need(s.rates, d.outer, "rate", p + ".outer", d.mark);
        need(s.rates, d.inner, "rate", p + ".inner", d.mark);
        need(s.rates, d.of, "rate", p + ".of", d.mark);
        need(s.symbols, d.symbol, "symbol", p + ".symbol", d.mark);
        need(s.bernstein, d.phi, "bernstein function", p + ".phi", d.mark);
    }
    // Cycles among composite rates.
    std::map<std::string, int> state;
    std::function<bool(const std::string&)> cyclic = [&](const std::string& n) {
        auto it = s.rates.find(n);
        if (it == s.rates.end()) return false;
        if (state[n] == 1) return true;
        if (state[n] == 2) return false;
        state[n] = 1;
        for (const auto* ref : {&it->second.outer, &it->second.inner, &it->second.of}) {
            if (!ref->empty() && cyclic(*ref)) return true;
        }
        state[n] = 2;
        return false;
    };
    for (const auto& [name, d] : s.rates) {
        if (state[name] == 0 && cyclic(name)) report("rates." + name, d.mark, "rate '" + name + "' refers to itself");
    }
    for (const auto& [name, d] : s.models) {
        const std::string p = "models." + name;
        need(s.rates, d.g, "rate", p + ".g", d.mark);
        need(s.bernstein, d.phi, "bernstein function", p + ".phi", d.mark);
        need(s.symbols, d.symbol, "symbol", p + ".symbol", d.mark);
        need(s.sets, d.set, "set", p + ".set", d.mark);
    }
    std::map<std::string, std::string> earlier;  // task name -> type
    for (std::size_t i = 0; i < s.tasks.size(); ++i) {
        const TaskDecl& t = s.tasks[i];
        const std::string p = "tasks." + std::to_string(i);
        need(s.rates, t.f, "rate", p + ".f", t.mark);
        need(s.rates, t.g, "rate", p + ".g", t.mark);
        need(s.rates, t.h, "rate", p + ".h", t.mark);
        need(s.models, t.model, "model", p + ".model", t.mark);
        need(s.bernstein, t.phi, "bernstein function", p + ".phi", t.mark);
        need(s.sets, t.set, "set", p + ".set", t.mark);
        need(s.symbols, t.symbol, "symbol", p + ".symbol", t.mark);
        if (!t.fit.empty()) {
            auto it = earlier.find(t.fit);
            if (it == earlier.end() || it->second != "fit") {
                report(p + ".fit", t.mark, "unknown fit task '" + t.fit + "' (must be an earlier task of type fit)");
            }
        }
        if (!t.certificate.empty()) {
            auto it = earlier.find(t.certificate);
            if (it == earlier.end() ||
                (it->second != "certify" && it->second != "subordinate" && it->second != "certify-polynomial")) {
                report(p + ".certificate", t.mark,
                       "unknown certificate task '" + t.certificate + "' (must be an earlier certify task)");
            }
        }
        for (const auto& inc : t.include) {
            if (!earlier.count(inc)) report(p + ".include", t.mark, "unknown task '" + inc + "' in include");
        }
        if ((t.type == "fit" || t.type == "verify") && !t.model.empty() && t.set.empty()) {
            auto it = s.models.find(t.model);
            if (it != s.models.end() && it->second.set.empty()) {
                report(p + ".set", t.mark, "model '" + t.model + "' has no thick set and the task names none");
            }
        }
        earlier.emplace(t.name, t.type);
    }
    return out;
}

RateFunction build_rate(const Scenario& s, const std::string& name) {
    static thread_local int depth = 0;
    auto it = s.rates.find(name);
    if (it == s.rates.end()) throw ResolutionError("unknown rate '" + name + "'");
    if (depth > 64) throw ResolutionError("rate '" + name + "' refers to itself");
    struct Guard {
        Guard() { ++depth; }
        ~Guard() { --depth; }
    } guard;
    const RateDecl& d = it->second;
    if (d.kind == "polynomial") return RateFunction::polynomial(d.c, d.gamma);
    if (d.kind == "exponential") return RateFunction::exponential(d.c);
    if (d.kind == "log-power") return RateFunction::log_power(d.s);
    if (d.kind == "log-log-power") return RateFunction::log_log_power(d.s);
    if (d.kind == "affine") return RateFunction::affine(d.b, d.a);
    if (d.kind == "identity") return RateFunction::identity();
    if (d.kind == "compose") return compose(build_rate(s, d.outer), build_rate(s, d.inner));
    if (d.kind == "scale") return scale(build_rate(s, d.of), d.kappa);
    if (d.kind == "symbol") return symbol_rate(build_symbol(s, d.symbol));
    if (d.kind == "subordinate") return subordinate_rate(build_bernstein(s, d.phi), build_rate(s, d.of));
    throw ResolutionError("unknown rate kind '" + d.kind + "'");
}

BernsteinFunction build_bernstein(const Scenario& s, const std::string& name) {
    auto it = s.bernstein.find(name);
    if (it == s.bernstein.end()) throw ResolutionError("unknown bernstein function '" + name + "'");
    const BernsteinDecl& d = it->second;
    if (d.kind == "power") return BernsteinFunction::power(d.s);
    if (d.kind == "affine") return BernsteinFunction::affine(d.b, d.a);
    LevyTriplet t;
    t.a = d.a;
    t.b = d.b;
    if (d.measure.kind == "stable") t.mu = HalfLineMeasure::stable_power(d.measure.coefficient, d.measure.s);
    if (d.measure.kind == "atoms") t.mu = HalfLineMeasure::from_atoms(d.measure.atoms);
    return BernsteinFunction::from_triplet(std::move(t));
}

SymbolModel build_symbol(const Scenario& s, const std::string& name) {
    auto it = s.symbols.find(name);
    if (it == s.symbols.end()) throw ResolutionError("unknown symbol '" + name + "'");
    const SymbolDecl& d = it->second;
    SymbolModel m;
    if (d.kind == "indicator") {
        m = SymbolModel::indicator(d.n);
    } else if (d.kind == "power-law") {
        m = SymbolModel::power_law(d.n, d.eps);
    } else if (d.kind == "fractional-stable") {
        m = SymbolModel::fractional_stable(d.n, d.alpha);
    } else {
        const std::size_t n = d.Q.size();
        Eigen::MatrixXd Q(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (d.Q[i].size() != n) throw HypothesisViolation("symbol '" + name + "': Q must be square");
            for (std::size_t j = 0; j < n; ++j) Q(i, j) = d.Q[i][j];
        }
        m = SymbolModel::gaussian(Q);
    }
    m.c = d.c;
    m.validate();
    return m;
}

ProblemData merge_constants(const ConstantsDecl& base, const ConstantsDecl& task) {
    ProblemData p;
    auto pick = [](const std::optional<double>& t, const std::optional<double>& b, double def) {
        return t ? *t : (b ? *b : def);
    };
    p.M = pick(task.M, base.M, p.M);
    p.omega = pick(task.omega, base.omega, p.omega);
    p.C1 = pick(task.C1, base.C1, p.C1);
    p.C2 = pick(task.C2, base.C2, p.C2);
    p.normC = pick(task.normC, base.normC, p.normC);
    p.T = pick(task.T, base.T, p.T);
    p.r = pick(task.r, base.r, p.r);
    p.m = pick(task.m, base.m, p.m);
    return p;
}

}  // namespace obscert
