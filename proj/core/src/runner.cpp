#include "obscert/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "obscert/parallel.hpp"
#include "obscert/report.hpp"

namespace obscert {

namespace {

namespace fs = std::filesystem;
using detail::json;
using detail::number;

struct CertEntry {
    Certificate cert;
    ProblemData problem;
    std::optional<BernsteinFunction> phi;  // set for subordinate tasks
    RateFunction verify_g = RateFunction::identity();
    std::string model;
};

// A task whose inputs come from a task that did not complete.
struct Skipped : Error {
    using Error::Error;
};

struct FitEntry {
    LsConstants ls;
    std::string model;
};

class Run {
public:
    Run(const Scenario& s, const RunOptions& o) : s_(s), o_(o) {
        seed_ = o.seed ? *o.seed : s.seed;
        std::vector<std::string> formats = s.output.formats;
        if (o.format == "json") formats = {"json"};
        if (o.format == "csv") formats = {"csv"};
        if (o.format == "both") formats = {"json", "csv"};
        for (const auto& f : formats) {
            if (f == "json") json_ = true;
            if (f == "csv") csv_ = true;
        }
        if (o.out_dir) {
            dir_ = *o.out_dir;
        } else if (const char* env = std::getenv("OBSCERT_OUT_DIR"); env && *env) {
            dir_ = env;
        } else {
            dir_ = s.output.directory;
        }
    }

    RunResult execute() {
        RunResult res;
        res.output_directory = dir_.string();
        if (s_.tasks.empty()) return res;
        fs::create_directories(dir_);
        for (std::size_t i = 0; i < s_.tasks.size(); ++i) {
            const TaskDecl& t = s_.tasks[i];
            TaskOutcome out{t.name, t.type, "ok", "", {}};
            current_ = &out;
            try {
                dispatch(t, i);
            } catch (const Skipped& e) {
                out.status = "skipped";
                out.message = e.what();
                failed_.insert(t.name);
            } catch (const NotAdmissible& e) {
                out.status = "not-admissible";
                out.message = e.what();
                json doc = task_header(t);
                doc["status"] = out.status;
                doc["admissibility"] = detail::to_json(e.report());
                emit(t.name + ".admissibility.json", doc.dump(2) + "\n", true);
            } catch (const std::exception& e) {
                out.status = "error";
                out.message = e.what();
                failed_.insert(t.name);
            }
            if (out.status == "not-admissible") failed_.insert(t.name);
            task_docs_.emplace_back(t.name, outcome_json(out));
            res.tasks.push_back(out);
        }
        for (const auto& o : res.tasks) {
            for (const auto& a : o.artifacts) res.artifacts.push_back(a);
        }
        res.exit_code = kExitOk;
        bool any_error = false, any_na = false, any_fail = false;
        for (const auto& o : res.tasks) {
            any_error |= o.status == "error";
            any_na |= o.status == "not-admissible";
            any_fail |= o.status == "verification-failed";
        }
        if (any_fail) res.exit_code = kExitVerificationFailed;
        if (any_na) res.exit_code = kExitNotAdmissible;
        if (any_error) res.exit_code = kExitError;
        write_summary(res);
        return res;
    }

private:
    void dispatch(const TaskDecl& t, std::size_t index) {
        const std::uint64_t seed = stream_seed(seed_, index);
        if (t.type == "certify") return do_certify(t);
        if (t.type == "certify-polynomial") return do_certify_polynomial(t);
        if (t.type == "subordinate") return do_subordinate(t);
        if (t.type == "symbol-rate") return do_symbol_rate(t);
        if (t.type == "fit") return do_fit(t, seed);
        if (t.type == "verify") return do_verify(t, seed);
        if (t.type == "report") return do_report(t);
        throw ResolutionError("unknown task type '" + t.type + "'");
    }

    // ---- shared helpers -------------------------------------------------------------------

    void emit(const std::string& file, const std::string& content, bool is_json) {
        if (is_json ? !json_ : !csv_) return;
        std::ofstream os(dir_ / file, std::ios::binary);
        if (!os) throw Error("cannot write " + (dir_ / file).string());
        os << content;
        current_->artifacts.push_back(file);
    }

    json task_header(const TaskDecl& t) const {
        json j;
        j["task"] = t.name;
        j["type"] = t.type;
        j["seed"] = seed_;
        return j;
    }

    static json outcome_json(const TaskOutcome& o) {
        json j;
        j["name"] = o.name;
        j["type"] = o.type;
        j["status"] = o.status;
        j["message"] = o.message;
        j["artifacts"] = o.artifacts;
        return j;
    }

    void require_ok(const std::string& task) const {
        if (failed_.count(task)) throw Skipped("depends on task '" + task + "', which did not complete");
    }

    const ModelDecl& model_decl(const std::string& name) const {
        auto it = s_.models.find(name);
        if (it == s_.models.end()) throw ResolutionError("unknown model '" + name + "'");
        return it->second;
    }

    // Models are built once and shared by later tasks.
    const SpectralModel& model(const std::string& name, const std::optional<BernsteinFunction>& phi = std::nullopt) {
        const std::string key = name + (phi ? "|" + phi->describe() : "");
        if (auto it = models_.find(key); it != models_.end()) return *it->second;
        const ModelDecl& d = model_decl(name);
        std::unique_ptr<SpectralModel> m;
        if (d.type == "diagonal") {
            auto dm = d.g.empty() ? DiagonalModel::with_rates(d.mu, d.L, d.G)
                                  : DiagonalModel(d.N, build_rate(s_, d.g), d.L, d.G);
            if (!d.phi.empty()) dm = dm.subordinate(build_bernstein(s_, d.phi));
            if (phi) dm = dm.subordinate(*phi);
            m = std::make_unique<DiagonalModel>(std::move(dm));
        } else {
            if (phi) throw HypothesisViolation("subordination is only available on diagonal models");
            m = std::make_unique<GridModel>(build_symbol(s_, d.symbol), d.box, d.G, d.p);
        }
        return *models_.emplace(key, std::move(m)).first->second;
    }

    RateFunction model_g(const std::string& name) {
        const ModelDecl& d = model_decl(name);
        if (d.type == "grid") return symbol_rate(build_symbol(s_, d.symbol));
        if (d.g.empty()) throw ResolutionError("model '" + name + "' has explicit decay rates; name a rate with 'g'");
        const auto& dm = dynamic_cast<const DiagonalModel&>(model(name));
        return dm.theorem_g();
    }

    ThickSet thick_set(const SpectralModel& m, const std::string& model_name, const std::string& set_name) {
        const std::string name = set_name.empty() ? model_decl(model_name).set : set_name;
        auto it = s_.sets.find(name);
        if (it == s_.sets.end()) throw ResolutionError("unknown set '" + name + "'");
        return make_thick_set(m.geometry(), it->second.spec);
    }

    // f, g, h and the constants of a certify or subordinate task.
    ProblemData problem(const TaskDecl& t) {
        ProblemData p = merge_constants(s_.constants, t.constants);
        if (!t.fit.empty()) {
            require_ok(t.fit);
            const FitEntry& fe = fits_.at(t.fit);
            p.f = fe.ls.f;
            if (!t.constants.C1 && !s_.constants.C1) p.C1 = fe.ls.d0;
        }
        if (!t.f.empty()) p.f = build_rate(s_, t.f);
        p.g = t.g.empty() ? model_g(t.model) : build_rate(s_, t.g);
        p.h = t.h.empty() ? RateFunction::identity() : build_rate(s_, t.h);
        return p;
    }

    void write_certificate(const TaskDecl& t, const Certificate& cert, const ProblemData& p) {
        json doc = task_header(t);
        doc["status"] = "ok";
        json consts;
        consts["M"] = number(p.M);
        consts["omega"] = number(p.omega);
        consts["C1"] = number(p.C1);
        consts["C2"] = number(p.C2);
        consts["normC"] = number(p.normC);
        consts["m"] = number(p.m);
        consts["f"] = p.f.describe();
        consts["g"] = p.g.describe();
        consts["h"] = p.h.describe();
        doc["problem"] = consts;
        doc["certificate"] = detail::to_json(cert);
        const IterationTrace trace = iteration_trace(cert, p, t.trace_terms);
        doc["trace"] = detail::to_json(trace);
        emit(t.name + ".certificate.json", doc.dump(2) + "\n", true);
        emit(t.name + ".trace.csv", trace_csv(trace), false);
    }

    // ---- tasks ----------------------------------------------------------------------------

    void do_certify(const TaskDecl& t) {
        CertEntry e;
        e.problem = problem(t);
        e.cert = certify(e.problem);
        e.verify_g = e.problem.g;
        e.model = t.model;
        write_certificate(t, e.cert, e.problem);
        certs_.emplace(t.name, std::move(e));
    }

    void do_certify_polynomial(const TaskDecl& t) {
        const ProblemData base = merge_constants(s_.constants, t.constants);
        CertEntry e;
        e.problem = polynomial_problem(t.poly, base.M, base.omega, base.C1, base.C2, base.normC, base.T, base.r, base.m);
        e.cert = certify_polynomial(t.poly, base.M, base.omega, base.C1, base.C2, base.normC, base.T, base.r, base.m);
        e.verify_g = e.problem.g;
        write_certificate(t, e.cert, e.problem);
        certs_.emplace(t.name, std::move(e));
    }

    void do_subordinate(const TaskDecl& t) {
        CertEntry e;
        e.problem = problem(t);
        e.phi = build_bernstein(s_, t.phi);
        e.cert = certify_subordinated(*e.phi, e.problem);
        e.verify_g = subordinate_rate(*e.phi, e.problem.g);
        e.model = t.model;
        ProblemData shown = e.problem;
        shown.g = e.verify_g;
        write_certificate(t, e.cert, shown);
        certs_.emplace(t.name, std::move(e));
    }

    void do_symbol_rate(const TaskDecl& t) {
        const SymbolModel sym = build_symbol(s_, t.symbol);
        const std::vector<double> lambdas = t.lambdas.empty() ? std::vector<double>{1.0, 10.0, 100.0} : t.lambdas;
        json doc = task_header(t);
        doc["symbol"] = t.symbol;
        json rows = json::array();
        std::ostringstream csv;
        csv << "lambda,value,boundary_value,phi_min,ray_monotone,heuristic\n";
        for (double lam : lambdas) {
            const DissipationResult d = dissipation_rate(sym, lam);
            rows.push_back(detail::to_json(d, lam));
            csv << format_double(lam) << ',' << format_double(d.value) << ',' << format_double(d.boundary_value) << ','
                << format_double(d.phi_min) << ',' << (d.ray_monotone ? "true" : "false") << ','
                << (d.heuristic ? "true" : "false") << '\n';
        }
        doc["rates"] = rows;
        emit(t.name + ".symbol-rate.json", doc.dump(2) + "\n", true);
        emit(t.name + ".symbol-rate.csv", csv.str(), false);
    }

    std::vector<double> default_lambdas(const SpectralModel& m) const {
        std::vector<double> out;
        if (const auto* dm = dynamic_cast<const DiagonalModel*>(&m)) {
            const double top = dm->base_eigenvalues().back();
            for (double l = 4.0; l <= top / 4.0; l *= 4.0) out.push_back(l);
        } else {
            for (double l = 1.0; l <= 8.0; l *= 2.0) out.push_back(l);
        }
        return out;
    }

    void do_fit(const TaskDecl& t, std::uint64_t seed) {
        const SpectralModel& m = model(t.model);
        const ThickSet E = thick_set(m, t.model, t.set);
        const auto lambdas = t.lambdas.empty() ? default_lambdas(m) : t.lambdas;
        FitEntry fe{estimate_ls_constants(m, E, lambdas, t.samples, seed, o_.jobs), t.model};
        json doc = task_header(t);
        doc["model"] = m.describe();
        doc["set"] = {{"pattern", E.pattern}, {"rho", E.rho}, {"rho_actual", E.rho_actual}};
        doc["fit"] = detail::to_json(fe.ls);
        emit(t.name + ".fit.json", doc.dump(2) + "\n", true);
        std::ostringstream csv;
        csv << "lambda,max_ratio\n";
        for (std::size_t i = 0; i < fe.ls.lambdas.size(); ++i) {
            csv << format_double(fe.ls.lambdas[i]) << ',' << format_double(fe.ls.max_ratio[i]) << '\n';
        }
        emit(t.name + ".fit.csv", csv.str(), false);
        fits_.emplace(t.name, std::move(fe));
    }

    void do_verify(const TaskDecl& t, std::uint64_t seed) {
        const CertEntry* ce = nullptr;
        if (!t.certificate.empty()) {
            require_ok(t.certificate);
            ce = &certs_.at(t.certificate);
        }
        const SpectralModel& m = model(t.model, ce ? ce->phi : std::nullopt);
        const ThickSet E = thick_set(m, t.model, t.set);
        std::vector<std::string> checks = t.checks;
        if (checks.empty()) {
            checks = {"dissipation", "uncertainty", "observability"};
            if (m.p() == 2.0) {
                checks.push_back("optimal");
                checks.push_back("lower-bound");
            }
        }
        const double T = ce ? ce->cert.T : t.constants.T.value_or(1.0);
        const double r = ce ? ce->cert.r : t.constants.r.value_or(1.0);
        const auto lambdas = t.lambdas.empty() ? default_lambdas(m) : t.lambdas;
        const auto times = t.times.empty() ? std::vector<double>{0.0, 0.01 * T, 0.1 * T, T} : t.times;

        VerificationReport rep;
        rep.echo("model", m.describe());
        rep.echo("set", E.pattern);
        rep.echo("rho", E.rho);
        rep.echo("rho_actual", E.rho_actual);
        rep.echo("seed", std::to_string(seed));
        rep.echo("samples", std::to_string(t.samples));
        rep.echo("time_panels", std::to_string(t.time_panels));
        rep.echo("T", T);
        rep.echo("r", format_double(r));
        rep.echo("relative_tolerance", kVerifyRelTol);
        rep.echo("certificate", t.certificate.empty() ? "none" : t.certificate);
        rep.warnings.push_back("grid-resolution check: statements about the continuum are tested on a finite lattice");

        std::optional<OptimalConstant> opt;
        for (const auto& c : checks) {
            if (c == "dissipation") {
                if (!ce) {
                    rep.warnings.push_back("dissipation skipped: no certificate");
                    continue;
                }
                rep.rows.push_back(check_dissipation(m, ce->verify_g, ce->problem.h, ce->problem.C2,
                                                     ce->problem.omega, lambdas, times, t.samples,
                                                     stream_seed(seed, 1), o_.jobs));
            } else if (c == "uncertainty") {
                RateFunction f = RateFunction::identity();
                double C1 = 1.0;
                if (ce) {
                    f = ce->problem.f;
                    C1 = ce->problem.C1;
                } else if (!t.fit.empty()) {
                    require_ok(t.fit);
                    f = fits_.at(t.fit).ls.f;
                    C1 = t.constants.C1.value_or(fits_.at(t.fit).ls.d0);
                } else {
                    rep.warnings.push_back("uncertainty skipped: no certificate or fit");
                    continue;
                }
                rep.rows.push_back(check_uncertainty(m, E, f, C1, lambdas, t.samples, stream_seed(seed, 2), o_.jobs));
            } else if (c == "observability") {
                if (!ce) {
                    rep.warnings.push_back("observability skipped: no certificate");
                    continue;
                }
                rep.rows.push_back(check_observability(m, E, T, ce->cert.log_cobs_Lr, r, t.samples, t.time_panels,
                                                       stream_seed(seed, 3), o_.jobs));
            } else if (c == "optimal") {
                if (m.p() != 2.0) {
                    rep.warnings.push_back("optimal skipped: needs p = 2");
                    continue;
                }
                opt = optimal_constant_l2(m, E, T, t.time_panels);
                const OptimalConstant fine = optimal_constant_l2(m, E, T, 2 * t.time_panels);
                VerificationRow ref;
                ref.name = "optimal-l2-refinement";
                ref.samples = 2;
                ref.log_max_ratio = std::log(std::abs(fine.value / opt->value - 1.0));
                ref.log_certified_bound = std::log(1e-6);
                ref.detail = "relative change under time-panel doubling";
                finalize_row(ref);
                if (ce) {
                    VerificationRow row;
                    row.name = "optimal-l2";
                    row.samples = 1;
                    row.log_max_ratio = opt->log_value;
                    row.log_certified_bound = ce->cert.log_cobs_L1 + log_holder_factor(ce->cert.omega, T, 2.0);
                    row.detail = "exact discretized L2-in-time constant (" + opt->method + ") vs certified cobs_L2";
                    finalize_row(row);
                    rep.rows.push_back(row);
                }
                rep.rows.push_back(ref);
            } else if (c == "lower-bound") {
                const LowerBound lb = empirical_lower_bound(m, E, T, r, t.ascent, stream_seed(seed, 4), o_.jobs);
                if (ce) {
                    VerificationRow row;
                    row.name = "lower-bound";
                    row.samples = lb.evaluations;
                    row.log_max_ratio = lb.log_value;
                    row.log_certified_bound = ce->cert.log_cobs_Lr;
                    row.detail = "ascent lower bound vs certified cobs_Lr";
                    finalize_row(row);
                    rep.rows.push_back(row);
                }
                if (opt && r == 2.0) {
                    VerificationRow row;
                    row.name = "lower-bound-vs-optimal";
                    row.samples = lb.evaluations;
                    row.log_max_ratio = lb.log_value;
                    row.log_certified_bound = opt->log_value + std::log1p(1e-6);
                    row.detail = "ascent lower bound vs exact L2 oracle";
                    finalize_row(row);
                    rep.rows.push_back(row);
                }
            }
        }
        json doc = task_header(t);
        doc["status"] = rep.all_pass() ? "ok" : "verification-failed";
        doc["report"] = detail::to_json(rep);
        emit(t.name + ".verification.json", doc.dump(2) + "\n", true);
        emit(t.name + ".verification.csv", verification_csv(rep), false);
        if (!rep.all_pass()) {
            current_->status = "verification-failed";
            for (const auto& row : rep.rows) {
                if (!row.pass) current_->message += (current_->message.empty() ? "failed: " : ", ") + row.name;
            }
        }
    }

    void do_report(const TaskDecl& t) {
        json doc = task_header(t);
        json tasks = json::array();
        for (const auto& [name, j] : task_docs_) {
            if (t.include.empty() || std::find(t.include.begin(), t.include.end(), name) != t.include.end()) {
                tasks.push_back(j);
            }
        }
        doc["tasks"] = tasks;
        const bool keep = json_;
        json_ = true;  // the combined report is always JSON
        emit(t.name + ".report.json", doc.dump(2) + "\n", true);
        json_ = keep;
    }

    void write_summary(RunResult& res) {
        json run;
        run["schema"] = s_.schema;
        run["scenario"] = s_.path;
        run["seed"] = seed_;
        if (o_.timestamp) {
            const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            run["generated_at"] = buf;
        }
        run["exit_code"] = res.exit_code;
        json tasks = json::array();
        for (const auto& o : res.tasks) tasks.push_back(outcome_json(o));
        run["tasks"] = tasks;
        {
            std::ofstream os(dir_ / "run.json", std::ios::binary);
            os << run.dump(2) << "\n";
        }
        std::ostringstream txt;
        txt << "scenario: " << s_.path << "\n";
        txt << "seed: " << seed_ << "\n";
        if (o_.timestamp) txt << "generated: " << run["generated_at"].get<std::string>() << "\n";
        txt << "\n";
        for (const auto& o : res.tasks) {
            txt << o.name << " (" << o.type << "): " << o.status;
            if (!o.message.empty()) txt << " - " << o.message;
            txt << "\n";
            for (const auto& a : o.artifacts) txt << "    " << a << "\n";
        }
        txt << "\nexit code " << res.exit_code << "\n";
        std::ofstream os(dir_ / "summary.txt", std::ios::binary);
        os << txt.str();
        res.artifacts.push_back("run.json");
        res.artifacts.push_back("summary.txt");
    }

    const Scenario& s_;
    const RunOptions& o_;
    std::uint64_t seed_ = 0;
    bool json_ = false, csv_ = false;
    fs::path dir_;
    TaskOutcome* current_ = nullptr;
    std::map<std::string, std::unique_ptr<SpectralModel>> models_;
    std::map<std::string, CertEntry> certs_;
    std::map<std::string, FitEntry> fits_;
    std::set<std::string> failed_;
    std::vector<std::pair<std::string, json>> task_docs_;
};

Diagnostic from_parse_error(const ParseError& e) { return {"ParseError", e.what(), e.path(), e.line(), e.column()}; }

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& opts) {
    RunResult res;
    res.diagnostics = resolve_references(scenario);
    if (!res.diagnostics.empty()) {
        res.exit_code = kExitError;
        return res;
    }
    if (opts.jobs > 0) set_default_jobs(opts.jobs);
    Run run(scenario, opts);
    return run.execute();
}

RunResult run_scenario(const std::string& path, const RunOptions& opts) {
    try {
        return run_scenario(load_scenario(path, opts.overrides), opts);
    } catch (const ParseError& e) {
        RunResult res;
        res.exit_code = kExitError;
        res.diagnostics.push_back(from_parse_error(e));
        return res;
    }
}

std::vector<Diagnostic> validate_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    try {
        return resolve_references(load_scenario(path, overrides));
    } catch (const ParseError& e) {
        return {from_parse_error(e)};
    }
}

}  // namespace obscert
