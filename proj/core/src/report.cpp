#include "obscert/report.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json_io.hpp"

namespace obscert {

namespace detail {

json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

namespace {

json r_value(double r) {
    if (std::isinf(r)) return "inf";
    return number(r);
}

}  // namespace

json to_json(const AdmissibilityReport& rep) {
    json j;
    j["admissible"] = rep.admissible();
    j["lambda_T"] = rep.lambda_T ? number(*rep.lambda_T) : json(nullptr);
    j["log_lambda_T"] = number(rep.log_lambda_T);
    j["threshold"] = number(rep.threshold);
    j["T"] = number(rep.T);
    j["m"] = number(rep.m);
    j["tail_at_lambda_T"] = number(rep.tail_at_lambda_T);
    j["monotone_ratio_ok"] = rep.monotone_ratio_ok;
    j["integrable_ok"] = rep.integrable_ok;
    json ratio;
    ratio["ok"] = rep.ratio.ok;
    ratio["first_violation"] = rep.ratio.first_violation;
    ratio["lambda_lo"] = number(rep.ratio.lambda_lo);
    ratio["lambda_hi"] = number(rep.ratio.lambda_hi);
    j["ratio_check"] = ratio;
    j["divergence"] = rep.divergence;
    j["divergence_analytic"] = rep.divergence_analytic;
    j["rejection"] = rep.rejection;
    j["warnings"] = rep.warnings;
    return j;
}

json to_json(const Certificate& cert) {
    json j;
    j["route"] = cert.route;
    j["T"] = number(cert.T);
    j["r"] = r_value(cert.r);
    j["omega"] = number(cert.omega);
    j["lambda_T"] = number(cert.lambda_T);
    j["log_lambda_T"] = number(cert.log_lambda_T);
    j["K"] = number(cert.K);
    j["lambda0"] = number(cert.lambda0);
    j["C3"] = number(cert.C3);
    j["cobs_L1"] = number(cert.cobs_L1);
    j["log_cobs_L1"] = number(cert.log_cobs_L1);
    j["cobs_Lr"] = number(cert.cobs_Lr);
    j["log_cobs_Lr"] = number(cert.log_cobs_Lr);
    j["duality_note"] = cert.duality_note;
    j["notes"] = cert.notes;
    j["admissibility"] = to_json(cert.admissibility);
    return j;
}

json to_json(const IterationTrace& trace) {
    json j;
    j["T_end"] = number(trace.T_end);
    j["sum_tau"] = number(trace.sum_tau);
    j["sum_K_series"] = number(trace.sum_K_series);
    j["log_alpha_product"] = number(trace.log_alpha_product);
    j["log_product_bound"] = number(trace.log_product_bound);
    json checks = json::array();
    for (const auto& [name, ok] : trace.checks) checks.push_back({{"name", name}, {"pass", ok}});
    j["checks"] = checks;
    json rows = json::array();
    for (const auto& r : trace.rows) {
        json row;
        row["k"] = r.k;
        row["lambda"] = number(r.lambda);
        row["tau"] = number(r.tau);
        row["log_tau"] = number(r.log_tau);
        row["T_k"] = number(r.T_k);
        row["log_alpha"] = number(r.log_alpha);
        row["log_cobs_term"] = number(r.log_cobs_term);
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

json to_json(const VerificationRow& row) {
    json j;
    j["name"] = row.name;
    j["samples"] = row.samples;
    j["max_ratio"] = number(row.max_ratio);
    j["log_max_ratio"] = number(row.log_max_ratio);
    j["certified_bound"] = number(row.certified_bound);
    j["log_certified_bound"] = number(row.log_certified_bound);
    j["pass"] = row.pass;
    j["degenerate"] = row.degenerate;
    j["detail"] = row.detail;
    return j;
}

json to_json(const VerificationReport& rep) {
    json j;
    json env;
    for (const auto& [k, v] : rep.environment) env[k] = v;
    j["environment"] = env;
    j["all_pass"] = rep.all_pass();
    json rows = json::array();
    for (const auto& r : rep.rows) rows.push_back(to_json(r));
    j["rows"] = rows;
    j["warnings"] = rep.warnings;
    return j;
}

json to_json(const LsConstants& ls) {
    json j;
    j["d0"] = number(ls.d0);
    j["d1"] = number(ls.d1);
    j["slope_ls"] = number(ls.slope_ls);
    j["d1_floor"] = ls.d1_floor;
    j["samples"] = ls.samples;
    json pts = json::array();
    for (std::size_t i = 0; i < ls.lambdas.size(); ++i) {
        pts.push_back({{"lambda", number(ls.lambdas[i])}, {"max_ratio", number(ls.max_ratio[i])}});
    }
    j["points"] = pts;
    j["label"] = "empirical estimate, not a proof";
    return j;
}

json to_json(const DissipationResult& d, double lambda) {
    json j;
    j["lambda"] = number(lambda);
    j["value"] = number(d.value);
    j["boundary_value"] = number(d.boundary_value);
    j["phi_min"] = number(d.phi_min);
    json arg = json::array();
    for (Eigen::Index i = 0; i < d.argmin.size(); ++i) arg.push_back(number(d.argmin[i]));
    j["argmin"] = arg;
    j["ray_monotone"] = d.ray_monotone;
    j["heuristic"] = d.heuristic;
    j["warnings"] = d.warnings;
    return j;
}

}  // namespace detail

std::string certificate_json(const Certificate& cert, int indent) { return detail::to_json(cert).dump(indent); }
std::string admissibility_json(const AdmissibilityReport& rep, int indent) { return detail::to_json(rep).dump(indent); }
std::string trace_json(const IterationTrace& trace, int indent) { return detail::to_json(trace).dump(indent); }
std::string verification_json(const VerificationReport& rep, int indent) { return detail::to_json(rep).dump(indent); }
std::string ls_constants_json(const LsConstants& ls, int indent) { return detail::to_json(ls).dump(indent); }
std::string dissipation_json(const DissipationResult& d, double lambda, int indent) {
    return detail::to_json(d, lambda).dump(indent);
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string trace_csv(const IterationTrace& trace) {
    std::ostringstream os;
    os << "k,lambda,tau,log_tau,T_k,log_alpha,log_cobs_term\n";
    for (const auto& r : trace.rows) {
        os << r.k << ',' << format_double(r.lambda) << ',' << format_double(r.tau) << ',' << format_double(r.log_tau)
           << ',' << format_double(r.T_k) << ',' << format_double(r.log_alpha) << ','
           << format_double(r.log_cobs_term) << '\n';
    }
    return os.str();
}

std::string verification_csv(const VerificationReport& rep) {
    std::ostringstream os;
    os << "name,samples,max_ratio,log_max_ratio,certified_bound,log_certified_bound,pass,degenerate,detail\n";
    for (const auto& r : rep.rows) {
        os << csv_field(r.name) << ',' << r.samples << ',' << format_double(r.max_ratio) << ','
           << format_double(r.log_max_ratio) << ',' << format_double(r.certified_bound) << ','
           << format_double(r.log_certified_bound) << ',' << (r.pass ? "true" : "false") << ','
           << (r.degenerate ? "true" : "false") << ',' << csv_field(r.detail) << '\n';
    }
    return os.str();
}

void write_state_csv(const std::string& path, const cvec& x) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    for (Eigen::Index i = 0; i < x.size(); ++i) os << format_double(x[i].real()) << ',' << format_double(x[i].imag()) << '\n';
    if (!os) throw Error("write failed: " + path);
}

cvec read_state_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    std::vector<std::complex<double>> v;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string re = line.substr(0, comma);
        const std::string im = comma == std::string::npos ? "0" : line.substr(comma + 1);
        double a = 0, b = 0;
        const auto ra = std::from_chars(re.data(), re.data() + re.size(), a);
        const auto rb = std::from_chars(im.data(), im.data() + im.size(), b);
        if (ra.ec != std::errc() || rb.ec != std::errc()) {
            throw ParseError("malformed state entry", path, lineno, 1);
        }
        v.emplace_back(a, b);
    }
    cvec x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
    return x;
}

namespace {

void put_le(std::ostream& os, double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, sizeof u);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    os.write(b, 8);
}

double get_le(const unsigned char* b) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &u, sizeof d);
    return d;
}

}  // namespace

void write_state_raw(const std::string& path, const cvec& x) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        put_le(os, x[i].real());
        put_le(os, x[i].imag());
    }
    if (!os) throw Error("write failed: " + path);
}

cvec read_state_raw(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (bytes.size() % 16 != 0) throw ParseError("raw state size is not a multiple of 16 bytes", path);
    cvec x(static_cast<Eigen::Index>(bytes.size() / 16));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = {get_le(&bytes[16 * i]), get_le(&bytes[16 * i + 8])};
    }
    return x;
}

}  // namespace obscert
