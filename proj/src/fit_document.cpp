#include "vlab/fit_document.hpp"

#include "vlab/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

namespace vlab::estimation {

namespace {

using Kind = DataError::Kind;

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_num(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError(Kind::missing_column, "fit document lacks '" + key + "'");
    if (it->second == "NA") return std::nan("");
    // strtod rather than from_chars: it accepts the "inf"/"nan" spellings printf emits.
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw DataError(Kind::bad_value, "fit document: bad number for '" + key + "': " + it->second);
    return v;
}

}  // namespace

void write_fit_document(std::ostream& out, const FitResult& fit) {
    const bool has_nu = fit.spec.dist.kind != dist::Kind::normal;
    const bool has_lambda = fit.spec.dist.kind == dist::Kind::skew_t;
    out << "# vlab fit document\n";
    out << "version=" << kFitDocumentVersion << '\n';
    out << "family=" << garch::to_string(fit.spec.family) << '\n';
    out << "dist=" << dist::to_string(fit.spec.dist.kind) << '\n';
    out << "mu=" << num(fit.params.mu) << '\n';
    out << "omega=" << num(fit.params.omega) << '\n';
    out << "alpha=" << num(fit.params.alpha) << '\n';
    out << "gamma=" << num(fit.params.gamma) << '\n';
    out << "beta=" << num(fit.params.beta) << '\n';
    out << "nu=" << (has_nu ? num(fit.spec.dist.nu) : "NA") << '\n';
    out << "lambda=" << (has_lambda ? num(fit.spec.dist.lambda) : "NA") << '\n';
    out << "loglik=" << num(fit.loglik) << '\n';
    out << "bic=" << num(fit.bic) << '\n';
    out << "n_obs=" << fit.n_obs << '\n';
    out << "k=" << fit.k << '\n';
    out << "converged=" << (fit.converged ? "true" : "false") << '\n';
    out << "iterations=" << fit.iterations << '\n';
    out << "margin=" << num(fit.margin) << '\n';
    for (std::size_t i = 0; i < fit.names.size(); ++i)
        out << "stderr." << fit.names[i] << '=' << num(fit.std_errors.at(i)) << '\n';
    for (std::size_t i = 0; i < fit.names.size(); ++i)
        out << "p." << fit.names[i] << '=' << num(fit.p_values.at(i)) << '\n';
}

void save_fit_document(const std::filesystem::path& path, const FitResult& fit) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(Kind::missing_file, "cannot write fit document " + path.string());
    write_fit_document(out, fit);
}

FitResult read_fit_document(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError(Kind::bad_value, "fit document: malformed line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (!kv.contains("version") || parse_num(kv, "version") != kFitDocumentVersion)
        throw DataError(Kind::bad_value, "fit document: unsupported or missing version");
    if (!kv.contains("family") || !kv.contains("dist"))
        throw DataError(Kind::missing_column, "fit document lacks family/dist");

    FitResult fit;
    dist::InnovationDist d;
    d.kind = dist::parse_kind(kv.at("dist"));
    if (d.kind != dist::Kind::normal) d.nu = parse_num(kv, "nu");
    if (d.kind == dist::Kind::skew_t) d.lambda = parse_num(kv, "lambda");
    fit.spec = garch::GarchSpec::make(garch::parse_family(kv.at("family")), d);
    fit.params.mu = parse_num(kv, "mu");
    fit.params.omega = parse_num(kv, "omega");
    fit.params.alpha = parse_num(kv, "alpha");
    fit.params.gamma = parse_num(kv, "gamma");
    fit.params.beta = parse_num(kv, "beta");
    fit.loglik = parse_num(kv, "loglik");
    fit.bic = parse_num(kv, "bic");
    fit.n_obs = static_cast<std::size_t>(parse_num(kv, "n_obs"));
    fit.k = static_cast<int>(parse_num(kv, "k"));
    fit.converged = kv.contains("converged") && kv.at("converged") == "true";
    if (kv.contains("iterations")) fit.iterations = static_cast<int>(parse_num(kv, "iterations"));
    if (kv.contains("margin")) fit.margin = parse_num(kv, "margin");

    const ParamTransform names(fit.spec, 1e-6);
    fit.names = names.names();
    fit.estimates = {fit.params.mu, fit.params.omega, fit.params.alpha};
    if (fit.spec.family != garch::Family::garch) fit.estimates.push_back(fit.params.gamma);
    fit.estimates.push_back(fit.params.beta);
    if (d.kind != dist::Kind::normal) fit.estimates.push_back(d.nu);
    if (d.kind == dist::Kind::skew_t) fit.estimates.push_back(d.lambda);
    fit.std_errors_available = true;
    for (const auto& name : fit.names) {
        fit.std_errors.push_back(parse_num(kv, "stderr." + name));
        fit.p_values.push_back(parse_num(kv, "p." + name));
        if (std::isnan(fit.std_errors.back())) fit.std_errors_available = false;
    }
    if (!fit.std_errors_available) fit.diagnostic = "standard errors unavailable";
    return fit;
}

FitResult load_fit_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(Kind::missing_file, "cannot open fit document " + path.string());
    return read_fit_document(in);
}

}  // namespace vlab::estimation
