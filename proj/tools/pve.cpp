// pve: Poisson-Voronoi extreme-distance toolkit.
//
// Subcommands:
//   simulate-2d   Monte-Carlo tessellation experiment; emits ECDFs of the
//                 normalized min/max generator-vertex distances plus the
//                 all-vertex-distance stream and a run report.
//   simulate-1d   Line analogue with closed-form overlay columns.
//   fit           Maximum-likelihood fits of the five families to a
//                 histogram JSON or a raw value column.
//   theory        Closed-form CDFs on a grid.
//   moments       Generalized Gamma raw moments.
//
// Exit codes: 0 success, 2 usage, 3 data, 4 non-convergence, 5 geometry.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "pve/config.hpp"
#include "pve/distributions.hpp"
#include "pve/ecdf.hpp"
#include "pve/extremes.hpp"
#include "pve/fitting.hpp"
#include "pve/sampling.hpp"
#include "pve/version.hpp"
#include "pve/voronoi.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr uint64_t kDefaultSeed = 20240917;

uint64_t default_seed() {
    if (const char* env = std::getenv("PVE_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw pve::UsageError("PVE_SEED must be a nonnegative integer");
        }
    }
    return kDefaultSeed;
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string now_utc_iso() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

struct OutputSink {
    std::optional<fs::path> dir;
    json manifest_outputs = json::array();

    void write(const std::string& name, const std::string& content, bool to_stdout_if_no_dir) {
        if (!dir) {
            if (to_stdout_if_no_dir) std::fwrite(content.data(), 1, content.size(), stdout);
            return;
        }
        const fs::path p = *dir / name;
        std::ofstream os(p, std::ios::binary);
        if (!os) throw pve::DataError("cannot open output file " + p.string());
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        os.close();
        manifest_outputs.push_back(
            {{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    }
};

json histogram_json(const char* stream, const pve::EcdfAccumulator& acc) {
    const auto [mean, m2] = acc.moments();
    json j;
    j["kind"] = "pve_histogram";
    j["stream"] = stream;
    j["bins"] = acc.bins();
    j["r_cap"] = acc.r_cap();
    j["n"] = acc.n();
    j["overflow"] = acc.overflow();
    j["sum"] = acc.sum().value();
    j["sum_sq"] = acc.sum_sq().value();
    j["mean"] = mean;
    j["m2"] = m2;
    j["counts"] = acc.counts();
    return j;
}

std::string ecdf_csv(const pve::EcdfAccumulator& acc) {
    std::string out = "x,ecdf\n";
    const auto e = acc.ecdf_at_edges();
    for (size_t j = 0; j < e.size(); ++j) {
        out += fmt9(acc.upper_edge(j));
        out += ',';
        out += fmt9(e[j]);
        out += '\n';
    }
    return out;
}

json ecdf_json(const pve::EcdfAccumulator& acc) {
    json rows = json::array();
    const auto e = acc.ecdf_at_edges();
    for (size_t j = 0; j < e.size(); ++j) rows.push_back({acc.upper_edge(j), e[j]});
    return {{"columns", {"x", "ecdf"}}, {"rows", rows}};
}

double sup_vs_theory(const pve::EcdfAccumulator& acc, pve::TheoryCdf which) {
    const auto e = acc.ecdf_at_edges();
    double sup = 0.0;
    for (size_t j = 0; j < e.size(); ++j) {
        sup = std::max(sup, std::fabs(e[j] - pve::theory_cdf(which, acc.upper_edge(j))));
    }
    return sup;
}

void apply_config_file(const std::string& path, json& into) {
    std::ifstream is(path);
    if (!is) throw pve::UsageError("cannot open config file " + path);
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw pve::DataError("config file " + path + ": " + e.what());
    }
    if (j.contains("config")) j = j["config"];  // accept a manifest directly
    into = j;
}

template <class T>
void maybe_from_config(const json& cfg, const CLI::Option* opt, const char* key, T& value) {
    if (opt->count() == 0 && cfg.contains(key)) value = cfg[key].get<T>();
}

// ---------------------------------------------------------------------------

struct Simulate2DArgs {
    double lambda = 1.0;
    double area = 1e5;
    uint32_t windows = 10;
    uint64_t seed = kDefaultSeed;
    uint32_t shards = 4;
    uint32_t bins = 4096;
    std::string out_dir;
    std::string format = "csv";
    std::string config_file;
    int dump_window = -1;
    std::string raw_pairs_file;
};

json config_echo_2d(const Simulate2DArgs& a) {
    json c;
    c["command"] = "simulate-2d";
    c["lambda"] = a.lambda;
    c["area"] = a.area;
    c["windows"] = a.windows;
    c["seed"] = a.seed;
    c["shards"] = a.shards;
    c["bins"] = a.bins;
    c["format"] = a.format;
    return c;
}

int run_simulate_2d(const Simulate2DArgs& a) {
    pve::SimConfig2D cfg{a.lambda, a.area, a.windows, a.seed, a.shards};
    cfg.validate();
    if (a.format != "csv" && a.format != "json") throw pve::UsageError("--format must be csv or json");

    pve::EcdfGridSpec grid;
    grid.bins = a.bins;
    std::vector<std::vector<pve::ExtremesRecord>> raw;
    const bool want_raw = !a.raw_pairs_file.empty();

    std::fprintf(stderr, "[pve] simulate-2d lambda=%g area=%g windows=%u seed=%" PRIu64
                         " shards=%u\n",
                 a.lambda, a.area, a.windows, a.seed, a.shards);
    pve::Experiment2DResult res = pve::run_2d_experiment(cfg, grid, want_raw ? &raw : nullptr);
    std::fprintf(stderr, "[pve] %" PRIu64 " cells, %" PRIu64 " interior (%.4f), %" PRIu64
                         " vertex samples, %.2fs\n",
                 res.report.total_points, res.report.interior_cells,
                 res.report.interior_fraction(), res.report.vertex_samples,
                 res.report.wall_seconds);

    OutputSink sink;
    if (!a.out_dir.empty()) {
        sink.dir = fs::path(a.out_dir);
        fs::create_directories(*sink.dir);
    }

    const char* ext = a.format == "csv" ? "csv" : "json";
    auto emit_ecdf = [&](const char* name, const pve::EcdfAccumulator& acc) {
        const std::string fname = std::string("ecdf_") + name + "." + ext;
        if (a.format == "csv") {
            std::string head = std::string("# stream=") + name + "\n";
            sink.write(fname, sink.dir ? ecdf_csv(acc) : head + ecdf_csv(acc), true);
        } else {
            json j = ecdf_json(acc);
            j["stream"] = name;
            sink.write(fname, j.dump(2) + "\n", true);
        }
    };
    emit_ecdf("rmin", res.r_min);
    emit_ecdf("rmax", res.r_max);
    emit_ecdf("rvertex", res.r_vertex);
    sink.write("hist_rmin.json", histogram_json("r_min", res.r_min).dump(2) + "\n", false);
    sink.write("hist_rmax.json", histogram_json("r_max", res.r_max).dump(2) + "\n", false);
    sink.write("hist_rvertex.json", histogram_json("r_vertex", res.r_vertex).dump(2) + "\n", false);

    if (want_raw) {
        std::string out = "r_min_norm,r_max_norm\n";
        for (const auto& wv : raw) {
            for (const auto& rec : wv) {
                out += fmt9(rec.r_min_norm);
                out += ',';
                out += fmt9(rec.r_max_norm);
                out += '\n';
            }
        }
        if (sink.dir) {
            sink.write(a.raw_pairs_file, out, false);
        } else {
            std::ofstream os(a.raw_pairs_file, std::ios::binary);
            os << out;
        }
    }

    if (a.dump_window >= 0) {
        const pve::PointSet2D ps = pve::sample_window_2d(cfg, static_cast<uint32_t>(a.dump_window));
        const auto tri = pve::geom::triangulate(ps.points);
        const auto circles = pve::geom::circumcircles(tri);
        auto cells = pve::geom::voronoi_cells(tri, circles);
        for (auto& c : cells) c.interior = pve::geom::is_interior(c, tri, circles, ps.side);
        std::ostringstream os;
        pve::geom::dump_tessellation_csv(tri, cells, os);
        sink.write("tessellation_" + std::to_string(a.dump_window) + ".csv", os.str(), true);
    }

    json report;
    report["config"] = config_echo_2d(a);
    json results;
    results["windows"] = res.report.windows;
    results["total_cells"] = res.report.total_points;
    results["interior_cells"] = res.report.interior_cells;
    results["interior_fraction"] = res.report.interior_fraction();
    results["vertex_samples"] = res.report.vertex_samples;
    results["empty_windows"] = res.report.empty_windows;
    results["sup_ecdf_vs_vertex2d"] = sup_vs_theory(res.r_vertex, pve::TheoryCdf::vertex2d);
    results["overflow_fraction"] = {{"r_min", res.r_min.overflow_fraction()},
                                    {"r_max", res.r_max.overflow_fraction()},
                                    {"r_vertex", res.r_vertex.overflow_fraction()}};
    const bool grid_ok = res.r_min.overflow_fraction() < 1e-4 &&
                         res.r_max.overflow_fraction() < 1e-4 &&
                         res.r_vertex.overflow_fraction() < 1e-4;
    results["grid_ok"] = grid_ok;
    report["results"] = results;
    sink.write("report.json", report.dump(2) + "\n", false);
    if (!grid_ok) std::fprintf(stderr, "[pve] warning: overflow fraction above 1e-4; the grid caps look misconfigured\n");

    json manifest;
    manifest["tool"] = "pve";
    manifest["version"] = pve::kVersion;
    manifest["created_utc"] = now_utc_iso();
    manifest["wall_seconds"] = res.report.wall_seconds;
    manifest["config"] = config_echo_2d(a);
    manifest["outputs"] = sink.manifest_outputs;
    sink.write("manifest.json", manifest.dump(2) + "\n", false);
    return 0;
}

struct Simulate1DArgs {
    double lambda = 1.0;
    double length = 1e6;
    uint32_t windows = 1;
    uint64_t seed = kDefaultSeed;
    uint32_t shards = 1;
    uint32_t bins = 4096;
    std::string out_dir;
    std::string format = "csv";
    std::string config_file;
};

json config_echo_1d(const Simulate1DArgs& a) {
    json c;
    c["command"] = "simulate-1d";
    c["lambda"] = a.lambda;
    c["length"] = a.length;
    c["windows"] = a.windows;
    c["seed"] = a.seed;
    c["shards"] = a.shards;
    c["bins"] = a.bins;
    c["format"] = a.format;
    return c;
}

int run_simulate_1d(const Simulate1DArgs& a) {
    pve::SimConfig1D cfg{a.lambda, a.length, a.windows, a.seed, a.shards};
    cfg.validate();
    if (a.format != "csv" && a.format != "json") throw pve::UsageError("--format must be csv or json");
    pve::EcdfGridSpec1D grid;
    grid.bins = a.bins;
    std::fprintf(stderr, "[pve] simulate-1d lambda=%g length=%g windows=%u seed=%" PRIu64 "\n",
                 a.lambda, a.length, a.windows, a.seed);
    pve::Experiment1DResult res = pve::run_1d_experiment(cfg, grid);
    const double sup_min = sup_vs_theory(res.d_min, pve::TheoryCdf::min1d);
    const double sup_max = sup_vs_theory(res.d_max, pve::TheoryCdf::max1d);
    std::fprintf(stderr, "[pve] %" PRIu64 " interior cells; sup|ecdf-theory| min=%.3e max=%.3e\n",
                 res.report.interior_cells, sup_min, sup_max);

    OutputSink sink;
    if (!a.out_dir.empty()) {
        sink.dir = fs::path(a.out_dir);
        fs::create_directories(*sink.dir);
    }

    // combined overlay table on the d_max grid
    const auto emax = res.d_max.ecdf_at_edges();
    std::string table = "d,ecdf_min,theory_min,ecdf_max,theory_max\n";
    for (size_t j = 0; j < emax.size(); ++j) {
        const double d = res.d_max.upper_edge(j);
        table += fmt9(d);
        table += ',';
        table += fmt9(res.d_min.eval(d));
        table += ',';
        table += fmt9(pve::theory_cdf(pve::TheoryCdf::min1d, d));
        table += ',';
        table += fmt9(emax[j]);
        table += ',';
        table += fmt9(pve::theory_cdf(pve::TheoryCdf::max1d, d));
        table += '\n';
    }
    if (a.format == "csv") {
        sink.write("ecdf_1d.csv", table, true);
    } else {
        json rows = json::array();
        for (size_t j = 0; j < emax.size(); ++j) {
            const double d = res.d_max.upper_edge(j);
            rows.push_back({d, res.d_min.eval(d), pve::theory_cdf(pve::TheoryCdf::min1d, d),
                            emax[j], pve::theory_cdf(pve::TheoryCdf::max1d, d)});
        }
        json j = {{"columns", {"d", "ecdf_min", "theory_min", "ecdf_max", "theory_max"}},
                  {"rows", rows}};
        sink.write("ecdf_1d.json", j.dump(2) + "\n", true);
    }
    sink.write("hist_dmin.json", histogram_json("d_min", res.d_min).dump(2) + "\n", false);
    sink.write("hist_dmax.json", histogram_json("d_max", res.d_max).dump(2) + "\n", false);

    json report;
    report["config"] = config_echo_1d(a);
    report["results"] = {{"windows", res.report.windows},
                         {"total_points", res.report.total_points},
                         {"interior_cells", res.report.interior_cells},
                         {"sup_ecdf_vs_min1d", sup_min},
                         {"sup_ecdf_vs_max1d", sup_max},
                         {"overflow_fraction",
                          {{"d_min", res.d_min.overflow_fraction()},
                           {"d_max", res.d_max.overflow_fraction()}}}};
    sink.write("report.json", report.dump(2) + "\n", false);

    json manifest;
    manifest["tool"] = "pve";
    manifest["version"] = pve::kVersion;
    manifest["created_utc"] = now_utc_iso();
    manifest["wall_seconds"] = res.report.wall_seconds;
    manifest["config"] = config_echo_1d(a);
    manifest["outputs"] = sink.manifest_outputs;
    sink.write("manifest.json", manifest.dump(2) + "\n", false);
    return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string families = "generalized_gamma,gamma,log_normal,rayleigh,weibull";
    double level = 0.95;
    std::string out_dir;
    uint32_t column = 1;
};

std::vector<double> read_raw_column(const std::string& path, uint32_t column) {
    std::ifstream is(path);
    if (!is) throw pve::DataError("cannot open input file " + path);
    std::vector<double> values;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        uint32_t col = 0;
        std::string picked;
        while (std::getline(ss, cell, ',')) {
            ++col;
            if (col == column) {
                picked = cell;
                break;
            }
        }
        if (picked.empty()) {
            throw pve::DataError(path + ":" + std::to_string(lineno) + ": missing column " +
                                 std::to_string(column));
        }
        try {
            size_t pos = 0;
            const double v = std::stod(picked, &pos);
            values.push_back(v);
        } catch (...) {
            if (lineno == 1) continue;  // header row
            throw pve::DataError(path + ":" + std::to_string(lineno) + ": not a number: '" +
                                 picked + "'");
        }
    }
    if (values.empty()) throw pve::DataError(path + ": no numeric values found");
    return values;
}

json fit_to_json(const pve::FitResult& fit, double level,
                 const std::array<pve::ConfidenceInterval, 3>& ci) {
    using pve::Family;
    static const std::map<Family, std::vector<std::string>> names = {
        {Family::generalized_gamma, {"a", "b", "c"}},
        {Family::gamma, {"shape", "rate"}},
        {Family::log_normal, {"mu", "sigma"}},
        {Family::rayleigh, {"sigma"}},
        {Family::weibull, {"shape", "scale"}},
    };
    json params = json::object();
    json cis = json::object();
    const auto& nm = names.at(fit.family);
    for (size_t i = 0; i < nm.size(); ++i) {
        params[nm[i]] = fit.params.p[i];
        if (ci[i].valid) {
            cis[nm[i]] = {ci[i].lower, ci[i].upper};
        } else {
            cis[nm[i]] = nullptr;
        }
    }
    json j;
    j["family"] = pve::family_name(fit.family);
    j["params"] = params;
    j["ci"] = {{"level", level}, {"intervals", cis}};
    j["log_likelihood"] = fit.log_likelihood;
    j["rmse"] = fit.rmse;
    j["max_abs_variation"] = fit.max_abs_variation;
    j["n"] = fit.n;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["gradient_norm"] = fit.gradient_norm;
    j["aic"] = fit.aic;
    j["bic"] = fit.bic;
    j["warnings"] = fit.warnings;
    return j;
}

int run_fit(const FitArgs& a) {
    if (!(a.level > 0.0 && a.level < 1.0)) throw pve::UsageError("--level must be in (0,1)");
    std::vector<pve::Family> families;
    {
        std::stringstream ss(a.families);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) families.push_back(pve::family_from_name(tok));
        }
        if (families.empty()) throw pve::UsageError("--families: empty list");
    }

    std::ifstream probe(a.input);
    if (!probe) throw pve::DataError("cannot open input file " + a.input);
    char first = 0;
    probe >> first;
    probe.close();

    std::optional<pve::EcdfAccumulator> acc;
    std::vector<double> raw;
    if (first == '{') {
        std::ifstream is(a.input);
        json j;
        try {
            is >> j;
        } catch (const std::exception& e) {
            throw pve::DataError(a.input + ": " + e.what());
        }
        if (!j.contains("counts") || !j.contains("r_cap")) {
            throw pve::DataError(a.input + ": not a pve histogram (missing counts/r_cap)");
        }
        acc = pve::EcdfAccumulator::from_parts(
            j["bins"].get<uint32_t>(), j["r_cap"].get<double>(),
            j["counts"].get<std::vector<uint64_t>>(), j["overflow"].get<uint64_t>(),
            j["sum"].get<double>(), j["sum_sq"].get<double>());
        std::fprintf(stderr, "[pve] fit: histogram input, n=%" PRIu64 "\n", acc->n());
    } else {
        raw = read_raw_column(a.input, a.column);
        std::fprintf(stderr, "[pve] fit: raw input, n=%zu\n", raw.size());
    }

    std::vector<pve::FitResult> fits;
    std::vector<std::pair<pve::Family, std::string>> failures;
    for (pve::Family f : families) {
        try {
            fits.push_back(acc ? pve::fit_mle(f, *acc)
                               : pve::fit_mle(f, std::span<const double>(raw)));
        } catch (const std::exception& e) {
            failures.emplace_back(f, e.what());
            std::fprintf(stderr, "[pve] fit %s failed: %s\n", pve::family_name(f), e.what());
        }
    }
    if (fits.empty() && !failures.empty()) {
        throw pve::NonConvergenceError("all requested family fits failed");
    }
    std::stable_sort(fits.begin(), fits.end(),
                     [](const auto& x, const auto& y) { return x.rmse < y.rmse; });

    json report;
    report["input"] = a.input;
    report["level"] = a.level;
    json jfits = json::array();
    std::string table = "family,params,ci_lower,ci_upper,log_likelihood,rmse,max_abs_variation,converged\n";
    for (const auto& fit : fits) {
        const auto ci = pve::confidence_intervals(fit, a.level);
        jfits.push_back(fit_to_json(fit, a.level, ci));
        std::string ps, lo, hi;
        for (size_t i = 0; i < pve::family_dim(fit.family); ++i) {
            if (i) {
                ps += ';';
                lo += ';';
                hi += ';';
            }
            ps += fmt9(fit.params.p[i]);
            lo += ci[i].valid ? fmt9(ci[i].lower) : "nan";
            hi += ci[i].valid ? fmt9(ci[i].upper) : "nan";
        }
        table += std::string(pve::family_name(fit.family)) + "," + ps + "," + lo + "," + hi + "," +
                 fmt9(fit.log_likelihood) + "," + fmt9(fit.rmse) + "," +
                 fmt9(fit.max_abs_variation) + "," + (fit.converged ? "true" : "false") + "\n";
    }
    report["fits"] = jfits;
    json jfail = json::array();
    for (const auto& [f, msg] : failures) {
        jfail.push_back({{"family", pve::family_name(f)}, {"error", msg}});
    }
    report["failures"] = jfail;

    OutputSink sink;
    if (!a.out_dir.empty()) {
        sink.dir = fs::path(a.out_dir);
        fs::create_directories(*sink.dir);
    }
    sink.write("fit_table.csv", table, true);
    sink.write("fit_report.json", report.dump(2) + "\n", false);
    if (!sink.dir) std::fprintf(stderr, "[pve] (no --out-dir: fit_report.json not written)\n");
    return 0;
}

// ---------------------------------------------------------------------------

struct TheoryArgs {
    std::string which;
    std::string grid = "0:3:601";
    double lambda = 1.0;
    std::string out;
};

int run_theory(const TheoryArgs& a) {
    const pve::TheoryCdf which = pve::theory_from_name(a.which);
    double lo = 0, hi = 0;
    int count = 0;
    if (std::sscanf(a.grid.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 2 ||
        !(hi > lo) || lo < 0.0) {
        throw pve::UsageError("--grid must be lo:hi:count with 0 <= lo < hi, count >= 2");
    }
    auto f = pve::rescale_cdf([which](double x) { return pve::theory_cdf(which, x); }, a.lambda);
    std::string out = "x,cdf\n";
    for (int i = 0; i < count; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
        out += fmt9(x);
        out += ',';
        out += fmt9(f(x));
        out += '\n';
    }
    if (a.out.empty()) {
        std::fwrite(out.data(), 1, out.size(), stdout);
    } else {
        std::ofstream os(a.out, std::ios::binary);
        if (!os) throw pve::DataError("cannot open output file " + a.out);
        os << out;
    }
    return 0;
}

struct MomentsArgs {
    double a = 0, b = 0, c = 0;
    std::string orders = "1,2";
};

int run_moments(const MomentsArgs& ar) {
    pve::GGParams p{ar.a, ar.b, ar.c};
    p.validate();
    std::string out = "order,moment\n";
    std::stringstream ss(ar.orders);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        double m = 0;
        try {
            m = std::stod(tok);
        } catch (...) {
            throw pve::UsageError("--orders: not a number: '" + tok + "'");
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s,%.6f\n", tok.c_str(), pve::gg_moment(m, p));
        out += buf;
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson-Voronoi extreme-distance toolkit"};
    app.require_subcommand(1);

    Simulate2DArgs s2;
    s2.seed = default_seed();
    auto* c2 = app.add_subcommand("simulate-2d", "2D tessellation Monte-Carlo experiment");
    auto* o_lambda2 = c2->add_option("--lambda", s2.lambda, "seed density per unit area");
    auto* o_area = c2->add_option("--area", s2.area, "window area (window is [0,sqrt(area)]^2)");
    auto* o_windows2 = c2->add_option("--windows", s2.windows, "number of independent windows");
    auto* o_seed2 = c2->add_option("--seed", s2.seed, "64-bit RNG seed");
    auto* o_shards2 = c2->add_option("--shards", s2.shards, "parallel shard count");
    auto* o_bins2 = c2->add_option("--bins", s2.bins, "ECDF accumulator bins");
    c2->add_option("--out-dir", s2.out_dir, "output directory (stdout when absent)");
    auto* o_format2 = c2->add_option("--format", s2.format, "csv or json");
    c2->add_option("--config", s2.config_file, "JSON config file (flags override)");
    c2->add_option("--dump-window", s2.dump_window, "also dump this window's tessellation CSV");
    c2->add_option("--raw-pairs", s2.raw_pairs_file, "stream per-cell (r_min,r_max) to this CSV");

    Simulate1DArgs s1;
    s1.seed = default_seed();
    auto* c1 = app.add_subcommand("simulate-1d", "1D line Monte-Carlo experiment");
    auto* o_lambda1 = c1->add_option("--lambda", s1.lambda, "seed density per unit length");
    auto* o_length = c1->add_option("--length", s1.length, "line length");
    auto* o_windows1 = c1->add_option("--windows", s1.windows, "number of independent windows");
    auto* o_seed1 = c1->add_option("--seed", s1.seed, "64-bit RNG seed");
    auto* o_shards1 = c1->add_option("--shards", s1.shards, "parallel shard count");
    auto* o_bins1 = c1->add_option("--bins", s1.bins, "ECDF accumulator bins");
    c1->add_option("--out-dir", s1.out_dir, "output directory (stdout when absent)");
    auto* o_format1 = c1->add_option("--format", s1.format, "csv or json");
    c1->add_option("--config", s1.config_file, "JSON config file (flags override)");

    FitArgs fa;
    auto* cf = app.add_subcommand("fit", "fit families to a histogram JSON or raw column");
    cf->add_option("--input", fa.input, "pve histogram JSON or raw value column file")->required();
    cf->add_option("--families", fa.families, "comma list of families");
    cf->add_option("--level", fa.level, "confidence level (default 0.95)");
    cf->add_option("--out-dir", fa.out_dir, "output directory (stdout when absent)");
    cf->add_option("--column", fa.column, "1-based CSV column for raw input");

    TheoryArgs ta;
    auto* ct = app.add_subcommand("theory", "closed-form CDF values on a grid");
    ct->add_option("--which", ta.which, "edge1d | max1d | min1d | vertex2d")->required();
    ct->add_option("--grid", ta.grid, "lo:hi:count (default 0:3:601)");
    ct->add_option("--lambda", ta.lambda, "rescale to intensity lambda (default 1)");
    ct->add_option("--out", ta.out, "output file (stdout when absent)");

    MomentsArgs ma;
    auto* cm = app.add_subcommand("moments", "Generalized Gamma raw moments");
    cm->add_option("--a", ma.a, "power parameter a > 0")->required();
    cm->add_option("--b", ma.b, "rate parameter b > 0")->required();
    cm->add_option("--c", ma.c, "shape parameter c > 0")->required();
    cm->add_option("--orders", ma.orders, "comma list of moment orders (default 1,2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c2->parsed()) {
            if (!s2.config_file.empty()) {
                json cfg;
                apply_config_file(s2.config_file, cfg);
                maybe_from_config(cfg, o_lambda2, "lambda", s2.lambda);
                maybe_from_config(cfg, o_area, "area", s2.area);
                maybe_from_config(cfg, o_windows2, "windows", s2.windows);
                maybe_from_config(cfg, o_seed2, "seed", s2.seed);
                maybe_from_config(cfg, o_shards2, "shards", s2.shards);
                maybe_from_config(cfg, o_bins2, "bins", s2.bins);
                maybe_from_config(cfg, o_format2, "format", s2.format);
            }
            return run_simulate_2d(s2);
        }
        if (c1->parsed()) {
            if (!s1.config_file.empty()) {
                json cfg;
                apply_config_file(s1.config_file, cfg);
                maybe_from_config(cfg, o_lambda1, "lambda", s1.lambda);
                maybe_from_config(cfg, o_length, "length", s1.length);
                maybe_from_config(cfg, o_windows1, "windows", s1.windows);
                maybe_from_config(cfg, o_seed1, "seed", s1.seed);
                maybe_from_config(cfg, o_shards1, "shards", s1.shards);
                maybe_from_config(cfg, o_bins1, "bins", s1.bins);
                maybe_from_config(cfg, o_format1, "format", s1.format);
            }
            return run_simulate_1d(s1);
        }
        if (cf->parsed()) return run_fit(fa);
        if (ct->parsed()) return run_theory(ta);
        if (cm->parsed()) return run_moments(ma);
        throw pve::UsageError("no subcommand");
    } catch (const pve::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const pve::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const pve::NonConvergenceError& e) {
        std::fprintf(stderr, "non-convergence: %s\n", e.what());
        return 4;
    } catch (const pve::GeometryError& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 5;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 5;
    }
}
