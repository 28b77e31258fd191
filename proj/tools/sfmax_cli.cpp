// sfmax: exact finite-dimensional distributions and ROC profiles of the
// largest generalized eigenvalue of a rank-one-spiked two-sample problem,
// with a Monte Carlo cross-check.
//
// Subcommands:
//   cdf       analytic (and optionally empirical) cdf over a grid
//   density   joint eigenvalue density on a grid (n = 1) or at --at points
//   roc       exact ROC with optional closed-form/asymptotic/empirical columns
//   asym      fixed-c asymptotic ROC profile only
//   mc        empirical cdf from Monte Carlo trials, with KS distance
//   validate  self-check suite: consistency chain, KS tests, invariants
//
// Exit codes: 0 success, 2 parameter validation error, 3 numerical
// instability, 4 validation-suite check failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sfmax/cdf_exact.hpp"
#include "sfmax/config.hpp"
#include "sfmax/monte_carlo.hpp"
#include "sfmax/roc.hpp"

namespace {

constexpr const char* kArtifactVersion = "1.2.0";

using nlohmann::json;
using sfmax::SpikedFConfig;

// Shortest decimal string that parses back to exactly the same double, so
// output is bit-stable and free of trailing noise digits.
std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Grid syntax start:stop:count with inclusive endpoints.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) {
        throw std::invalid_argument("--grid expects start:stop:count, got '" +
                                    text + "'");
    }
    std::size_t used = 0;
    double start = 0.0, stop = 0.0;
    long count = 0;
    try {
        start = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("");
        stop = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("");
        count = std::stol(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("--grid expects numeric start:stop:count, got '" +
                                    text + "'");
    }
    if (count < 1) throw std::invalid_argument("--grid count must be >= 1");
    if (count == 1) {
        if (start != stop) {
            throw std::invalid_argument(
                "--grid with count 1 requires start == stop");
        }
        return {start};
    }
    if (!(stop > start)) {
        throw std::invalid_argument("--grid requires stop > start");
    }
    std::vector<double> g(count);
    for (long i = 0; i < count; ++i) {
        g[i] = start + (stop - start) * static_cast<double>(i) /
                           static_cast<double>(count - 1);
    }
    g.front() = start;
    g.back() = stop;
    return g;
}

// Default false-alarm grid for exact ROC tables: 101 log-spaced points in
// [1e-4, 1 - 1e-4], giving tail resolution on both ends of the curve.
std::vector<double> default_pf_grid() {
    const double lo = 1e-4, hi = 1.0 - 1e-4;
    const double llo = std::log(lo), lhi = std::log(hi);
    std::vector<double> g(101);
    for (int i = 0; i < 101; ++i) {
        g[i] = std::exp(llo + (lhi - llo) * i / 100.0);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

// Tabular result: named columns plus scalar footer metrics.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> footers;
};

void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        os << (c ? ", " : "") << t.columns[c];
    }
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            os << (c ? ", " : "") << format_double(row[c]);
        }
        os << "\n";
    }
    for (const auto& [name, value] : t.footers) {
        os << "# " << name << " = " << format_double(value) << "\n";
    }
}

void write_json(std::ostream& os, const Table& t, const json& metadata) {
    json cols = json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        json arr = json::array();
        for (const auto& row : t.rows) arr.push_back(row[c]);
        cols[t.columns[c]] = std::move(arr);
    }
    json out;
    out["columns"] = std::move(cols);
    json meta = metadata;
    for (const auto& [name, value] : t.footers) meta[name] = value;
    out["metadata"] = std::move(meta);
    os << out.dump(2) << "\n";
}

// Common output plumbing. A relative --output lands in $SFMAX_OUTPUT_DIR when
// that is set; otherwise paths resolve against the working directory.
struct OutputOpts {
    std::string format = "csv";
    std::string path;  // empty -> stdout
};

std::string resolve_output_path(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    const char* dir = std::getenv("SFMAX_OUTPUT_DIR");
    if (dir == nullptr || *dir == '\0') return path;
    std::string full(dir);
    if (full.back() != '/') full += '/';
    return full + path;
}

void emit(const Table& t, const OutputOpts& out, const json& metadata) {
    const std::string path = resolve_output_path(out.path);
    std::ofstream file;
    if (!path.empty()) {
        file.open(path);
        if (!file) {
            throw std::invalid_argument("cannot open output file '" + path + "'");
        }
    }
    std::ostream& os = path.empty() ? std::cout : file;
    if (out.format == "json") {
        write_json(os, t, metadata);
    } else {
        write_csv(os, t);
    }
    if (!path.empty() && !file) {
        throw std::invalid_argument("write to '" + path + "' failed");
    }
}

// Shared dimension / SNR / Monte Carlo flags.
struct ProblemOpts {
    long m = 0, n = 0, p = 0;
    double eta = 0.0;
    double snr_db = 0.0;
    bool has_eta = false, has_snr = false;
    std::string grid;
    long trials = 0;
    std::uint64_t seed = 0;
    int threads = 1;
};

void add_dimension_flags(CLI::App* cmd, ProblemOpts& o) {
    cmd->add_option("--m", o.m, "number of sensors")->required();
    cmd->add_option("--n", o.n, "signal-bearing snapshots (n < m)")->required();
    cmd->add_option("--p", o.p, "noise-only snapshots (p >= m)")->required();
}

void add_snr_flags(CLI::App* cmd, ProblemOpts& o) {
    auto* oe = cmd->add_option("--eta", o.eta, "spike SNR, linear scale");
    auto* os =
        cmd->add_option("--snr-db", o.snr_db, "spike SNR in dB (10 log10)");
    oe->excludes(os);
    os->excludes(oe);
}

void add_mc_flags(CLI::App* cmd, ProblemOpts& o) {
    cmd->add_option("--trials", o.trials, "Monte Carlo trials (0 = none)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--threads", o.threads, "worker thread cap")
        ->check(CLI::PositiveNumber);
}

void add_output_flags(CLI::App* cmd, OutputOpts& o) {
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--output", o.path,
                    "output file (relative paths honor $SFMAX_OUTPUT_DIR)");
}

// Resolves --eta / --snr-db; absent means eta = 0 (no spike).
double resolve_eta(const ProblemOpts& o, CLI::App* cmd) {
    if (cmd->count("--snr-db") > 0) return std::pow(10.0, o.snr_db / 10.0);
    if (cmd->count("--eta") > 0) return o.eta;
    return 0.0;
}

json base_metadata(const std::string& command, const ProblemOpts& o,
                   const OutputOpts& out) {
    json flags;
    flags["m"] = o.m;
    flags["n"] = o.n;
    flags["p"] = o.p;
    flags["eta"] = o.eta;
    flags["grid"] = o.grid;
    flags["trials"] = o.trials;
    flags["threads"] = o.threads;
    flags["format"] = out.format;
    if (!out.path.empty()) flags["output"] = out.path;
    json meta;
    meta["command"] = command;
    meta["version"] = kArtifactVersion;
    meta["seed"] = o.seed;
    meta["flags"] = std::move(flags);
    return meta;
}

// Wraps per-point evaluation failures with the offending abscissa.
template <typename F>
double eval_at(double x, const char* what, F&& f) {
    try {
        return f();
    } catch (const sfmax::numerical_instability_error& e) {
        std::ostringstream os;
        os << e.what() << " (while evaluating " << what
           << " at x = " << format_double(x) << ")";
        throw sfmax::numerical_instability_error(os.str());
    }
}

// ---------------------------------------------------------------- cdf

// Sample-rich reference curve for n >= m with p = m:
//   F0(x) = (x/(1+x))^{mn} / (1 + eta/(1+x))^n.
// Only a comparison curve for figures; the library proper covers n < m.
int cmd_cdf_reference(CLI::App* cmd, ProblemOpts& o, OutputOpts& out) {
    o.eta = resolve_eta(o, cmd);
    if (o.m < 1 || o.n < o.m) {
        throw std::invalid_argument(
            "--reference-nondeficient is the sample-rich reference curve and "
            "needs n >= m >= 1");
    }
    if (o.trials > 0) {
        throw std::invalid_argument(
            "--reference-nondeficient has no Monte Carlo path");
    }
    Table t;
    t.columns = {"x", "cdf_analytic"};
    for (double x : parse_grid(o.grid)) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("cdf grid values must be finite and >= 0");
        }
        const double y = x / (1.0 + x);
        const double v = std::pow(y, static_cast<double>(o.m * o.n)) /
                         std::pow(1.0 + o.eta / (1.0 + x),
                                  static_cast<double>(o.n));
        t.rows.push_back({x, v});
    }
    json meta = base_metadata("cdf", o, out);
    meta["flags"]["reference-nondeficient"] = true;
    emit(t, out, meta);
    return 0;
}

int cmd_cdf(CLI::App* cmd, ProblemOpts& o, OutputOpts& out) {
    o.eta = resolve_eta(o, cmd);
    SpikedFConfig cfg{o.m, o.n, o.p, o.eta};
    if (o.eta > 0.0) {
        cfg.validate_spiked();
    } else {
        cfg.validate();
    }
    const std::vector<double> grid = parse_grid(o.grid);

    Table t;
    t.columns = {"x", "cdf_analytic"};
    std::optional<sfmax::mc::EmpiricalCdf> ecdf;
    if (o.trials > 0) {
        t.columns.push_back("cdf_empirical");
        const auto hyp = o.eta > 0.0 ? sfmax::mc::Hypothesis::H1
                                     : sfmax::mc::Hypothesis::H0;
        ecdf = sfmax::mc::empirical_cdf(cfg, hyp, o.trials, {o.seed, 0},
                                        o.threads);
    }
    const double kappa = static_cast<double>(o.n) / static_cast<double>(o.p);
    for (double x : grid) {
        const double a = eval_at(x, "cdf", [&] {
            return o.eta > 0.0 ? sfmax::cdf::cdf_max_spiked(x, cfg).value()
                               : sfmax::cdf::cdf_max_null(x, cfg).value();
        });
        if (ecdf) {
            // samples live on the detector scale (p/n) * lambda
            t.rows.push_back({x, a, ecdf->at(x / kappa)});
        } else {
            t.rows.push_back({x, a});
        }
    }
    emit(t, out, base_metadata("cdf", o, out));
    return 0;
}

// ---------------------------------------------------------------- density

int cmd_density(CLI::App* cmd, ProblemOpts& o, OutputOpts& out,
                const std::vector<std::string>& at_points) {
    o.eta = resolve_eta(o, cmd);
    SpikedFConfig cfg{o.m, o.n, o.p, o.eta};
    if (o.eta > 0.0) {
        cfg.validate_spiked();
    } else {
        cfg.validate();
    }
    auto density = [&](const std::vector<double>& ls) {
        return o.eta > 0.0 ? sfmax::cdf::joint_density_spiked(ls, cfg)
                           : sfmax::cdf::joint_density_null(ls, cfg);
    };

    Table t;
    if (!at_points.empty()) {
        for (long k = 1; k <= o.n; ++k) {
            t.columns.push_back("x" + std::to_string(k));
        }
        t.columns.push_back("density");
        for (const std::string& spec : at_points) {
            std::vector<double> ls;
            std::stringstream ss(spec);
            std::string item;
            while (std::getline(ss, item, ',')) {
                std::size_t used = 0;
                ls.push_back(std::stod(item, &used));
                if (used != item.size()) {
                    throw std::invalid_argument("--at expects comma-separated "
                                                "numbers, got '" + spec + "'");
                }
            }
            if (static_cast<long>(ls.size()) != o.n) {
                throw std::invalid_argument(
                    "--at point needs exactly n = " + std::to_string(o.n) +
                    " ascending eigenvalues, got " + std::to_string(ls.size()));
            }
            std::vector<double> row = ls;
            row.push_back(eval_at(ls.front(), "density",
                                  [&] { return density(ls); }));
            t.rows.push_back(std::move(row));
        }
    } else {
        if (o.n != 1) {
            throw std::invalid_argument(
                "density over a grid needs n = 1; use --at x1,...,xn for the "
                "joint density of n > 1 eigenvalues");
        }
        if (o.grid.empty()) {
            throw std::invalid_argument("density needs --grid or --at");
        }
        t.columns = {"x", "density"};
        for (double x : parse_grid(o.grid)) {
            t.rows.push_back(
                {x, eval_at(x, "density", [&] { return density({x}); })});
        }
    }
    emit(t, out, base_metadata("density", o, out));
    return 0;
}

// ---------------------------------------------------------------- roc / asym

struct RocOpts {
    bool asym_mode = false;
    bool gamma_eq_m = false;
    bool with_closed = false;
    bool with_asym = false;
    bool with_bound = false;
    double c = 0.0;
};

int run_asym_table(const ProblemOpts& o, const RocOpts& r, OutputOpts& out,
                   const std::string& command) {
    const long n = o.n >= 1 ? o.n : 1;
    sfmax::roc::AsymptoticRegime regime{r.c, n};
    std::vector<double> grid;
    if (!o.grid.empty()) {
        grid = parse_grid(o.grid);
    } else {
        // closed form is finite at pf = 0, so the default grid keeps the
        // chance-line anchor ahead of the log-spaced body
        grid.push_back(0.0);
        for (double pf : default_pf_grid()) grid.push_back(pf);
    }
    Table t;
    t.columns = {"pf", "pd_asymptotic"};
    if (r.with_bound) t.columns.push_back("pd_upper_bound");
    for (double pf : grid) {
        std::vector<double> row{pf, sfmax::roc::roc_asymptotic(regime, pf)};
        if (r.with_bound) {
            row.push_back(sfmax::roc::roc_asymptotic_upper_bound(r.c, pf));
        }
        t.rows.push_back(std::move(row));
    }
    json meta = base_metadata(command, o, out);
    meta["flags"]["c"] = r.c;
    emit(t, out, meta);
    return 0;
}

int cmd_roc(CLI::App* cmd, ProblemOpts& o, RocOpts& r, OutputOpts& out) {
    if (r.asym_mode) {
        if (cmd->count("--c") == 0) {
            throw std::invalid_argument("roc --asym requires --c");
        }
        return run_asym_table(o, r, out, "roc");
    }
    if (cmd->count("--m") == 0 || cmd->count("--n") == 0 ||
        cmd->count("--p") == 0) {
        throw std::invalid_argument("roc requires --m, --n and --p");
    }
    double gamma = resolve_eta(o, cmd);
    if (r.gamma_eq_m) {
        if (gamma > 0.0) {
            throw std::invalid_argument(
                "--gamma-eq-m conflicts with --eta/--snr-db");
        }
        gamma = static_cast<double>(o.m);
    }
    if (gamma <= 0.0) {
        throw std::invalid_argument(
            "roc needs a positive SNR: --eta, --snr-db or --gamma-eq-m");
    }
    o.eta = gamma;
    SpikedFConfig cfg{o.m, o.n, o.p, gamma};
    cfg.validate_spiked();
    const auto det = sfmax::roc::DetectorConfig::make(cfg);
    const std::vector<double> grid =
        o.grid.empty() ? default_pf_grid() : parse_grid(o.grid);

    if (r.with_closed && o.p != o.m) {
        throw std::invalid_argument(
            "--with-closed needs p == m (closed forms cover that corner)");
    }
    const double c_equiv =
        static_cast<double>(o.p - o.m + 1) * gamma / static_cast<double>(o.m);
    sfmax::roc::AsymptoticRegime regime{c_equiv, o.n};

    Table t;
    t.columns = {"pf", "pd_exact"};
    if (r.with_closed) t.columns.push_back("pd_closed_form");
    if (r.with_asym) t.columns.push_back("pd_asymptotic");
    if (r.with_bound) t.columns.push_back("pd_upper_bound");
    std::optional<std::vector<sfmax::roc::RocPoint>> empirical;
    if (o.trials > 0) {
        t.columns.push_back("pd_empirical");
        empirical = sfmax::mc::empirical_roc(cfg, gamma, o.trials, grid,
                                             {o.seed, 0}, o.threads);
    }

    const auto exact = sfmax::roc::roc_exact(gamma, det, grid);
    double max_gap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double pf = grid[i];
        std::vector<double> row{pf, exact[i].pd};
        if (r.with_closed) {
            row.push_back(o.n == 1
                              ? sfmax::roc::roc_n1_closed_form(gamma, o.m, pf)
                              : sfmax::roc::roc_alpha0_closed_form(gamma, o.m,
                                                                   o.n, pf));
        }
        if (r.with_asym) {
            const double pd_asy = sfmax::roc::roc_asymptotic(regime, pf);
            max_gap = std::max(max_gap, std::fabs(exact[i].pd - pd_asy));
            row.push_back(pd_asy);
        }
        if (r.with_bound) {
            row.push_back(sfmax::roc::roc_asymptotic_upper_bound(c_equiv, pf));
        }
        if (empirical) row.push_back((*empirical)[i].pd);
        t.rows.push_back(std::move(row));
    }
    if (r.with_asym) t.footers.emplace_back("max_gap_exact_asymptotic", max_gap);

    json meta = base_metadata("roc", o, out);
    meta["flags"]["gamma"] = gamma;
    if (r.with_asym || r.with_bound) meta["flags"]["c"] = c_equiv;
    emit(t, out, meta);
    return 0;
}

// ---------------------------------------------------------------- mc

int cmd_mc(CLI::App* cmd, ProblemOpts& o, OutputOpts& out) {
    o.eta = resolve_eta(o, cmd);
    SpikedFConfig cfg{o.m, o.n, o.p, o.eta};
    if (o.eta > 0.0) {
        cfg.validate_spiked();
    } else {
        cfg.validate();
    }
    if (o.trials < 1) throw std::invalid_argument("mc requires --trials >= 1");
    const std::vector<double> grid = parse_grid(o.grid);
    const auto hyp =
        o.eta > 0.0 ? sfmax::mc::Hypothesis::H1 : sfmax::mc::Hypothesis::H0;
    const auto ecdf =
        sfmax::mc::empirical_cdf(cfg, hyp, o.trials, {o.seed, 0}, o.threads);
    const double kappa = static_cast<double>(o.n) / static_cast<double>(o.p);
    auto analytic = [&](double lambda_hat) {
        const double x = kappa * lambda_hat;
        return o.eta > 0.0 ? sfmax::cdf::cdf_max_spiked(x, cfg).value()
                           : sfmax::cdf::cdf_max_null(x, cfg).value();
    };

    Table t;
    t.columns = {"x", "cdf_empirical", "cdf_analytic"};
    for (double x : grid) {
        const double a = eval_at(x, "cdf", [&] {
            return o.eta > 0.0 ? sfmax::cdf::cdf_max_spiked(x, cfg).value()
                               : sfmax::cdf::cdf_max_null(x, cfg).value();
        });
        t.rows.push_back({x, ecdf.at(x / kappa), a});
    }
    t.footers.emplace_back("ks_distance", sfmax::mc::ks_distance(ecdf, analytic));
    emit(t, out, base_metadata("mc", o, out));
    return 0;
}

// ---------------------------------------------------------------- validate

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

class CheckRunner {
  public:
    void run(const std::string& name, const std::function<std::string()>& body) {
        CheckResult r;
        r.name = name;
        try {
            r.detail = body();
            r.pass = true;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = e.what();
        }
        results_.push_back(std::move(r));
    }

    const std::vector<CheckResult>& results() const { return results_; }
    bool all_pass() const {
        for (const auto& r : results_) {
            if (!r.pass) return false;
        }
        return true;
    }

  private:
    std::vector<CheckResult> results_;
};

// Throwing assertion helpers for validate checks.
void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

std::string max_abs_gap_detail(double gap, double tol) {
    require(gap <= tol, "max gap " + format_double(gap) + " exceeds " +
                            format_double(tol));
    return "max gap " + format_double(gap);
}

int cmd_validate(ProblemOpts& o, OutputOpts& out, bool quick,
                 bool inject_failure) {
    using namespace sfmax;
    CheckRunner checks;
    const long ks_trials = o.trials > 0 ? o.trials : (quick ? 4000 : 20000);

    checks.run("threshold-roundtrip", [&] {
        double worst = 0.0;
        for (const SpikedFConfig cfg :
             {SpikedFConfig{8, 5, 8, 1.0}, SpikedFConfig{12, 7, 15, 1.0}}) {
            const auto det = roc::DetectorConfig::make(cfg);
            for (double level : {0.05, 0.5, 0.9}) {
                const double th = roc::threshold_for_pfa(level, det);
                worst = std::max(worst,
                                 std::fabs(roc::p_false_alarm(th, det) - level));
            }
        }
        return max_abs_gap_detail(worst, 1e-10);
    });

    checks.run("threshold-closed-inverse", [&] {
        // p = m: the null cdf is y^{mn}, so the 0.05-level threshold solves
        // kappa * th = u / (1 - u) with u = 0.95^{1/(mn)}
        const SpikedFConfig cfg{8, 5, 8, 1.0};
        const auto det = roc::DetectorConfig::make(cfg);
        const double th = roc::threshold_for_pfa(0.05, det);
        const double u = std::pow(0.95, 1.0 / (8.0 * 5.0));
        const double want = (u / (1.0 - u)) / det.kappa;
        return max_abs_gap_detail(std::fabs(th - want) / want, 1e-9);
    });

    checks.run("closed-form-chain-alpha0", [&] {
        const SpikedFConfig cfg{8, 5, 8, 10.0};
        const auto det = roc::DetectorConfig::make(cfg);
        const auto grid = default_pf_grid();
        const auto exact = roc::roc_exact(10.0, det, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double closed =
                roc::roc_alpha0_closed_form(10.0, 8, 5, grid[i]);
            worst = std::max(worst, std::fabs(exact[i].pd - closed));
        }
        return max_abs_gap_detail(worst, 1e-9);
    });

    checks.run("closed-form-chain-n1", [&] {
        const SpikedFConfig cfg{6, 1, 6, 10.0};
        const auto det = roc::DetectorConfig::make(cfg);
        const auto grid = default_pf_grid();
        const auto exact = roc::roc_exact(10.0, det, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double n1 = roc::roc_n1_closed_form(10.0, 6, grid[i]);
            const double a0 = roc::roc_alpha0_closed_form(10.0, 6, 1, grid[i]);
            worst = std::max(worst, std::fabs(exact[i].pd - n1));
            worst = std::max(worst, std::fabs(n1 - a0));
        }
        return max_abs_gap_detail(worst, 1e-9);
    });

    checks.run("cdf-monotone", [&] {
        const SpikedFConfig cfg{10, 5, 15, 10.0};
        double prev_s = -1.0, prev_n = -1.0;
        for (int i = 0; i <= 60; ++i) {
            const double x = 0.1 * i;
            const double s = cdf::cdf_max_spiked(x, cfg).value();
            const double nu = cdf::cdf_max_null(x, cfg).value();
            require(s >= prev_s - 1e-9, "spiked cdf decreased at x = " +
                                            format_double(x));
            require(nu >= prev_n - 1e-9, "null cdf decreased at x = " +
                                             format_double(x));
            prev_s = s;
            prev_n = nu;
        }
        return std::string("61-point grid nondecreasing");
    });

    checks.run("cdf-upper-limit", [&] {
        double worst = 0.0;
        for (const SpikedFConfig cfg :
             {SpikedFConfig{4, 2, 5, 1.0}, SpikedFConfig{10, 7, 15, 100.0}}) {
            worst = std::max(worst,
                             1.0 - cdf::cdf_max_spiked(1e8, cfg).value());
            worst = std::max(worst, 1.0 - cdf::cdf_max_null(1e8, cfg).value());
        }
        return max_abs_gap_detail(worst, 1e-6);
    });

    checks.run("null-continuity-small-eta", [&] {
        double worst = 0.0;
        for (const SpikedFConfig base :
             {SpikedFConfig{4, 2, 5, 0.0}, SpikedFConfig{6, 3, 6, 0.0},
              SpikedFConfig{10, 5, 15, 0.0}}) {
            SpikedFConfig spiked = base;
            spiked.eta = 1e-6;
            for (double x : {0.3, 0.8, 1.5, 3.0}) {
                worst = std::max(
                    worst, std::fabs(cdf::cdf_max_spiked(x, spiked).value() -
                                     cdf::cdf_max_null(x, base).value()));
            }
        }
        return max_abs_gap_detail(worst, 1e-4);
    });

    if (!quick) {
        checks.run("ks-null", [&] {
            const SpikedFConfig cfg{8, 5, 10, 0.0};
            const auto ecdf = mc::empirical_cdf(cfg, mc::Hypothesis::H0,
                                                ks_trials, {o.seed, 11},
                                                o.threads);
            const double kappa = 0.5;
            const double ks = mc::ks_distance(ecdf, [&](double lh) {
                return cdf::cdf_max_null(kappa * lh, cfg).value();
            });
            const double crit = 1.63 / std::sqrt(static_cast<double>(ks_trials));
            require(ks < crit, "KS " + format_double(ks) + " >= 1% critical " +
                                   format_double(crit));
            return "KS " + format_double(ks) + " < " + format_double(crit);
        });
    }

    checks.run("ks-spiked", [&] {
        const SpikedFConfig cfg{10, 5, 15, 10.0};
        const long trials = quick ? ks_trials / 2 : ks_trials;
        const auto ecdf = mc::empirical_cdf(cfg, mc::Hypothesis::H1, trials,
                                            {o.seed, 12}, o.threads);
        const double kappa = 1.0 / 3.0;
        const double ks = mc::ks_distance(ecdf, [&](double lh) {
            return cdf::cdf_max_spiked(kappa * lh, cfg).value();
        });
        const double crit = 1.63 / std::sqrt(static_cast<double>(trials));
        require(ks < crit, "KS " + format_double(ks) + " >= 1% critical " +
                               format_double(crit));
        return "KS " + format_double(ks) + " < " + format_double(crit);
    });

    if (inject_failure) {
        checks.run("injected-failure", [&]() -> std::string {
            throw std::runtime_error("failure injected for exit-path testing");
        });
    }

    const std::string path = resolve_output_path(out.path);
    std::ofstream file;
    if (!path.empty()) file.open(path);
    std::ostream& os = path.empty() ? std::cout : file;
    if (out.format == "json") {
        json arr = json::array();
        for (const auto& r : checks.results()) {
            arr.push_back({{"name", r.name},
                           {"pass", r.pass},
                           {"detail", r.detail}});
        }
        json doc;
        doc["checks"] = std::move(arr);
        doc["all_pass"] = checks.all_pass();
        doc["metadata"] = {{"command", "validate"},
                           {"version", kArtifactVersion},
                           {"seed", o.seed},
                           {"quick", quick}};
        os << doc.dump(2) << "\n";
    } else {
        for (const auto& r : checks.results()) {
            os << (r.pass ? "PASS" : "FAIL") << " " << r.name << " ("
               << r.detail << ")\n";
        }
        os << (checks.all_pass() ? "ALL CHECKS PASSED" : "CHECKS FAILED")
           << "\n";
    }
    return checks.all_pass() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "largest-root statistics of the rank-one-spiked two-sample problem"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);

    ProblemOpts cdf_o, den_o, roc_o, asym_o, mc_o, val_o;
    OutputOpts cdf_out, den_out, roc_out, asym_out, mc_out, val_out;
    RocOpts roc_r, asym_r;
    std::vector<std::string> den_at;
    bool val_quick = false, val_inject = false;

    auto* c_cdf = app.add_subcommand("cdf", "analytic cdf over a grid");
    c_cdf->add_option("--m", cdf_o.m, "number of sensors")->required();
    c_cdf->add_option("--n", cdf_o.n, "signal-bearing snapshots (n < m)")
        ->required();
    c_cdf->add_option("--p", cdf_o.p, "noise-only snapshots (p >= m)");
    add_snr_flags(c_cdf, cdf_o);
    add_mc_flags(c_cdf, cdf_o);
    add_output_flags(c_cdf, cdf_out);
    c_cdf->add_option("--grid", cdf_o.grid, "x grid start:stop:count")
        ->required();
    bool cdf_reference = false;
    c_cdf->add_flag("--reference-nondeficient", cdf_reference,
                    "sample-rich reference curve (needs n >= m, ignores --p)");

    auto* c_den = app.add_subcommand("density", "joint eigenvalue density");
    add_dimension_flags(c_den, den_o);
    add_snr_flags(c_den, den_o);
    add_output_flags(c_den, den_out);
    c_den->add_option("--grid", den_o.grid, "x grid (n = 1 only)");
    c_den->add_option("--at", den_at,
                      "evaluation point x1,...,xn (repeatable, ascending)");

    auto* c_roc = app.add_subcommand("roc", "receiver operating characteristic");
    c_roc->add_option("--m", roc_o.m, "number of sensors");
    c_roc->add_option("--n", roc_o.n, "signal-bearing snapshots");
    c_roc->add_option("--p", roc_o.p, "noise-only snapshots");
    add_snr_flags(c_roc, roc_o);
    add_mc_flags(c_roc, roc_o);
    add_output_flags(c_roc, roc_out);
    c_roc->add_option("--grid", roc_o.grid, "false-alarm grid start:stop:count");
    c_roc->add_flag("--asym", roc_r.asym_mode,
                    "asymptotic profile only (needs --c, uses --n)");
    c_roc->add_option("--c", roc_r.c, "fixed-c regime parameter")
        ->check(CLI::NonNegativeNumber);
    c_roc->add_flag("--gamma-eq-m", roc_r.gamma_eq_m, "set SNR gamma = m");
    c_roc->add_flag("--with-closed", roc_r.with_closed,
                    "add the p = m closed-form column");
    c_roc->add_flag("--with-asym", roc_r.with_asym,
                    "add the asymptotic column and max-gap footer");
    c_roc->add_flag("--with-bound", roc_r.with_bound,
                    "add the asymptotic upper-bound column");

    auto* c_asym = app.add_subcommand("asym", "asymptotic ROC profile");
    c_asym->add_option("--c", asym_r.c, "fixed-c regime parameter")
        ->required()
        ->check(CLI::NonNegativeNumber);
    c_asym->add_option("--n", asym_o.n, "signal-bearing snapshots")
        ->check(CLI::PositiveNumber);
    c_asym->add_option("--grid", asym_o.grid, "false-alarm grid");
    c_asym->add_flag("--with-bound", asym_r.with_bound,
                     "add the upper-bound column");
    add_output_flags(c_asym, asym_out);

    auto* c_mc = app.add_subcommand("mc", "empirical cdf from Monte Carlo");
    add_dimension_flags(c_mc, mc_o);
    add_snr_flags(c_mc, mc_o);
    add_mc_flags(c_mc, mc_o);
    add_output_flags(c_mc, mc_out);
    c_mc->add_option("--grid", mc_o.grid, "x grid start:stop:count")
        ->required();

    auto* c_val = app.add_subcommand("validate", "run the self-check suite");
    c_val->add_flag("--quick", val_quick, "subset completing under a minute");
    c_val->add_flag("--inject-failure", val_inject, "")->group("");  // hidden
    add_mc_flags(c_val, val_o);
    add_output_flags(c_val, val_out);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(c_cdf)) {
            if (cdf_reference) return cmd_cdf_reference(c_cdf, cdf_o, cdf_out);
            if (c_cdf->count("--p") == 0) {
                throw std::invalid_argument("cdf requires --p");
            }
            return cmd_cdf(c_cdf, cdf_o, cdf_out);
        }
        if (app.got_subcommand(c_den)) {
            return cmd_density(c_den, den_o, den_out, den_at);
        }
        if (app.got_subcommand(c_roc)) {
            return cmd_roc(c_roc, roc_o, roc_r, roc_out);
        }
        if (app.got_subcommand(c_asym)) {
            asym_r.asym_mode = true;
            if (asym_o.n < 1) asym_o.n = 1;
            return run_asym_table(asym_o, asym_r, asym_out, "asym");
        }
        if (app.got_subcommand(c_mc)) return cmd_mc(c_mc, mc_o, mc_out);
        if (app.got_subcommand(c_val)) {
            return cmd_validate(val_o, val_out, val_quick, val_inject);
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const sfmax::numerical_instability_error& e) {
        std::cerr << "numerical instability: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
