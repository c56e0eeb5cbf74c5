#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mallows/bridge.hpp"
#include "mallows/distance.hpp"
#include "mallows/distribution.hpp"
#include "mallows/empirical.hpp"
#include "mallows/errors.hpp"
#include "mallows/parse.hpp"
#include "mallows/rng.hpp"
#include "mallows/stats.hpp"
#include "mallows/step_distribution.hpp"

// Experiment orchestration: convergence-rate studies of d_r(empirical, model)
// over an n grid, normalized-sample comparison against the simulated limit
// law, tail-integral traces, and deterministic report emission. Reports are
// byte-identical for a fixed (config, seed) regardless of thread count: every
// replication owns a derived stream and a preallocated output slot, and all
// reductions run in fixed order after the parallel phase.

namespace mallows {

inline constexpr const char* kVersionString = "0.1.0";

struct StudyConfig {
    std::string model = "uniform()";
    double r = 2.0;
    std::vector<std::size_t> n_grid = {64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384};
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
    std::optional<double> alpha;  // normalization exponent; unset: 1/2 continuous, 1/(2r) discrete
    std::size_t grid_size = 4097;  // limit-law bridge grid (continuous models)
    std::string out;               // output path; empty means stdout
    std::string format = "json";   // json | csv
    std::size_t threads = 1;
};

namespace study_detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline double parse_double(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config key '" + key + "': trailing characters in '" + v + "'");
    return x;
}

inline std::uint64_t parse_uint(const std::string& v, const std::string& key) {
    if (v.empty() || v[0] == '-')
        throw std::invalid_argument("config key '" + key + "': expected a nonnegative integer, got '" + v + "'");
    std::size_t used = 0;
    std::uint64_t x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not an integer: '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config key '" + key + "': trailing characters in '" + v + "'");
    return x;
}

inline std::vector<std::size_t> parse_grid(const std::string& v, const std::string& key) {
    std::vector<std::size_t> grid;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const std::size_t comma = std::min(v.find(',', pos), v.size());
        const std::string item = trim(std::string_view(v).substr(pos, comma - pos));
        if (item.empty()) throw std::invalid_argument("config key '" + key + "': empty list item");
        grid.push_back(static_cast<std::size_t>(parse_uint(item, key)));
        pos = comma + 1;
        if (comma == v.size()) break;
    }
    return grid;
}

}  // namespace study_detail

// Flat key = value text. '#' starts a comment, blank lines are skipped,
// keys are exactly: model, r, n_grid, reps, seed, alpha, grid_size, out,
// format, threads. n_grid is comma-separated.
inline StudyConfig parse_config_text(std::string_view text) {
    StudyConfig cfg;
    std::vector<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = study_detail::trim(line);
        if (line.empty()) {
            if (nl == text.size()) break;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = study_detail::trim(std::string_view(line).substr(0, eq));
        const std::string val = study_detail::trim(std::string_view(line).substr(eq + 1));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": duplicate key '" + key + "'");
        seen.push_back(key);
        if (key == "model") cfg.model = val;
        else if (key == "r") cfg.r = study_detail::parse_double(val, key);
        else if (key == "n_grid") cfg.n_grid = study_detail::parse_grid(val, key);
        else if (key == "reps") cfg.reps = static_cast<std::size_t>(study_detail::parse_uint(val, key));
        else if (key == "seed") cfg.seed = study_detail::parse_uint(val, key);
        else if (key == "alpha") cfg.alpha = study_detail::parse_double(val, key);
        else if (key == "grid_size") cfg.grid_size = static_cast<std::size_t>(study_detail::parse_uint(val, key));
        else if (key == "out") cfg.out = val;
        else if (key == "format") cfg.format = val;
        else if (key == "threads") cfg.threads = static_cast<std::size_t>(study_detail::parse_uint(val, key));
        else
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        if (nl == text.size()) break;
    }
    return cfg;
}

inline StudyConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

inline void validate_config(const StudyConfig& cfg) {
    if (cfg.n_grid.size() < 3)
        throw std::invalid_argument("config: n_grid needs at least 3 points for slope fitting");
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        if (cfg.n_grid[i] < 1) throw std::invalid_argument("config: n values must be positive");
        if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw std::invalid_argument("config: n_grid must be strictly increasing");
    }
    if (cfg.reps < 100) throw std::invalid_argument("config: reps must be at least 100");
    if (!(cfg.r >= 1.0)) throw std::invalid_argument("config: r must be >= 1");
    if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha < 1.0))
        throw std::invalid_argument("config: alpha must lie in (0,1)");
    if (cfg.grid_size < 3) throw std::invalid_argument("config: grid_size must be at least 3");
    if (cfg.format != "json" && cfg.format != "csv")
        throw std::invalid_argument("config: format must be json or csv");
    if (cfg.threads < 1) throw std::invalid_argument("config: threads must be at least 1");
    parse_distribution(cfg.model);  // surfaces grammar errors before any work
}

namespace study_detail {

inline void append_num(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += buf;
}

// Semantic identity of a study: everything that changes the numbers, and
// nothing that does not (out, format, threads are excluded).
inline std::string canonical_config(const StudyConfig& cfg) {
    std::string s = "model=" + cfg.model + "\nr=";
    append_num(s, cfg.r);
    s += "\nn_grid=";
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i)
        s += (i ? "," : "") + std::to_string(cfg.n_grid[i]);
    s += "\nreps=" + std::to_string(cfg.reps);
    s += "\nseed=" + std::to_string(cfg.seed);
    s += "\nalpha=";
    if (cfg.alpha) append_num(s, *cfg.alpha);
    else s += "default";
    s += "\ngrid_size=" + std::to_string(cfg.grid_size);
    s += "\n";
    return s;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace study_detail

inline std::uint64_t config_hash(const StudyConfig& cfg) {
    return study_detail::fnv1a(study_detail::canonical_config(cfg));
}

// n times the squared-difference quantile integrals over the two edge cells
// (0, 1/n) and ((n-1)/n, 1): the extreme order statistic against the model
// quantile. These are the pieces whose vanishing licenses the square-root
// rate for continuous models.
inline std::pair<double, double> tail_edge_integrals(const EmpiricalDistribution& emp,
                                                     const AnyDistribution& F) {
    const std::size_t n = emp.size();
    const double nd = static_cast<double>(n);
    const double p_lo = 1.0 / nd;
    const double p_hi = (nd - 1.0) / nd;
    const double c_lo = emp.order_statistic(1);
    const double c_hi = emp.order_statistic(n);

    if (is_continuous(F)) {
        const auto& m = std::get<DistributionModel>(F);
        double lo = 0.0, hi = 0.0;
        if (m.has_partial_moments()) {
            double m1a = 0.0, m2a = 0.0, m1b = 0.0, m2b = 0.0, m1t = 0.0, m2t = 0.0;
            m.partial_moments(p_lo, m1a, m2a);
            lo = c_lo * c_lo * p_lo - 2.0 * c_lo * m1a + m2a;
            m.partial_moments(p_hi, m1b, m2b);
            m.partial_moments(1.0, m1t, m2t);
            hi = c_hi * c_hi * (1.0 - p_hi) - 2.0 * c_hi * (m1t - m1b) + (m2t - m2b);
        } else {
            lo = distance_detail::cell_against_model(m, 0.0, p_lo, c_lo, 2.0, 1e-9).value;
            hi = distance_detail::cell_against_model(m, p_hi, 1.0, c_hi, 2.0, 1e-9).value;
        }
        return {nd * std::max(lo, 0.0), nd * std::max(hi, 0.0)};
    }

    // Step model: the quantile is piecewise constant at the atoms, so both
    // edge integrals are exact finite sums over the cumulative sub-partition.
    const auto& s = std::get<StepDistribution>(F);
    const auto atoms = s.atoms();
    const auto cum = s.cumulative();
    double lo = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < atoms.size() && prev < p_lo; ++j) {
        const double b = std::min(cum[j], p_lo);
        if (b > prev) {
            const double d = c_lo - atoms[j];
            lo += (b - prev) * d * d;
            prev = b;
        }
    }
    double hi = 0.0;
    prev = p_hi;
    for (std::size_t j = 0; j < atoms.size() && prev < 1.0; ++j) {
        if (cum[j] <= prev) continue;
        const double d = c_hi - atoms[j];
        hi += (cum[j] - prev) * d * d;
        prev = cum[j];
    }
    return {nd * lo, nd * hi};
}

namespace study_detail {

// Runs fn(i) for i in [0, count) on up to `threads` workers over contiguous
// blocks. Work items must write only to their own slots; the first exception
// (if any) is rethrown on the caller.
template <class Fn>
inline void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex mu;
    std::exception_ptr first;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = count * w / workers;
        const std::size_t hi = count * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(mu);
                if (!first) first = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

inline std::vector<double> draw_sample(const AnyDistribution& F, std::size_t n,
                                       RandomStream& rng) {
    return std::visit([&](const auto& law) { return law.sample(n, rng); }, F);
}

inline double distance_to(const EmpiricalDistribution& emp, const AnyDistribution& F, double r) {
    return std::visit([&](const auto& law) { return distance(emp, law, r).value; }, F);
}

}  // namespace study_detail

struct TailTraceRow {
    std::size_t n = 0;
    double low_median = 0.0;
    double low_p90 = 0.0;
    double high_median = 0.0;
    double high_p90 = 0.0;
};

struct TailTraceReport {
    std::string model;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<TailTraceRow> rows;
};

// Monte Carlo trace of the two edge-cell integrals per n. Medians and 90th
// percentiles are reported; the downward trend is for the reader, not an
// assertion (a stochastic limit is not a finite-sample predicate).
inline TailTraceReport run_tail_trace(const AnyDistribution& F,
                                      std::span<const std::size_t> n_grid, std::size_t reps,
                                      std::uint64_t seed, std::size_t threads = 1) {
    if (n_grid.empty()) throw std::invalid_argument("run_tail_trace: empty n grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("run_tail_trace: n grid must be strictly increasing");
    if (reps == 0) throw std::invalid_argument("run_tail_trace: reps must be positive");
    if (is_continuous(F)) {
        const auto& m = std::get<DistributionModel>(F);
        if (m.max_finite_moment_order() <= 2.0)
            throw divergent_moment_error("run_tail_trace: second moment of " + m.describe() +
                                         " diverges");
    }
    TailTraceReport rep;
    rep.model = describe(F);
    rep.reps = reps;
    rep.seed = seed;
    std::vector<double> lo(reps), hi(reps);
    for (std::size_t in = 0; in < n_grid.size(); ++in) {
        const std::size_t n = n_grid[in];
        study_detail::parallel_for(reps, threads, [&](std::size_t k) {
            RandomStream rs = derive_stream(seed, {3, in, k});
            EmpiricalDistribution emp(study_detail::draw_sample(F, n, rs));
            const auto [a, b] = tail_edge_integrals(emp, F);
            lo[k] = a;
            hi[k] = b;
        });
        std::vector<double> ls = lo, hs = hi;
        std::sort(ls.begin(), ls.end());
        std::sort(hs.begin(), hs.end());
        TailTraceRow row;
        row.n = n;
        row.low_median = stats::sorted_quantile(ls, 0.5);
        row.low_p90 = stats::sorted_quantile(ls, 0.9);
        row.high_median = stats::sorted_quantile(hs, 0.5);
        row.high_p90 = stats::sorted_quantile(hs, 0.9);
        rep.rows.push_back(row);
    }
    return rep;
}

struct SlopeBlock {
    bool available = false;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

struct LimitBlock {
    bool available = false;
    std::string kind = "none";  // continuous | discrete | none
    std::size_t draws = 0;
    double ks = 0.0;
    double d2 = 0.0;
    std::string note;
};

struct PerNStats {
    std::size_t n = 0;
    stats::Summary d;           // of d_r(empirical, model)
    stats::Summary normalized;  // of n^alpha d_r
    double tail_low_median = 0.0;
    double tail_low_p90 = 0.0;
    double tail_high_median = 0.0;
    double tail_high_p90 = 0.0;
};

struct Provenance {
    std::string config_hash_hex;
    std::uint64_t seed = 0;
    std::string version;
};

struct StudyReport {
    StudyConfig config;  // out/format/threads are not part of the report
    Provenance provenance;
    std::string model_kind;  // continuous | discrete
    double alpha = 0.0;      // resolved normalization exponent
    std::vector<PerNStats> per_n;
    SlopeBlock slope_log_mean;
    SlopeBlock slope_log_median;
    LimitBlock limit;
};

namespace study_detail {

inline SlopeBlock fit_slope(std::span<const double> log_n, const std::vector<double>& values) {
    SlopeBlock blk;
    std::vector<double> log_v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) return blk;  // log undefined: fit unavailable
        log_v[i] = std::log(values[i]);
    }
    const stats::LineFit f = stats::fit_line(log_n, log_v);
    blk.available = true;
    blk.slope = f.slope;
    blk.intercept = f.intercept;
    blk.slope_stderr = f.slope_stderr;
    return blk;
}

}  // namespace study_detail

inline StudyReport run_convergence_study(const StudyConfig& cfg) {
    validate_config(cfg);
    const AnyDistribution F = parse_distribution(cfg.model);
    const bool cont = is_continuous(F);
    if (cont) {
        const auto& m = std::get<DistributionModel>(F);
        if (cfg.r >= m.max_finite_moment_order())
            throw divergent_moment_error("study: order " + std::to_string(cfg.r) +
                                         " coupling distance diverges for " + m.describe());
    }

    StudyReport rep;
    rep.config = cfg;
    rep.config.out.clear();
    rep.config.format = "json";
    rep.config.threads = 1;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    rep.provenance.config_hash_hex = hex;
    rep.provenance.seed = cfg.seed;
    rep.provenance.version = kVersionString;
    rep.model_kind = cont ? "continuous" : "discrete";
    rep.alpha = cfg.alpha ? *cfg.alpha : (cont ? 0.5 : 1.0 / (2.0 * cfg.r));

    const std::size_t reps = cfg.reps;
    std::vector<double> d(reps), lo(reps), hi(reps);
    std::vector<double> log_n(cfg.n_grid.size());
    std::vector<double> mean_d(cfg.n_grid.size()), median_d(cfg.n_grid.size());
    std::vector<double> largest_normalized;

    for (std::size_t in = 0; in < cfg.n_grid.size(); ++in) {
        const std::size_t n = cfg.n_grid[in];
        study_detail::parallel_for(reps, cfg.threads, [&](std::size_t k) {
            RandomStream rs = derive_stream(cfg.seed, {1, in, k});
            EmpiricalDistribution emp(study_detail::draw_sample(F, n, rs));
            d[k] = study_detail::distance_to(emp, F, cfg.r);
            const auto [a, b] = tail_edge_integrals(emp, F);
            lo[k] = a;
            hi[k] = b;
        });
        PerNStats row;
        row.n = n;
        row.d = stats::summarize(d);
        const double scale = std::pow(static_cast<double>(n), rep.alpha);
        std::vector<double> normalized(reps);
        for (std::size_t k = 0; k < reps; ++k) normalized[k] = scale * d[k];
        if (in + 1 == cfg.n_grid.size()) largest_normalized = normalized;
        row.normalized = stats::summarize(std::move(normalized));
        std::vector<double> ls = lo, hs = hi;
        std::sort(ls.begin(), ls.end());
        std::sort(hs.begin(), hs.end());
        row.tail_low_median = stats::sorted_quantile(ls, 0.5);
        row.tail_low_p90 = stats::sorted_quantile(ls, 0.9);
        row.tail_high_median = stats::sorted_quantile(hs, 0.5);
        row.tail_high_p90 = stats::sorted_quantile(hs, 0.9);
        rep.per_n.push_back(row);

        log_n[in] = std::log(static_cast<double>(n));
        mean_d[in] = row.d.mean;
        median_d[in] = row.d.quantiles[3];  // the 0.50 level
    }

    rep.slope_log_mean = study_detail::fit_slope(log_n, mean_d);
    rep.slope_log_median = study_detail::fit_slope(log_n, median_d);

    // Limit-law comparison at the largest n, drawn from a dedicated stream.
    const std::size_t limit_draws = 10000;
    RandomStream limit_stream = derive_stream(cfg.seed, {2, 0, 0});
    try {
        LimitSample lim;
        if (cont) {
            ContinuousLimitOptions opt;
            opt.grid_points = cfg.grid_size;
            // The built-in families all have eventually monotone tail
            // densities, so the study asserts the flag on their behalf.
            opt.assume_monotone_tail_density = true;
            lim = limit_continuous(std::get<DistributionModel>(F), cfg.r, limit_draws,
                                   limit_stream, opt);
        } else {
            lim = limit_discrete(std::get<StepDistribution>(F), cfg.r, limit_draws,
                                 limit_stream);
        }
        const LimitComparison cmp = compare_to_limit(largest_normalized, lim);
        rep.limit.available = true;
        rep.limit.kind = to_string(lim.kind);
        rep.limit.draws = limit_draws;
        rep.limit.ks = cmp.ks;
        rep.limit.d2 = cmp.d2;
        rep.limit.note = lim.note;
        if (cfg.alpha) {
            const double def = cont ? 0.5 : 1.0 / (2.0 * cfg.r);
            if (*cfg.alpha != def)
                rep.limit.note += std::string(rep.limit.note.empty() ? "" : "; ") +
                                  "normalization exponent overrides the rate the limit law "
                                  "describes";
        }
    } catch (const refusal_error& e) {
        rep.limit.note = e.what();
    } catch (const std::domain_error& e) {
        rep.limit.note = e.what();
    }
    return rep;
}

// --- serialization ---------------------------------------------------------

namespace study_detail {

// Minimal deterministic JSON writer: fixed key order comes from call order,
// floats are %.17g (lossless round trip), no whitespace.
class JsonWriter {
  public:
    void begin_object() { prefix(); out_ += '{'; stack_.push_back(false); }
    void end_object() { stack_.pop_back(); out_ += '}'; }
    void begin_array() { prefix(); out_ += '['; stack_.push_back(false); }
    void end_array() { stack_.pop_back(); out_ += ']'; }
    void key(std::string_view k) {
        prefix();
        append_string(k);
        out_ += ':';
        pending_ = true;
    }
    void num(double v) { prefix(); append_num(out_, v); }
    void uint(std::uint64_t v) { prefix(); out_ += std::to_string(v); }
    void boolean(bool v) { prefix(); out_ += v ? "true" : "false"; }
    void null() { prefix(); out_ += "null"; }
    void str(std::string_view v) { prefix(); append_string(v); }
    std::string take() { return std::move(out_); }

  private:
    void prefix() {
        if (pending_) {
            pending_ = false;
            return;
        }
        if (!stack_.empty()) {
            if (stack_.back()) out_ += ',';
            stack_.back() = true;
        }
    }
    void append_string(std::string_view v) {
        out_ += '"';
        for (char c : v) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }
    std::string out_;
    std::vector<bool> stack_;
    bool pending_ = false;
};

inline void emit_summary(JsonWriter& w, const stats::Summary& s) {
    w.begin_object();
    w.key("count");
    w.uint(s.count);
    w.key("mean");
    w.num(s.mean);
    w.key("variance");
    w.num(s.variance);
    static constexpr const char* qkeys[7] = {"q01", "q05", "q25", "q50", "q75", "q95", "q99"};
    for (std::size_t i = 0; i < 7; ++i) {
        w.key(qkeys[i]);
        w.num(s.quantiles[i]);
    }
    w.end_object();
}

inline void emit_slope(JsonWriter& w, const SlopeBlock& b) {
    w.begin_object();
    w.key("available");
    w.boolean(b.available);
    w.key("slope");
    w.num(b.slope);
    w.key("intercept");
    w.num(b.intercept);
    w.key("stderr");
    w.num(b.slope_stderr);
    w.end_object();
}

inline stats::Summary parse_summary(const nlohmann::json& j) {
    stats::Summary s;
    s.count = j.at("count").get<std::size_t>();
    s.mean = j.at("mean").get<double>();
    s.variance = j.at("variance").get<double>();
    static constexpr const char* qkeys[7] = {"q01", "q05", "q25", "q50", "q75", "q95", "q99"};
    for (std::size_t i = 0; i < 7; ++i) s.quantiles[i] = j.at(qkeys[i]).get<double>();
    return s;
}

inline SlopeBlock parse_slope(const nlohmann::json& j) {
    SlopeBlock b;
    b.available = j.at("available").get<bool>();
    b.slope = j.at("slope").get<double>();
    b.intercept = j.at("intercept").get<double>();
    b.slope_stderr = j.at("stderr").get<double>();
    return b;
}

}  // namespace study_detail

inline std::string emit_report_json(const StudyReport& rep) {
    using study_detail::JsonWriter;
    JsonWriter w;
    w.begin_object();
    w.key("kind");
    w.str("mallows-study");
    w.key("config");
    w.begin_object();
    w.key("model");
    w.str(rep.config.model);
    w.key("r");
    w.num(rep.config.r);
    w.key("n_grid");
    w.begin_array();
    for (std::size_t n : rep.config.n_grid) w.uint(n);
    w.end_array();
    w.key("reps");
    w.uint(rep.config.reps);
    w.key("seed");
    w.uint(rep.config.seed);
    w.key("alpha");
    if (rep.config.alpha) w.num(*rep.config.alpha);
    else w.null();
    w.key("grid_size");
    w.uint(rep.config.grid_size);
    w.end_object();
    w.key("provenance");
    w.begin_object();
    w.key("config_hash");
    w.str(rep.provenance.config_hash_hex);
    w.key("seed");
    w.uint(rep.provenance.seed);
    w.key("version");
    w.str(rep.provenance.version);
    w.end_object();
    w.key("model_kind");
    w.str(rep.model_kind);
    w.key("alpha");
    w.num(rep.alpha);
    w.key("per_n");
    w.begin_array();
    for (const PerNStats& row : rep.per_n) {
        w.begin_object();
        w.key("n");
        w.uint(row.n);
        w.key("d");
        study_detail::emit_summary(w, row.d);
        w.key("normalized");
        study_detail::emit_summary(w, row.normalized);
        w.key("tail_low");
        w.begin_object();
        w.key("median");
        w.num(row.tail_low_median);
        w.key("p90");
        w.num(row.tail_low_p90);
        w.end_object();
        w.key("tail_high");
        w.begin_object();
        w.key("median");
        w.num(row.tail_high_median);
        w.key("p90");
        w.num(row.tail_high_p90);
        w.end_object();
        w.end_object();
    }
    w.end_array();
    w.key("slope");
    w.begin_object();
    w.key("log_mean");
    study_detail::emit_slope(w, rep.slope_log_mean);
    w.key("log_median");
    study_detail::emit_slope(w, rep.slope_log_median);
    w.end_object();
    w.key("limit");
    w.begin_object();
    w.key("available");
    w.boolean(rep.limit.available);
    w.key("kind");
    w.str(rep.limit.kind);
    w.key("draws");
    w.uint(rep.limit.draws);
    w.key("ks");
    w.num(rep.limit.ks);
    w.key("d2");
    w.num(rep.limit.d2);
    w.key("note");
    w.str(rep.limit.note);
    w.end_object();
    w.end_object();
    std::string s = w.take();
    s += '\n';
    return s;
}

inline std::string emit_report_csv(const StudyReport& rep) {
    std::string s =
        "n,d_mean,d_variance,d_q01,d_q05,d_q25,d_q50,d_q75,d_q95,d_q99,"
        "norm_mean,norm_variance,norm_q01,norm_q05,norm_q25,norm_q50,norm_q75,norm_q95,norm_q99,"
        "tail_low_median,tail_low_p90,tail_high_median,tail_high_p90\n";
    auto add = [&s](double v) {
        s += ',';
        study_detail::append_num(s, v);
    };
    for (const PerNStats& row : rep.per_n) {
        s += std::to_string(row.n);
        add(row.d.mean);
        add(row.d.variance);
        for (double q : row.d.quantiles) add(q);
        add(row.normalized.mean);
        add(row.normalized.variance);
        for (double q : row.normalized.quantiles) add(q);
        add(row.tail_low_median);
        add(row.tail_low_p90);
        add(row.tail_high_median);
        add(row.tail_high_p90);
        s += '\n';
    }
    return s;
}

inline std::string emit_report(const StudyReport& rep, const std::string& format) {
    if (format == "json") return emit_report_json(rep);
    if (format == "csv") return emit_report_csv(rep);
    throw std::invalid_argument("emit_report: unknown format '" + format + "'");
}

inline void write_report(const StudyReport& rep, const std::string& format,
                         const std::string& path) {
    const std::string bytes = emit_report(rep, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report to " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot write report to " + path);
}

inline StudyReport parse_report_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "mallows-study")
        throw std::invalid_argument("parse_report_json: not a study report");
    StudyReport rep;
    const auto& c = j.at("config");
    rep.config.model = c.at("model").get<std::string>();
    rep.config.r = c.at("r").get<double>();
    rep.config.n_grid = c.at("n_grid").get<std::vector<std::size_t>>();
    rep.config.reps = c.at("reps").get<std::size_t>();
    rep.config.seed = c.at("seed").get<std::uint64_t>();
    if (!c.at("alpha").is_null()) rep.config.alpha = c.at("alpha").get<double>();
    rep.config.grid_size = c.at("grid_size").get<std::size_t>();
    const auto& p = j.at("provenance");
    rep.provenance.config_hash_hex = p.at("config_hash").get<std::string>();
    rep.provenance.seed = p.at("seed").get<std::uint64_t>();
    rep.provenance.version = p.at("version").get<std::string>();
    rep.model_kind = j.at("model_kind").get<std::string>();
    rep.alpha = j.at("alpha").get<double>();
    for (const auto& e : j.at("per_n")) {
        PerNStats row;
        row.n = e.at("n").get<std::size_t>();
        row.d = study_detail::parse_summary(e.at("d"));
        row.normalized = study_detail::parse_summary(e.at("normalized"));
        row.tail_low_median = e.at("tail_low").at("median").get<double>();
        row.tail_low_p90 = e.at("tail_low").at("p90").get<double>();
        row.tail_high_median = e.at("tail_high").at("median").get<double>();
        row.tail_high_p90 = e.at("tail_high").at("p90").get<double>();
        rep.per_n.push_back(row);
    }
    rep.slope_log_mean = study_detail::parse_slope(j.at("slope").at("log_mean"));
    rep.slope_log_median = study_detail::parse_slope(j.at("slope").at("log_median"));
    const auto& l = j.at("limit");
    rep.limit.available = l.at("available").get<bool>();
    rep.limit.kind = l.at("kind").get<std::string>();
    rep.limit.draws = l.at("draws").get<std::size_t>();
    rep.limit.ks = l.at("ks").get<double>();
    rep.limit.d2 = l.at("d2").get<double>();
    rep.limit.note = l.at("note").get<std::string>();
    return rep;
}

}  // namespace mallows
