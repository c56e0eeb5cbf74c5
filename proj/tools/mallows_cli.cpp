// Command line front end: exact coupling distances, limit-law simulation,
// hazard tail diagnostics, bootstrap envelopes, and convergence studies.
// Exit codes: 0 success, 2 configuration / grammar / I-O errors, 3 numeric
// refusals (divergent moments, unmet limit preconditions).

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mallows/bootstrap.hpp"
#include "mallows/bridge.hpp"
#include "mallows/distance.hpp"
#include "mallows/empirical.hpp"
#include "mallows/errors.hpp"
#include "mallows/hazard.hpp"
#include "mallows/parse.hpp"
#include "mallows/study.hpp"

namespace {

using namespace mallows;
using study_detail::JsonWriter;

std::vector<double> read_sample_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open sample file: " + path);
    std::vector<double> xs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = study_detail::trim(line);
        if (t.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != t.size())
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": not a number: '" + t + "'");
        xs.push_back(v);
    }
    if (xs.empty()) throw std::invalid_argument(path + ": no values");
    return xs;
}

void emit_optional(JsonWriter& w, double v) {
    if (std::isfinite(v)) w.num(v);
    else w.null();
}

struct DistanceArgs {
    std::string lhs, rhs;
    double r = 2.0;
};

int run_distance(const DistanceArgs& a) {
    DistanceResult res;
    const AnyDistribution rhs = parse_distribution(a.rhs);
    if (!a.lhs.empty() && a.lhs[0] == '@') {
        const EmpiricalDistribution emp(read_sample_file(a.lhs.substr(1)));
        res = std::visit([&](const auto& g) { return distance(emp, g, a.r); }, rhs);
    } else {
        const AnyDistribution lhs = parse_distribution(a.lhs);
        res = std::visit([&](const auto& f, const auto& g) { return distance(f, g, a.r); }, lhs,
                         rhs);
    }
    JsonWriter w;
    w.begin_object();
    w.key("value");
    w.num(res.value);
    w.key("rth_power");
    w.num(res.rth_power);
    w.key("method");
    w.str(to_string(res.method));
    w.key("error_estimate");
    w.num(res.error_estimate);
    w.end_object();
    std::cout << w.take() << '\n';
    return 0;
}

struct LimitArgs {
    std::string model;
    double r = 2.0;
    std::size_t reps = 10000;
    std::size_t grid = 4097;
    std::uint64_t seed = 1;
    std::string format = "json";
};

int run_limit(const LimitArgs& a) {
    if (a.format != "json" && a.format != "csv")
        throw std::invalid_argument("limit: format must be json or csv");
    const AnyDistribution F = parse_distribution(a.model);
    RandomStream rng = derive_stream(a.seed, {0});
    LimitSample lim;
    if (is_continuous(F)) {
        ContinuousLimitOptions opt;
        opt.grid_points = a.grid;
        // the model grammar only builds families with eventually monotone
        // tail densities, so the flag is asserted on the caller's behalf
        opt.assume_monotone_tail_density = true;
        lim = limit_continuous(std::get<DistributionModel>(F), a.r, a.reps, rng, opt);
    } else {
        lim = limit_discrete(std::get<StepDistribution>(F), a.r, a.reps, rng);
    }
    if (a.format == "csv") {
        std::string s;
        for (double v : lim.draws) {
            study_detail::append_num(s, v);
            s += '\n';
        }
        std::cout << s;
        return 0;
    }
    const stats::Summary sm = stats::summarize(lim.draws);
    JsonWriter w;
    w.begin_object();
    w.key("kind");
    w.str(to_string(lim.kind));
    w.key("order");
    w.num(lim.order);
    w.key("source");
    w.str(lim.source);
    w.key("draws");
    w.uint(sm.count);
    w.key("grid_points");
    w.uint(lim.grid_points);
    w.key("note");
    w.str(lim.note);
    w.key("mean");
    w.num(sm.mean);
    w.key("variance");
    w.num(sm.variance);
    static constexpr const char* qkeys[7] = {"q01", "q05", "q25", "q50", "q75", "q95", "q99"};
    for (std::size_t i = 0; i < 7; ++i) {
        w.key(qkeys[i]);
        w.num(sm.quantiles[i]);
    }
    w.end_object();
    std::cout << w.take() << '\n';
    return 0;
}

void emit_hazard_points(JsonWriter& w, const std::vector<HazardPoint>& pts) {
    w.begin_array();
    for (const auto& pt : pts) {
        w.begin_object();
        w.key("p");
        w.num(pt.p);
        w.key("x");
        w.num(pt.x);
        w.key("h");
        w.num(pt.h);
        w.end_object();
    }
    w.end_array();
}

void emit_verdict(JsonWriter& w, const TailVerdict& tv) {
    w.begin_object();
    w.key("verdict");
    w.str(to_string(tv.verdict));
    w.key("value");
    if (std::isnan(tv.value)) w.null();
    else w.num(tv.value);
    w.key("error");
    w.num(tv.error);
    w.key("note");
    w.str(tv.note);
    w.end_object();
}

int run_hazard(const std::string& model) {
    const AnyDistribution F = parse_distribution(model);
    if (!is_continuous(F))
        throw std::invalid_argument("hazard: diagnostics need a continuous model");
    const DistributionModel& m = std::get<DistributionModel>(F);

    const TailVerdict integral = inverse_hazard_integral_verdict(m);
    const TailVerdict divergence = hazard_divergence_verdict(m);
    const double t_mgf =
        std::max(std::fabs(m.quantile(0.99)), std::fabs(m.quantile(0.01)));
    const double radius = mgf_radius_bound(m, t_mgf);

    JsonWriter w;
    w.begin_object();
    w.key("model");
    w.str(m.describe());
    w.key("profile");
    w.begin_object();
    w.key("left");
    emit_hazard_points(w, divergence.left_points);
    w.key("right");
    emit_hazard_points(w, divergence.right_points);
    w.end_object();
    w.key("inverse_hazard_integral");
    emit_verdict(w, integral);
    w.key("hazard_divergence");
    emit_verdict(w, divergence);
    w.key("mgf_radius");
    w.begin_object();
    w.key("t");
    w.num(t_mgf);
    w.key("value");
    w.num(radius);
    w.end_object();

    w.key("sandwich");
    w.begin_array();
    struct Probe {
        Tail tail;
        double p;
    };
    const Probe probes[] = {{Tail::right, 0.5},  {Tail::right, 0.75}, {Tail::right, 0.9},
                            {Tail::right, 0.99}, {Tail::left, 0.5},   {Tail::left, 0.25},
                            {Tail::left, 0.1},   {Tail::left, 0.01}};
    for (const Probe& pr : probes) {
        const double t = m.quantile(pr.p);
        const SandwichReport rep = check_variance_sandwich(m, t, pr.tail);
        w.begin_object();
        w.key("tail");
        w.str(pr.tail == Tail::right ? "right" : "left");
        w.key("p");
        w.num(pr.p);
        w.key("t");
        w.num(rep.t);
        w.key("inf_h");
        w.num(rep.inf_h);
        w.key("sup_h");
        w.num(rep.sup_h);
        w.key("lower");
        w.num(rep.lower);
        w.key("value");
        w.num(rep.value);
        w.key("upper");
        emit_optional(w, rep.upper);
        w.key("satisfied");
        w.boolean(rep.satisfied);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    std::cout << w.take() << '\n';
    return 0;
}

struct BootstrapArgs {
    std::string model;
    std::size_t n = 0;
    std::size_t reps = 10000;
    std::optional<std::size_t> gap_draws;
    std::uint64_t seed = 1;
    bool exact = false;
};

int run_bootstrap(const BootstrapArgs& a) {
    const AnyDistribution F = parse_distribution(a.model);
    if (!is_continuous(F))
        throw std::invalid_argument("bootstrap: the model side must be continuous; "
                                    "finitely supported truths are exercised through the library");
    const DistributionModel& f = std::get<DistributionModel>(F);
    RandomStream rng = derive_stream(a.seed, {4});
    const EmpiricalDistribution sample(f.sample(a.n, rng));

    const double upper = upper_bound(sample, f);
    const double lower = lower_bound(sample, f);
    const std::size_t draws = a.gap_draws.value_or(a.reps);
    const GapEstimate gap = bootstrap_gap(sample, f, draws, rng, a.exact);
    const ShiftIdentityReport sid = shift_identity_check(sample, f);

    JsonWriter w;
    w.begin_object();
    w.key("upper");
    w.num(upper);
    w.key("lower");
    w.num(lower);
    w.key("gap");
    w.num(gap.gap);
    w.key("mc_error");
    w.num(gap.mc_error);
    w.key("identity_check");
    w.num(std::fabs(sid.lhs_squared - sid.rhs_squared));
    w.end_object();
    std::cout << w.take() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mallows: coupling distances, limit laws, hazard diagnostics, bootstrap bounds"};
    app.require_subcommand(1);

    DistanceArgs da;
    auto* cmd_distance = app.add_subcommand(
        "distance", "order-r coupling distance between two laws");
    cmd_distance->add_option("--lhs", da.lhs,
                             "model string like normal(mu=0,sigma=1), or @file with one value per line")
        ->required();
    cmd_distance->add_option("--rhs", da.rhs, "model string")->required();
    cmd_distance->add_option("--r", da.r, "distance order r >= 1 (default 2)");

    LimitArgs la;
    auto* cmd_limit = app.add_subcommand(
        "limit", "simulate the limiting law of the normalized coupling distance");
    cmd_limit->add_option("--model", la.model, "model string")->required();
    cmd_limit->add_option("--r", la.r, "distance order (default 2)");
    cmd_limit->add_option("--reps", la.reps, "number of draws (default 10000)");
    cmd_limit->add_option("--grid", la.grid, "bridge grid points, continuous models (default 4097)");
    cmd_limit->add_option("--seed", la.seed, "master seed (default 1)");
    cmd_limit->add_option("--format", la.format, "json summary or csv draws (default json)");

    std::string hazard_model;
    auto* cmd_hazard = app.add_subcommand(
        "hazard", "tail diagnostics: hazard profile, integral verdicts, MGF radius, variance sandwich");
    cmd_hazard->add_option("--model", hazard_model, "continuous model string")->required();

    BootstrapArgs ba;
    std::size_t ba_gap_draws = 0;
    auto* cmd_bootstrap = app.add_subcommand(
        "bootstrap", "distance between the bootstrap and true root laws, with envelopes");
    cmd_bootstrap->add_option("--model", ba.model, "continuous model string (the true law)")
        ->required();
    cmd_bootstrap->add_option("--n", ba.n, "sample size")->required()->check(CLI::PositiveNumber);
    cmd_bootstrap->add_option("--reps", ba.reps, "Monte Carlo budget (default 10000)");
    auto* gap_opt = cmd_bootstrap->add_option("--gap-draws", ba_gap_draws,
                                              "draws per side for the gap (default: --reps)");
    cmd_bootstrap->add_option("--seed", ba.seed, "master seed (default 1)");
    cmd_bootstrap->add_flag("--exact", ba.exact, "enumerate the bootstrap root exactly (n <= 7)");

    std::string st_config, st_model, st_grid, st_out, st_format;
    double st_r = 0.0, st_alpha = 0.0;
    std::size_t st_reps = 0, st_grid_size = 0, st_threads = 0;
    std::uint64_t st_seed = 0;
    auto* cmd_study = app.add_subcommand(
        "study",
        "convergence-rate study over an n grid; config file keys (key = value, '#' comments): "
        "model, r, n_grid, reps, seed, alpha, grid_size, out, format, threads");
    cmd_study->add_option("--config", st_config, "config file; flags below override its keys");
    cmd_study->add_option("--model", st_model, "model string (key: model)");
    cmd_study->add_option("--r", st_r, "distance order r >= 1 (key: r)");
    cmd_study->add_option("--n-grid", st_grid,
                          "comma-separated strictly increasing sizes, >= 3 entries (key: n_grid)");
    cmd_study->add_option("--reps", st_reps, "replications per n, >= 100 (key: reps)");
    cmd_study->add_option("--seed", st_seed, "master seed (key: seed)");
    cmd_study->add_option("--alpha", st_alpha,
                          "normalization exponent in (0,1); default 1/2 continuous, 1/(2r) "
                          "discrete (key: alpha)");
    cmd_study->add_option("--grid-size", st_grid_size,
                          "limit-law bridge grid points (key: grid_size)");
    cmd_study->add_option("--out", st_out, "output path; empty writes to stdout (key: out)");
    cmd_study->add_option("--format", st_format, "json or csv (key: format)");
    cmd_study->add_option("--threads", st_threads,
                          "worker threads; reports are identical for any value (key: threads)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_distance->parsed()) return run_distance(da);
        if (cmd_limit->parsed()) return run_limit(la);
        if (cmd_hazard->parsed()) return run_hazard(hazard_model);
        if (cmd_bootstrap->parsed()) {
            if (gap_opt->count()) ba.gap_draws = ba_gap_draws;
            return run_bootstrap(ba);
        }
        if (cmd_study->parsed()) {
            StudyConfig cfg;
            if (cmd_study->count("--config")) cfg = parse_config_file(st_config);
            if (cmd_study->count("--model")) cfg.model = st_model;
            if (cmd_study->count("--r")) cfg.r = st_r;
            if (cmd_study->count("--n-grid"))
                cfg.n_grid = study_detail::parse_grid(st_grid, "n_grid");
            if (cmd_study->count("--reps")) cfg.reps = st_reps;
            if (cmd_study->count("--seed")) cfg.seed = st_seed;
            if (cmd_study->count("--alpha")) cfg.alpha = st_alpha;
            if (cmd_study->count("--grid-size")) cfg.grid_size = st_grid_size;
            if (cmd_study->count("--out")) cfg.out = st_out;
            if (cmd_study->count("--format")) cfg.format = st_format;
            if (cmd_study->count("--threads")) cfg.threads = st_threads;
            const StudyReport rep = run_convergence_study(cfg);
            if (cfg.out.empty())
                std::cout << emit_report(rep, cfg.format);
            else
                write_report(rep, cfg.format, cfg.out);
            return 0;
        }
        return 2;  // unreachable: a subcommand is required
    } catch (const refusal_error& e) {
        std::cerr << "refusal: " << e.what() << '\n';
        return 3;
    } catch (const divergent_moment_error& e) {
        std::cerr << "refusal: " << e.what() << '\n';
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "refusal: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
