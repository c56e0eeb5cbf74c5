// Acceptance gate: twelve numbered criteria, each a self-contained check of
// the library against a closed-form target or an invariant. Run all with no
// arguments, or one with --criterion K. Prints one [PASS]/[FAIL] line per
// criterion and exits nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include "mallows/bootstrap.hpp"
#include "mallows/bridge.hpp"
#include "mallows/distance.hpp"
#include "mallows/distribution.hpp"
#include "mallows/empirical.hpp"
#include "mallows/hazard.hpp"
#include "mallows/parse.hpp"
#include "mallows/rng.hpp"
#include "mallows/step_distribution.hpp"
#include "mallows/study.hpp"

namespace {

using namespace mallows;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    va_list ap;
    va_start(ap, f);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// 1. U(0,1), r = 2, n = 4096: mean of n d_2^2 near the limit mean 1/6.
Outcome criterion_1() {
    const auto t0 = Clock::now();
    const auto u = DistributionModel::uniform(0.0, 1.0);
    const std::size_t n = 4096, reps = 1000;
    RandomStream rng(11);
    double acc = 0.0;
    for (std::size_t k = 0; k < reps; ++k) {
        const EmpiricalDistribution emp(u.sample(n, rng));
        acc += static_cast<double>(n) * distance(emp, u, 2.0).rth_power;
    }
    const double mean = acc / static_cast<double>(reps);
    const double el = seconds_since(t0);
    const bool pass = std::fabs(mean - 1.0 / 6.0) <= 0.01 && el < 30.0;
    return {pass, fmt("uniform mean n*d2^2 = %.5f vs 1/6 ~ 0.16667 (tol 0.01), %.1fs (cap 30)",
                      mean, el)};
}

// 2. Bernoulli(1/2), n = 4096: mean of sqrt(n) d_2^2 near E|B(1/2)| = 1/sqrt(2 pi).
Outcome criterion_2() {
    const auto t0 = Clock::now();
    const StepDistribution bern({0.0, 1.0}, {0.5, 0.5});
    const std::size_t n = 4096, reps = 1000;
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    RandomStream rng(22);
    double acc = 0.0;
    for (std::size_t k = 0; k < reps; ++k) {
        const EmpiricalDistribution emp(bern.sample(n, rng));
        acc += sqrt_n * distance(emp, bern, 2.0).rth_power;
    }
    const double mean = acc / static_cast<double>(reps);
    const double target = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double el = seconds_since(t0);
    const bool pass = std::fabs(mean - target) <= 0.02 && el < 10.0;
    return {pass, fmt("bernoulli mean sqrt(n)*d2^2 = %.5f vs %.5f (tol 0.02), %.1fs (cap 10)",
                      mean, target, el)};
}

// 3. Log-log rate slopes over n = 2^6..2^14.
Outcome criterion_3() {
    const auto t0 = Clock::now();
    const auto fitted = [](const std::string& model, double r, std::uint64_t seed) {
        StudyConfig cfg;
        cfg.model = model;
        cfg.r = r;
        cfg.reps = 1000;
        cfg.seed = seed;
        cfg.grid_size = 513;
        return run_convergence_study(cfg).slope_log_mean.slope;
    };
    const double su = fitted("uniform()", 2.0, 33);
    const double sb2 = fitted("step(x=[0,1],p=[0.5,0.5])", 2.0, 34);
    const double sb4 = fitted("step(x=[0,1],p=[0.5,0.5])", 4.0, 35);
    const double el = seconds_since(t0);
    const bool pass = std::fabs(su + 0.5) <= 0.05 && std::fabs(sb2 + 0.25) <= 0.05 &&
                      std::fabs(sb4 + 0.125) <= 0.05 && el < 60.0;
    return {pass, fmt("slopes: uniform %.4f (want -0.5), bern r=2 %.4f (want -0.25), "
                      "bern r=4 %.4f (want -0.125), tol 0.05, %.1fs (cap 60)",
                      su, sb2, sb4, el)};
}

// 4. Normalized distances at n = 4096 vs 10^4 limit draws: two-sample KS
// below the 1% critical value for both models.
Outcome criterion_4() {
    const std::size_t n = 4096, reps = 1000, limit_draws = 10000;
    const double crit =
        1.628 * std::sqrt(1.0 / static_cast<double>(reps) + 1.0 / static_cast<double>(limit_draws));

    const auto u = DistributionModel::uniform(0.0, 1.0);
    RandomStream ru(44);
    std::vector<double> vals(reps);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < reps; ++k) {
        const EmpiricalDistribution emp(u.sample(n, ru));
        vals[k] = sqrt_n * distance(emp, u, 2.0).value;
    }
    ContinuousLimitOptions opt;
    opt.grid_points = 4097;
    opt.assume_monotone_tail_density = true;
    RandomStream rlu(45);
    const LimitSample limu = limit_continuous(u, 2.0, limit_draws, rlu, opt);
    const double ks_u = compare_to_limit(vals, limu).ks;

    const StepDistribution bern({0.0, 1.0}, {0.5, 0.5});
    RandomStream rb(46);
    const double quarter = std::pow(static_cast<double>(n), 0.25);
    for (std::size_t k = 0; k < reps; ++k) {
        const EmpiricalDistribution emp(bern.sample(n, rb));
        vals[k] = quarter * distance(emp, bern, 2.0).value;
    }
    RandomStream rlb(47);
    const LimitSample limb = limit_discrete(bern, 2.0, limit_draws, rlb);
    const double ks_b = compare_to_limit(vals, limb).ks;

    const bool pass = ks_u < crit && ks_b < crit;
    return {pass, fmt("KS vs limit: uniform %.4f, bernoulli %.4f (critical %.4f)",
                      ks_u, ks_b, crit)};
}

// 5. Hazard suite: Exp(1) tail variance, sandwich, second-moment ratio;
// inverse-hazard integral verdicts; survival reconstruction battery.
Outcome criterion_5() {
    bool pass = true;
    std::string why;
    const auto check = [&](bool ok, const std::string& label) {
        pass = pass && ok;
        if (!ok) why += (why.empty() ? "" : ", ") + label;
    };
    const auto e1 = DistributionModel::exponential(1.0);
    const auto u = DistributionModel::uniform(0.0, 1.0);

    check(std::fabs(tail_variance(e1, 1.0) - 1.0) <= 1e-6, "exp tail variance");
    const auto sw = check_variance_sandwich(e1, 1.0);
    check(sw.satisfied && std::fabs(sw.lower - 1.0 / 12.0) <= 1e-6 &&
              std::fabs(sw.upper - 4.0) <= 1e-6 && std::fabs(sw.value - 1.0) <= 1e-6,
          "sandwich 1/12 <= 1 <= 4");
    const double ratio = tail_second_moment_ratio(e1, 1.0);
    check(std::fabs(ratio - 2.0) <= 1e-6 && ratio <= 4.0, "second-moment ratio");

    const auto vu = inverse_hazard_integral_verdict(u);
    check(vu.verdict == Verdict::finite && std::fabs(vu.value - 1.0 / 6.0) <= 1e-6,
          "uniform inverse-hazard finite 1/6");
    check(inverse_hazard_integral_verdict(DistributionModel::normal(0.0, 1.0)).verdict ==
              Verdict::divergent,
          "normal inverse-hazard divergent");
    check(inverse_hazard_integral_verdict(e1).verdict == Verdict::divergent,
          "exp inverse-hazard divergent");

    const struct {
        DistributionModel m;
        double t, x;
    } battery[4] = {
        {DistributionModel::uniform(0.0, 1.0), 0.2, 0.8},
        {DistributionModel::normal(-1.0, 1.5), -1.0, 2.0},
        {DistributionModel::exponential(2.0), 0.0, 3.0},
        {DistributionModel::lognormal(0.0, 0.8), 0.5, 4.0},
    };
    for (const auto& c : battery)
        check(survival_reconstruction_check(c.m, c.t, c.x).satisfied,
              "reconstruction " + c.m.describe());

    return {pass, pass ? "exp tail variance 1, sandwich 1/12<=1<=4, ratio 2, verdicts "
                         "finite(1/6)/divergent/divergent, reconstruction battery ok"
                       : "failed: " + why};
}

// 6. Decomposition identity on 100 random (model, n <= 200) cases.
Outcome criterion_6() {
    RandomStream rng(66);
    const DistributionModel models[10] = {
        DistributionModel::uniform(0.0, 1.0),   DistributionModel::uniform(-2.0, 3.0),
        DistributionModel::normal(0.0, 1.0),    DistributionModel::normal(1.5, 0.7),
        DistributionModel::exponential(1.0),    DistributionModel::exponential(0.4),
        DistributionModel::lognormal(0.0, 0.5), DistributionModel::lognormal(0.3, 0.8),
        DistributionModel::pareto(3.5, 2.0),    DistributionModel::pareto(5.0, 1.0),
    };
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto& m = models[t % 10];
        const std::size_t n = 1 + rng.below(200);
        const EmpiricalDistribution emp(m.sample(n, rng));
        const auto dec = variance_decomposition(emp, m);
        const double sum = dec.random_part + dec.deterministic_part;
        const double rel = std::fabs(sum - dec.n_d2_squared) / std::max(dec.n_d2_squared, 1e-12);
        worst = std::max(worst, rel);
    }
    const bool pass = worst <= 1e-8;
    return {pass, fmt("decomposition worst relative error %.3e over 100 cases (tol 1e-8)", worst)};
}

// 7. Bootstrap envelope: gap <= upper + 3 mc_err and lower <= gap + 3 mc_err
// in at least 99% of 200 trials.
Outcome criterion_7() {
    const auto t0 = Clock::now();
    RandomStream rng(77);
    const auto u = DistributionModel::uniform(0.0, 1.0);
    int ok_upper = 0, ok_lower = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const EmpiricalDistribution sample(u.sample(100, rng));
        const auto est = bootstrap_gap(sample, u, 10000, rng);
        ok_upper += est.gap <= upper_bound(sample, u) + 3.0 * est.mc_error;
        ok_lower += lower_bound(sample, u) <= est.gap + 3.0 * est.mc_error;
    }
    const double el = seconds_since(t0);
    const bool pass = ok_upper >= 198 && ok_lower >= 198 && el < 120.0;
    return {pass, fmt("gap<=upper in %d/200, lower<=gap in %d/200 (need 198), %.1fs (cap 120)",
                      ok_upper, ok_lower, el)};
}

// 8. Shift identity to 1e-8 absolute on 100 normal samples of size 20.
Outcome criterion_8() {
    RandomStream rng(88);
    const auto f = DistributionModel::normal(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const EmpiricalDistribution sample(f.sample(20, rng));
        const auto rep = shift_identity_check(sample, f);
        worst = std::max(worst, std::fabs(rep.lhs_squared - rep.rhs_squared));
    }
    const bool pass = worst <= 1e-8;
    return {pass, fmt("shift identity worst |lhs^2 - rhs^2| = %.3e (tol 1e-8)", worst)};
}

// 9. Exact enumeration vs 10^5-draw MC root law: d_2 <= 0.02 in 19/20 trials.
Outcome criterion_9() {
    RandomStream rng(99);
    const auto u = DistributionModel::uniform(0.0, 1.0);
    int ok = 0;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const EmpiricalDistribution sample(u.sample(5, rng));
        const auto exact = exact_bootstrap_root_distribution(sample);
        const auto mc = bootstrap_root_distribution(sample, 100000, rng);
        const double d = root_distance(exact, mc);
        ok += d <= 0.02;
        worst = std::max(worst, d);
    }
    const bool pass = ok >= 19;
    return {pass, fmt("exact vs MC root d2 <= 0.02 in %d/20 trials (need 19), worst %.4f",
                      ok, worst)};
}

// 10. sigma-CLT: variance of sqrt(n)(s - sigma) near 1/2 for the normal.
Outcome criterion_10() {
    RandomStream rng(1010);
    const auto rep = sigma_clt_statistics(DistributionModel::normal(0.0, 1.0), 2048, 2000, rng);
    const bool pass = std::fabs(rep.variance - 0.5) <= 0.05;
    return {pass, fmt("Var(sqrt(n)(s - sigma)) = %.4f vs 0.5 (tol 0.05, asymptotic %.4f)",
                      rep.variance, rep.asymptotic_variance)};
}

// 11. DKW: exceedance frequency never above the bound plus 3 binomial SEs.
Outcome criterion_11() {
    RandomStream rng(1111);
    const auto u = DistributionModel::uniform(0.0, 1.0);
    const double epss[2] = {0.05, 0.1};
    const std::size_t ns[2] = {100, 1000};
    const int reps = 10000;
    bool pass = true;
    std::string detail;
    for (std::size_t n : ns) {
        int exceed[2] = {0, 0};
        for (int k = 0; k < reps; ++k) {
            const EmpiricalDistribution emp(u.sample(n, rng));
            const double dev = ks_sup_deviation(emp, u);
            for (int j = 0; j < 2; ++j) exceed[j] += dev > epss[j];
        }
        for (int j = 0; j < 2; ++j) {
            const double freq = exceed[j] / static_cast<double>(reps);
            const double bound = dkw_bound(n, epss[j]);
            const double se = std::sqrt(std::max(bound * (1.0 - bound), 0.0) /
                                        static_cast<double>(reps));
            pass = pass && freq <= bound + 3.0 * se;
            detail += fmt("%sn=%zu eps=%.2f: %.4f vs %.4f", detail.empty() ? "" : "; ", n,
                          epss[j], freq, bound + 3.0 * se);
        }
    }
    return {pass, detail};
}

// 12. Study reports are byte-identical across thread counts.
Outcome criterion_12() {
    const auto report_bytes = [](StudyConfig cfg, std::size_t threads) {
        cfg.threads = threads;
        const StudyReport rep = run_convergence_study(cfg);
        return emit_report_json(rep) + emit_report_csv(rep);
    };
    StudyConfig a;
    a.model = "uniform()";
    a.n_grid = {64, 256, 1024};
    a.reps = 200;
    a.seed = 1212;
    a.grid_size = 513;
    StudyConfig b;
    b.model = "step(x=[0,1],p=[0.5,0.5])";
    b.n_grid = {64, 256, 1024};
    b.reps = 200;
    b.seed = 1213;
    const bool ua = report_bytes(a, 1) == report_bytes(a, 4);
    const bool ub = report_bytes(b, 1) == report_bytes(b, 3);
    const bool pass = ua && ub;
    return {pass, fmt("byte-identical reports: uniform threads {1,4} %s, bernoulli threads "
                      "{1,3} %s",
                      ua ? "yes" : "NO", ub ? "yes" : "NO")};
}

using CriterionFn = Outcome (*)();
constexpr CriterionFn kCriteria[12] = {
    criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5,  criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
};

}  // namespace

int main(int argc, char** argv) {
    int selected = 0;  // 0 runs everything
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            selected = std::atoi(argv[++i]);
            if (selected < 1 || selected > 12) {
                std::fprintf(stderr, "criterion must be in 1..12\n");
                return 2;
            }
        } else {
            std::fprintf(stderr, "usage: %s [--criterion K]\n", argv[0]);
            return 2;
        }
    }
    bool all = true;
    for (int k = 1; k <= 12; ++k) {
        if (selected != 0 && k != selected) continue;
        Outcome out;
        try {
            out = kCriteria[k - 1]();
        } catch (const std::exception& e) {
            out = {false, std::string("unexpected exception: ") + e.what()};
        }
        std::printf("[%s] %d: %s\n", out.pass ? "PASS" : "FAIL", k, out.detail.c_str());
        std::fflush(stdout);
        all = all && out.pass;
    }
    return all ? 0 : 1;
}
