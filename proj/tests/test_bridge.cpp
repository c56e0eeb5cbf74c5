#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mallows/bridge.hpp"

using mallows::BridgePath;
using mallows::ContinuousLimitOptions;
using mallows::DistributionModel;
using mallows::LimitKind;
using mallows::LimitSample;
using mallows::RandomStream;
using mallows::StepDistribution;
using mallows::limit_continuous;
using mallows::limit_discrete;
using mallows::sample_bridge;

TEST_CASE("bridge grids are validated", "[bridge]") {
    RandomStream rng(1);
    REQUIRE_THROWS_AS(sample_bridge(std::vector<double>{0.0}, rng), std::domain_error);
    REQUIRE_THROWS_AS(sample_bridge(std::vector<double>{0.1, 1.0}, rng), std::domain_error);
    REQUIRE_THROWS_AS(sample_bridge(std::vector<double>{0.0, 0.9}, rng), std::domain_error);
    REQUIRE_THROWS_AS(sample_bridge(std::vector<double>{0.0, 0.5, 0.5, 1.0}, rng),
                      std::domain_error);
}

TEST_CASE("bridge is pinned to zero at both ends", "[bridge]") {
    RandomStream rng(2);
    for (int t = 0; t < 100; ++t) {
        const BridgePath p = sample_bridge(std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}, rng);
        REQUIRE(p.values.front() == 0.0);
        REQUIRE(p.values.back() == 0.0);
    }
}

TEST_CASE("bridge covariance is p(1-q) on the grid", "[bridge]") {
    const std::vector<double> grid{0.0, 0.3, 0.7, 1.0};
    RandomStream rng(3);
    const int reps = 30000;
    double s3 = 0.0, s7 = 0.0, s33 = 0.0, s77 = 0.0, s37 = 0.0;
    for (int t = 0; t < reps; ++t) {
        const BridgePath p = sample_bridge(grid, rng);
        s3 += p.values[1];
        s7 += p.values[2];
        s33 += p.values[1] * p.values[1];
        s77 += p.values[2] * p.values[2];
        s37 += p.values[1] * p.values[2];
    }
    const double m3 = s3 / reps, m7 = s7 / reps;
    const double v3 = s33 / reps - m3 * m3;
    const double v7 = s77 / reps - m7 * m7;
    const double c37 = s37 / reps - m3 * m7;
    // SE(mean) ~ sqrt(p(1-p)/reps); SE of the second-moment estimates ~ 4e-3
    REQUIRE(std::fabs(m3) < 4.0 * std::sqrt(0.21 / reps));
    REQUIRE(std::fabs(m7) < 4.0 * std::sqrt(0.21 / reps));
    REQUIRE(std::fabs(v3 - 0.21) < 4.0 * std::sqrt(2.0 * 0.21 * 0.21 / reps));
    REQUIRE(std::fabs(v7 - 0.21) < 4.0 * std::sqrt(2.0 * 0.21 * 0.21 / reps));
    // Cov(B(s),B(t)) = s(1-t): 0.3 * 0.3 = 0.09
    REQUIRE(std::fabs(c37 - 0.09) < 4.0 * std::sqrt(0.0522 / reps));
}

TEST_CASE("discrete limit of a fair two-point law is |B(1/2)|^{1/2}", "[bridge]") {
    const StepDistribution bern({0.0, 1.0}, {0.5, 0.5});
    RandomStream rng(4);
    const LimitSample lim = limit_discrete(bern, 2.0, 5000, rng);
    REQUIRE(lim.kind == LimitKind::discrete);
    REQUIRE(lim.draws.size() == 5000);
    double mean_sq = 0.0;
    for (double d : lim.draws) mean_sq += d * d;
    mean_sq /= 5000.0;
    // E|B(1/2)| = 0.5 sqrt(2/pi); SD of |B(1/2)| is about 0.3014
    const double target = 0.5 * std::sqrt(2.0 / 3.14159265358979323846);
    REQUIRE(std::fabs(mean_sq - target) < 4.0 * 0.3014 / std::sqrt(5000.0));
}

TEST_CASE("discrete limit mean matches the closed form for three atoms", "[bridge]") {
    const StepDistribution f({0.0, 1.0, 3.5}, {0.2, 0.5, 0.3});
    const double r = 3.0;
    double target = 0.0;  // sum_j E|B(q_j)| gap_j^r
    const double c = std::sqrt(2.0 / 3.14159265358979323846);
    const double q1 = 0.2, q2 = 0.7;
    target += c * std::sqrt(q1 * (1.0 - q1)) * std::pow(1.0, r);
    target += c * std::sqrt(q2 * (1.0 - q2)) * std::pow(2.5, r);

    RandomStream rng(5);
    const LimitSample lim = limit_discrete(f, r, 8000, rng);
    std::vector<double> powed(lim.draws.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < lim.draws.size(); ++i) {
        powed[i] = std::pow(lim.draws[i], r);
        mean += powed[i];
    }
    mean /= double(powed.size());
    double var = 0.0;
    for (double v : powed) var += (v - mean) * (v - mean);
    var /= double(powed.size() - 1);
    REQUIRE(std::fabs(mean - target) < 4.0 * std::sqrt(var / double(powed.size())));
}

TEST_CASE("a single atom degenerates the discrete limit", "[bridge]") {
    RandomStream rng(6);
    const LimitSample lim = limit_discrete(StepDistribution::point_mass(2.0), 2.0, 100, rng);
    for (double d : lim.draws) REQUIRE(d == 0.0);
    REQUIRE_FALSE(lim.note.empty());
}

TEST_CASE("scaling the atoms scales the discrete limit draws", "[bridge]") {
    const StepDistribution f({0.0, 1.0, 2.0}, {0.3, 0.4, 0.3});
    const StepDistribution g = f.affine(2.5, 0.0);
    for (double r : {1.0, 2.0, 3.0}) {
        RandomStream r1(7), r2(7);
        const LimitSample a = limit_discrete(f, r, 200, r1);
        const LimitSample b = limit_discrete(g, r, 200, r2);
        for (std::size_t i = 0; i < a.draws.size(); ++i)
            REQUIRE(std::fabs(b.draws[i] - 2.5 * a.draws[i]) <= 1e-12 * std::max(1.0, a.draws[i]));
    }
}

TEST_CASE("continuous limit of the uniform law integrates the squared bridge", "[bridge]") {
    RandomStream rng(8);
    ContinuousLimitOptions opt;
    opt.grid_points = 1025;
    const LimitSample lim =
        limit_continuous(DistributionModel::uniform(0.0, 1.0), 2.0, 4000, rng, opt);
    REQUIRE(lim.kind == LimitKind::continuous);
    REQUIRE(lim.note.empty());  // bounded support: no excision
    double mean_sq = 0.0;
    for (double d : lim.draws) mean_sq += d * d;
    mean_sq /= double(lim.draws.size());
    // E integral B^2 = integral p(1-p) dp = 1/6; SD = sqrt(1/45)
    REQUIRE(std::fabs(mean_sq - 1.0 / 6.0) < 4.0 * std::sqrt(1.0 / 45.0 / 4000.0));
}

TEST_CASE("wider uniform supports scale the continuous limit by the width", "[bridge]") {
    RandomStream r1(9), r2(9);
    ContinuousLimitOptions opt;
    opt.grid_points = 257;
    const LimitSample a = limit_continuous(DistributionModel::uniform(0.0, 1.0), 2.0, 100, r1, opt);
    const LimitSample b = limit_continuous(DistributionModel::uniform(2.0, 5.0), 2.0, 100, r2, opt);
    for (std::size_t i = 0; i < a.draws.size(); ++i)
        REQUIRE(std::fabs(b.draws[i] - 3.0 * a.draws[i]) <= 1e-12 * std::max(1.0, a.draws[i]));
}

TEST_CASE("unbounded supports without a certified integral are refused", "[bridge]") {
    RandomStream rng(10);
    ContinuousLimitOptions opt;
    opt.assume_monotone_tail_density = true;
    REQUIRE_THROWS_AS(limit_continuous(DistributionModel::normal(0.0, 1.0), 2.0, 10, rng, opt),
                      mallows::refusal_error);
    REQUIRE_THROWS_AS(limit_continuous(DistributionModel::exponential(1.0), 2.0, 10, rng, opt),
                      mallows::refusal_error);
    REQUIRE_THROWS_AS(limit_continuous(DistributionModel::lognormal(0.0, 1.0), 2.0, 10, rng, opt),
                      mallows::refusal_error);
    REQUIRE_THROWS_AS(limit_continuous(DistributionModel::pareto(3.0, 1.0), 2.0, 10, rng),
                      mallows::refusal_error);
}

TEST_CASE("refusal messages carry the verdict diagnostics", "[bridge]") {
    RandomStream rng(11);
    using Catch::Matchers::ContainsSubstring;
    REQUIRE_THROWS_WITH(limit_continuous(DistributionModel::normal(0.0, 1.0), 2.0, 10, rng),
                        ContainsSubstring("inverse-hazard"));
}

TEST_CASE("comparison couples the normalized draws to the limit draws", "[bridge]") {
    RandomStream rng(12);
    const StepDistribution bern({0.0, 1.0}, {0.5, 0.5});
    const LimitSample lim = limit_discrete(bern, 2.0, 3000, rng);
    // the limit sample compared with itself is indistinguishable
    const auto same = mallows::compare_to_limit(lim.draws, lim);
    REQUIRE(same.ks == 0.0);
    REQUIRE(same.d2 == 0.0);
    // against a shifted copy, both statistics see the shift
    std::vector<double> shifted(lim.draws);
    for (double& v : shifted) v += 0.5;
    const auto off = mallows::compare_to_limit(shifted, lim);
    REQUIRE(off.ks > 0.5);
    REQUIRE(std::fabs(off.d2 - 0.5) < 1e-12);
}
