#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mallows/stats.hpp"
#include "mallows/step_distribution.hpp"

namespace mallows {

// Empirical law of a sample: mass 1/n at each observation. Values are kept
// sorted; ties are allowed and merge into heavier atoms under to_step().
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw std::invalid_argument("empirical: need at least one value");
        for (double v : values_)
            if (!std::isfinite(v)) throw std::invalid_argument("empirical: values must be finite");
        std::sort(values_.begin(), values_.end());
    }

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }

    // 1-based order statistic.
    double order_statistic(std::size_t i) const {
        if (i < 1 || i > values_.size()) throw std::out_of_range("order_statistic: index");
        return values_[i - 1];
    }

    // Left-continuous inverse: the ceil(n*p)-th order statistic.
    double quantile(double p) const {
        if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("empirical quantile: p outside (0,1]");
        return stats::sorted_quantile(values_, p);
    }

    double cdf(double x) const {
        const auto it = std::upper_bound(values_.begin(), values_.end(), x);
        return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
    }

    double mean() const { return stats::mean_of(values_); }

    double abs_moment(double r) const {
        if (!(r >= 1.0)) throw std::invalid_argument("abs_moment: order must be >= 1");
        std::vector<double> pw(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i)
            pw[i] = std::pow(std::fabs(values_[i]), r);
        return stats::pairwise_sum(pw) / static_cast<double>(values_.size());
    }

    StepDistribution to_step() const {
        std::vector<double> atoms, masses;
        atoms.reserve(values_.size());
        masses.reserve(values_.size());
        const double n = static_cast<double>(values_.size());
        std::size_t i = 0;
        while (i < values_.size()) {
            std::size_t j = i;
            while (j < values_.size() && values_[j] == values_[i]) ++j;
            atoms.push_back(values_[i]);
            masses.push_back(static_cast<double>(j - i) / n);
            i = j;
        }
        return StepDistribution(std::move(atoms), std::move(masses));
    }

private:
    std::vector<double> values_;
};

}  // namespace mallows
