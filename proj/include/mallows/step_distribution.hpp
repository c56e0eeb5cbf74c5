#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mallows/rng.hpp"

namespace mallows {

// Finitely supported law given by strictly increasing atoms and positive
// masses. The cumulative vector is the canonical representation used by the
// coupling code: quantile(p) is the left-continuous inverse, the smallest
// atom whose cumulative mass reaches p.
class StepDistribution {
public:
    StepDistribution(std::vector<double> atoms, std::vector<double> masses)
        : atoms_(std::move(atoms)), masses_(std::move(masses)) {
        if (atoms_.empty() || atoms_.size() != masses_.size())
            throw std::invalid_argument("step: need equally many atoms and masses, at least one");
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!std::isfinite(atoms_[i]))
                throw std::invalid_argument("step: atoms must be finite");
            if (i > 0 && !(atoms_[i] > atoms_[i - 1]))
                throw std::invalid_argument("step: atoms must be strictly increasing");
            if (!(masses_[i] > 0.0))
                throw std::invalid_argument("step: masses must be positive");
        }
        cum_.resize(masses_.size());
        std::partial_sum(masses_.begin(), masses_.end(), cum_.begin());
        if (std::fabs(cum_.back() - 1.0) > 1e-12)
            throw std::invalid_argument("step: masses must sum to 1");
        cum_.back() = 1.0;  // pin the invariant exactly for the merge walk
    }

    static StepDistribution point_mass(double c) { return StepDistribution({c}, {1.0}); }

    std::size_t size() const { return atoms_.size(); }
    std::span<const double> atoms() const { return atoms_; }
    std::span<const double> masses() const { return masses_; }
    std::span<const double> cumulative() const { return cum_; }

    double quantile(double p) const {
        if (!(p > 0.0 && p <= 1.0))
            throw std::domain_error("step quantile: p outside (0,1]");
        const auto it = std::lower_bound(cum_.begin(), cum_.end(), p);
        return atoms_[static_cast<std::size_t>(it - cum_.begin())];
    }

    double cdf(double x) const {
        const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
        if (it == atoms_.begin()) return 0.0;
        return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }

    double mean() const {
        double s = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) s += masses_[i] * atoms_[i];
        return s;
    }

    double variance() const {
        const double m = mean();
        double s = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const double d = atoms_[i] - m;
            s += masses_[i] * d * d;
        }
        return s;
    }

    double abs_moment(double r) const {
        if (!(r >= 1.0)) throw std::invalid_argument("abs_moment: order must be >= 1");
        double s = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            s += masses_[i] * std::pow(std::fabs(atoms_[i]), r);
        return s;
    }

    std::vector<double> sample(std::size_t n, RandomStream& rng) const {
        if (n == 0) throw std::invalid_argument("sample: n must be positive");
        std::vector<double> out(n);
        for (auto& v : out) v = quantile(rng.uniform01());
        return out;
    }

    // Law of a*X + b with a != 0; atoms are reordered when a < 0.
    StepDistribution affine(double a, double b) const {
        if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b))
            throw std::invalid_argument("affine: need finite a != 0 and finite b");
        std::vector<double> atoms(atoms_.size()), masses(masses_);
        for (std::size_t i = 0; i < atoms_.size(); ++i) atoms[i] = a * atoms_[i] + b;
        if (a < 0.0) {
            std::reverse(atoms.begin(), atoms.end());
            std::reverse(masses.begin(), masses.end());
        }
        return StepDistribution(std::move(atoms), std::move(masses));
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << "step(x=[";
        for (std::size_t i = 0; i < atoms_.size(); ++i) os << (i ? "," : "") << atoms_[i];
        os << "],p=[";
        for (std::size_t i = 0; i < masses_.size(); ++i) os << (i ? "," : "") << masses_[i];
        os << "])";
        return os.str();
    }

private:
    std::vector<double> atoms_;
    std::vector<double> masses_;
    std::vector<double> cum_;
};

}  // namespace mallows
