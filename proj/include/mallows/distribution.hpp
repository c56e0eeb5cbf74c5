#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "mallows/errors.hpp"
#include "mallows/gaussian.hpp"
#include "mallows/quadrature.hpp"
#include "mallows/rng.hpp"

// Continuous laws with the accessors the distance and hazard machinery
// needs: cdf, survival, density, quantile, and (where a closed form exists)
// the partial quantile moments
//
//     M1(p) = integral of Q(t)   dt over (0,p)
//     M2(p) = integral of Q(t)^2 dt over (0,p)
//
// which turn order-2 coupling integrals against piecewise constant laws
// into O(1) work per cell. survival is always computed on its own rather
// than as 1 - cdf so right-tail masses keep relative accuracy, and
// quantile_upper takes the upper-tail mass directly for the same reason.

namespace mallows {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ContinuousLaw {
public:
    virtual ~ContinuousLaw() = default;

    virtual double cdf(double x) const = 0;
    virtual double survival(double x) const = 0;
    virtual double pdf(double x) const = 0;
    virtual double quantile(double p) const = 0;           // p in (0,1)
    virtual double quantile_upper(double q) const {        // Q(1-q), q in (0,1)
        return quantile(1.0 - q);
    }
    virtual double mean() const = 0;
    virtual double variance() const = 0;
    virtual double support_lower() const = 0;              // may be -inf
    virtual double support_upper() const = 0;              // may be +inf

    // sup { r : E|X|^r < inf }; +inf for light tails.
    virtual double max_finite_moment_order() const { return kInf; }

    // E|X|^r when a closed form is available.
    virtual std::optional<double> abs_moment_closed(double /*r*/) const { return std::nullopt; }

    virtual bool has_partial_moments() const { return false; }
    virtual void partial_moments(double /*p*/, double& /*m1*/, double& /*m2*/) const {
        throw std::logic_error("partial_moments: not available for this law");
    }

    virtual std::string describe() const = 0;
};

// Value-semantic handle. Copies share the immutable law object.
class DistributionModel {
public:
    explicit DistributionModel(std::shared_ptr<const ContinuousLaw> law) : law_(std::move(law)) {
        if (!law_) throw std::invalid_argument("DistributionModel: null law");
    }

    double cdf(double x) const { return law_->cdf(x); }
    double survival(double x) const { return law_->survival(x); }
    double pdf(double x) const { return law_->pdf(x); }
    double quantile(double p) const { return law_->quantile(p); }
    double quantile_upper(double q) const { return law_->quantile_upper(q); }
    double mean() const { return law_->mean(); }
    double variance() const { return law_->variance(); }
    double support_lower() const { return law_->support_lower(); }
    double support_upper() const { return law_->support_upper(); }
    double max_finite_moment_order() const { return law_->max_finite_moment_order(); }
    std::optional<double> abs_moment_closed(double r) const { return law_->abs_moment_closed(r); }
    bool has_partial_moments() const { return law_->has_partial_moments(); }
    void partial_moments(double p, double& m1, double& m2) const { law_->partial_moments(p, m1, m2); }
    std::string describe() const { return law_->describe(); }

    bool bounded_support() const {
        return std::isfinite(support_lower()) && std::isfinite(support_upper());
    }

    // Inverse-transform sample of size n, unsorted.
    std::vector<double> sample(std::size_t n, RandomStream& rng) const {
        if (n == 0) throw std::invalid_argument("sample: n must be positive");
        std::vector<double> out(n);
        for (auto& v : out) v = quantile(rng.uniform01());
        return out;
    }

    DistributionModel shifted(double offset) const;

    static DistributionModel uniform(double a, double b);
    static DistributionModel normal(double mu, double sigma);
    static DistributionModel exponential(double rate);
    static DistributionModel lognormal(double mu, double sigma);
    static DistributionModel pareto(double alpha, double xm);

private:
    std::shared_ptr<const ContinuousLaw> law_;
};

namespace detail {

inline std::string format_params(std::initializer_list<std::pair<const char*, double>> ps) {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [k, v] : ps) {
        os << (first ? "" : ",") << k << "=" << v;
        first = false;
    }
    return os.str();
}

class UniformLaw final : public ContinuousLaw {
public:
    UniformLaw(double a, double b) : a_(a), b_(b) {
        if (!(std::isfinite(a) && std::isfinite(b) && a < b))
            throw std::invalid_argument("uniform: need finite a < b");
    }
    double cdf(double x) const override {
        if (x <= a_) return 0.0;
        if (x >= b_) return 1.0;
        return (x - a_) / (b_ - a_);
    }
    double survival(double x) const override {
        if (x <= a_) return 1.0;
        if (x >= b_) return 0.0;
        return (b_ - x) / (b_ - a_);
    }
    double pdf(double x) const override {
        return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
    }
    double quantile(double p) const override { return a_ + (b_ - a_) * p; }
    double quantile_upper(double q) const override { return b_ - (b_ - a_) * q; }
    double mean() const override { return 0.5 * (a_ + b_); }
    double variance() const override { return (b_ - a_) * (b_ - a_) / 12.0; }
    double support_lower() const override { return a_; }
    double support_upper() const override { return b_; }
    std::optional<double> abs_moment_closed(double r) const override {
        // integral of |x|^r / (b-a) with antiderivative x|x|^r/(r+1)
        auto g = [r](double x) { return x * std::pow(std::fabs(x), r) / (r + 1.0); };
        return (g(b_) - g(a_)) / (b_ - a_);
    }
    bool has_partial_moments() const override { return true; }
    void partial_moments(double p, double& m1, double& m2) const override {
        const double w = b_ - a_;
        m1 = a_ * p + 0.5 * w * p * p;
        const double c = a_ + w * p;
        m2 = (c * c * c - a_ * a_ * a_) / (3.0 * w);
    }
    std::string describe() const override {
        return "uniform(" + format_params({{"a", a_}, {"b", b_}}) + ")";
    }

private:
    double a_, b_;
};

class NormalLaw final : public ContinuousLaw {
public:
    NormalLaw(double mu, double sigma) : mu_(mu), sigma_(sigma) {
        if (!(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0))
            throw std::invalid_argument("normal: need finite mu and sigma > 0");
    }
    double cdf(double x) const override { return gaussian::cdf((x - mu_) / sigma_); }
    double survival(double x) const override { return gaussian::survival((x - mu_) / sigma_); }
    double pdf(double x) const override { return gaussian::pdf((x - mu_) / sigma_) / sigma_; }
    double quantile(double p) const override { return mu_ + sigma_ * gaussian::quantile(p); }
    double quantile_upper(double q) const override {
        return mu_ + sigma_ * gaussian::quantile_from_upper(q);
    }
    double mean() const override { return mu_; }
    double variance() const override { return sigma_ * sigma_; }
    double support_lower() const override { return -kInf; }
    double support_upper() const override { return kInf; }
    std::optional<double> abs_moment_closed(double r) const override {
        if (mu_ != 0.0) return std::nullopt;
        // E|X|^r = sigma^r 2^{r/2} Gamma((r+1)/2) / sqrt(pi)
        constexpr double sqrt_pi = 1.7724538509055160273;
        return std::pow(sigma_, r) * std::pow(2.0, 0.5 * r) *
               std::tgamma(0.5 * (r + 1.0)) / sqrt_pi;
    }
    bool has_partial_moments() const override { return true; }
    void partial_moments(double p, double& m1, double& m2) const override {
        if (p <= 0.0) { m1 = 0.0; m2 = 0.0; return; }
        if (p >= 1.0) { m1 = mu_; m2 = mu_ * mu_ + sigma_ * sigma_; return; }
        const double z = gaussian::quantile(p);
        const double phi = gaussian::pdf(z);
        // integral of z dp = -phi(z(p)), integral of z^2 dp = p - z phi(z)
        const double i1 = -phi;
        const double i2 = p - z * phi;
        m1 = mu_ * p + sigma_ * i1;
        m2 = mu_ * mu_ * p + 2.0 * mu_ * sigma_ * i1 + sigma_ * sigma_ * i2;
    }
    std::string describe() const override {
        return "normal(" + format_params({{"mu", mu_}, {"sigma", sigma_}}) + ")";
    }

private:
    double mu_, sigma_;
};

class ExponentialLaw final : public ContinuousLaw {
public:
    explicit ExponentialLaw(double rate) : rate_(rate) {
        if (!(std::isfinite(rate) && rate > 0.0))
            throw std::invalid_argument("exponential: need rate > 0");
    }
    double cdf(double x) const override { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
    double survival(double x) const override { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
    double pdf(double x) const override { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
    double quantile(double p) const override { return -std::log1p(-p) / rate_; }
    double quantile_upper(double q) const override { return -std::log(q) / rate_; }
    double mean() const override { return 1.0 / rate_; }
    double variance() const override { return 1.0 / (rate_ * rate_); }
    double support_lower() const override { return 0.0; }
    double support_upper() const override { return kInf; }
    std::optional<double> abs_moment_closed(double r) const override {
        return std::tgamma(r + 1.0) / std::pow(rate_, r);
    }
    bool has_partial_moments() const override { return true; }
    void partial_moments(double p, double& m1, double& m2) const override {
        if (p <= 0.0) { m1 = 0.0; m2 = 0.0; return; }
        if (p >= 1.0) { m1 = 1.0 / rate_; m2 = 2.0 / (rate_ * rate_); return; }
        const double q = 1.0 - p;
        const double lq = std::log(q);
        m1 = (q * lq + p) / rate_;
        m2 = (2.0 - q * (lq * lq - 2.0 * lq + 2.0)) / (rate_ * rate_);
    }
    std::string describe() const override {
        return "exponential(" + format_params({{"rate", rate_}}) + ")";
    }

private:
    double rate_;
};

class LognormalLaw final : public ContinuousLaw {
public:
    LognormalLaw(double mu, double sigma) : mu_(mu), sigma_(sigma) {
        if (!(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0))
            throw std::invalid_argument("lognormal: need finite mu and sigma > 0");
    }
    double cdf(double x) const override {
        return x <= 0.0 ? 0.0 : gaussian::cdf((std::log(x) - mu_) / sigma_);
    }
    double survival(double x) const override {
        return x <= 0.0 ? 1.0 : gaussian::survival((std::log(x) - mu_) / sigma_);
    }
    double pdf(double x) const override {
        if (x <= 0.0) return 0.0;
        const double z = (std::log(x) - mu_) / sigma_;
        return gaussian::pdf(z) / (x * sigma_);
    }
    double quantile(double p) const override {
        return std::exp(mu_ + sigma_ * gaussian::quantile(p));
    }
    double quantile_upper(double q) const override {
        return std::exp(mu_ + sigma_ * gaussian::quantile_from_upper(q));
    }
    double mean() const override { return std::exp(mu_ + 0.5 * sigma_ * sigma_); }
    double variance() const override {
        return std::expm1(sigma_ * sigma_) * std::exp(2.0 * mu_ + sigma_ * sigma_);
    }
    double support_lower() const override { return 0.0; }
    double support_upper() const override { return kInf; }
    std::optional<double> abs_moment_closed(double r) const override {
        return std::exp(r * mu_ + 0.5 * r * r * sigma_ * sigma_);
    }
    bool has_partial_moments() const override { return true; }
    void partial_moments(double p, double& m1, double& m2) const override {
        if (p <= 0.0) { m1 = 0.0; m2 = 0.0; return; }
        const double s2 = sigma_ * sigma_;
        if (p >= 1.0) {
            m1 = std::exp(mu_ + 0.5 * s2);
            m2 = std::exp(2.0 * mu_ + 2.0 * s2);
            return;
        }
        const double z = gaussian::quantile(p);
        m1 = std::exp(mu_ + 0.5 * s2) * gaussian::cdf(z - sigma_);
        m2 = std::exp(2.0 * mu_ + 2.0 * s2) * gaussian::cdf(z - 2.0 * sigma_);
    }
    std::string describe() const override {
        return "lognormal(" + format_params({{"mu", mu_}, {"sigma", sigma_}}) + ")";
    }

private:
    double mu_, sigma_;
};

class ParetoLaw final : public ContinuousLaw {
public:
    ParetoLaw(double alpha, double xm) : alpha_(alpha), xm_(xm) {
        if (!(std::isfinite(alpha) && alpha > 2.0))
            throw std::invalid_argument("pareto: need alpha > 2 so the variance exists");
        if (!(std::isfinite(xm) && xm > 0.0))
            throw std::invalid_argument("pareto: need scale xm > 0");
    }
    double cdf(double x) const override {
        return x <= xm_ ? 0.0 : -std::expm1(alpha_ * std::log(xm_ / x));
    }
    double survival(double x) const override {
        return x <= xm_ ? 1.0 : std::exp(alpha_ * std::log(xm_ / x));
    }
    double pdf(double x) const override {
        return x < xm_ ? 0.0 : (alpha_ / x) * std::pow(xm_ / x, alpha_);
    }
    double quantile(double p) const override {
        return xm_ * std::exp(-std::log1p(-p) / alpha_);
    }
    double quantile_upper(double q) const override {
        return xm_ * std::pow(q, -1.0 / alpha_);
    }
    double mean() const override { return alpha_ * xm_ / (alpha_ - 1.0); }
    double variance() const override {
        return alpha_ * xm_ * xm_ / ((alpha_ - 1.0) * (alpha_ - 1.0) * (alpha_ - 2.0));
    }
    double support_lower() const override { return xm_; }
    double support_upper() const override { return kInf; }
    double max_finite_moment_order() const override { return alpha_; }
    std::optional<double> abs_moment_closed(double r) const override {
        if (r >= alpha_) return std::nullopt;  // divergent; callers gate on the order
        return alpha_ * std::pow(xm_, r) / (alpha_ - r);
    }
    bool has_partial_moments() const override { return true; }
    void partial_moments(double p, double& m1, double& m2) const override {
        if (p <= 0.0) { m1 = 0.0; m2 = 0.0; return; }
        const double q = 1.0 - p;
        // integral over (0,p) of xm (1-t)^{-k/alpha} dt, k = 1, 2
        m1 = xm_ * alpha_ / (alpha_ - 1.0) * (1.0 - std::pow(q, 1.0 - 1.0 / alpha_));
        m2 = xm_ * xm_ * alpha_ / (alpha_ - 2.0) * (1.0 - std::pow(q, 1.0 - 2.0 / alpha_));
    }
    std::string describe() const override {
        return "pareto(" + format_params({{"alpha", alpha_}, {"xm", xm_}}) + ")";
    }

private:
    double alpha_, xm_;
};

// Law of X + c for a wrapped base law.
class ShiftedLaw final : public ContinuousLaw {
public:
    ShiftedLaw(std::shared_ptr<const ContinuousLaw> base, double offset)
        : base_(std::move(base)), c_(offset) {
        if (!std::isfinite(c_)) throw std::invalid_argument("shifted: offset must be finite");
    }
    double cdf(double x) const override { return base_->cdf(x - c_); }
    double survival(double x) const override { return base_->survival(x - c_); }
    double pdf(double x) const override { return base_->pdf(x - c_); }
    double quantile(double p) const override { return base_->quantile(p) + c_; }
    double quantile_upper(double q) const override { return base_->quantile_upper(q) + c_; }
    double mean() const override { return base_->mean() + c_; }
    double variance() const override { return base_->variance(); }
    double support_lower() const override { return base_->support_lower() + c_; }
    double support_upper() const override { return base_->support_upper() + c_; }
    double max_finite_moment_order() const override { return base_->max_finite_moment_order(); }
    std::optional<double> abs_moment_closed(double r) const override {
        // |X + c|^r has no generic closed form; fall back to quadrature.
        return c_ == 0.0 ? base_->abs_moment_closed(r) : std::nullopt;
    }
    bool has_partial_moments() const override { return base_->has_partial_moments(); }
    void partial_moments(double p, double& m1, double& m2) const override {
        double b1 = 0.0, b2 = 0.0;
        base_->partial_moments(p, b1, b2);
        const double pc = p <= 0.0 ? 0.0 : (p >= 1.0 ? 1.0 : p);
        m1 = b1 + c_ * pc;
        m2 = b2 + 2.0 * c_ * b1 + c_ * c_ * pc;
    }
    std::string describe() const override {
        std::ostringstream os;
        os.precision(17);
        os << "shifted(" << base_->describe() << ",offset=" << c_ << ")";
        return os.str();
    }

private:
    std::shared_ptr<const ContinuousLaw> base_;
    double c_;
};

}  // namespace detail

inline DistributionModel DistributionModel::shifted(double offset) const {
    return DistributionModel(std::make_shared<detail::ShiftedLaw>(law_, offset));
}
inline DistributionModel DistributionModel::uniform(double a, double b) {
    return DistributionModel(std::make_shared<detail::UniformLaw>(a, b));
}
inline DistributionModel DistributionModel::normal(double mu, double sigma) {
    return DistributionModel(std::make_shared<detail::NormalLaw>(mu, sigma));
}
inline DistributionModel DistributionModel::exponential(double rate) {
    return DistributionModel(std::make_shared<detail::ExponentialLaw>(rate));
}
inline DistributionModel DistributionModel::lognormal(double mu, double sigma) {
    return DistributionModel(std::make_shared<detail::LognormalLaw>(mu, sigma));
}
inline DistributionModel DistributionModel::pareto(double alpha, double xm) {
    return DistributionModel(std::make_shared<detail::ParetoLaw>(alpha, xm));
}

// E|X|^r for r >= 1, by closed form when available and three-piece
// quadrature otherwise (central Gauss-Kronrod plus one transformed panel
// scheme per tail). Throws divergent_moment_error when the moment does not
// exist.
inline double abs_moment(const DistributionModel& m, double r) {
    if (!(r >= 1.0)) throw std::invalid_argument("abs_moment: order must be >= 1");
    if (r >= m.max_finite_moment_order())
        throw divergent_moment_error("abs_moment: E|X|^" + std::to_string(r) +
                                     " diverges for " + m.describe());
    if (auto v = m.abs_moment_closed(r)) return *v;
    constexpr double cut = 1e-3;
    auto lower = quad::integrate_decaying(
        [&](double p) { return std::pow(std::fabs(m.quantile(p)), r); }, cut);
    auto upper = quad::integrate_decaying(
        [&](double q) { return std::pow(std::fabs(m.quantile_upper(q)), r); }, cut);
    auto mid = quad::integrate(
        [&](double p) { return std::pow(std::fabs(m.quantile(p)), r); }, cut, 1.0 - cut, 1e-10);
    if (!lower.converged || !upper.converged)
        throw divergent_moment_error("abs_moment: tail integration failed to converge for " +
                                     m.describe());
    return lower.value + mid.value + upper.value;
}

}  // namespace mallows
