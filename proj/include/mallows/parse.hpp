#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mallows/distribution.hpp"
#include "mallows/step_distribution.hpp"

// Textual model grammar used by the command line tools and study configs:
//
//   uniform(a=0,b=1)   normal(mu=0,sigma=1)   exponential(rate=1)
//   lognormal(mu=0,sigma=1)   pareto(alpha=3,xm=1)
//   step(x=[0,1],p=[0.5,0.5])
//   shifted(<model>,offset=c)
//
// Parameters may appear in any order and fall back to the defaults above
// when omitted; a bare family name like "normal" is accepted too.

namespace mallows {

using AnyDistribution = std::variant<DistributionModel, StepDistribution>;

inline bool is_continuous(const AnyDistribution& d) {
    return std::holds_alternative<DistributionModel>(d);
}

inline std::string describe(const AnyDistribution& d) {
    if (is_continuous(d)) return std::get<DistributionModel>(d).describe();
    return std::get<StepDistribution>(d).describe();
}

namespace parse_detail {

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        return text_[pos_];
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    void expect(char c) {
        if (!consume(c)) fail(std::string("expected '") + c + "'");
    }
    std::string identifier() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected an identifier");
        return std::string(text_.substr(start, pos_ - start));
    }
    double number() {
        skip_ws();
        const std::string rest(text_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("expected a number");
        }
        pos_ += used;
        return v;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("model grammar: " + msg + " at position " +
                                    std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

struct ParamSet {
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> lists;
    std::optional<AnyDistribution> inner;  // for shifted(<model>,offset=...)

    double scalar_or(const std::string& key, double fallback) const {
        auto it = scalars.find(key);
        return it == scalars.end() ? fallback : it->second;
    }
    const std::vector<double>& list(const std::string& key, const std::string& family) const {
        auto it = lists.find(key);
        if (it == lists.end())
            throw std::invalid_argument("model grammar: " + family + " requires list parameter '" +
                                        key + "'");
        return it->second;
    }
    void check_known(const std::string& family, std::initializer_list<const char*> known) const {
        auto is_known = [&](const std::string& k) {
            for (const char* name : known)
                if (k == name) return true;
            return false;
        };
        for (const auto& [k, _] : scalars)
            if (!is_known(k))
                throw std::invalid_argument("model grammar: unknown parameter '" + k + "' for " +
                                            family);
        for (const auto& [k, _] : lists)
            if (!is_known(k))
                throw std::invalid_argument("model grammar: unknown parameter '" + k + "' for " +
                                            family);
    }
};

inline AnyDistribution parse_model(Cursor& cur);

inline ParamSet parse_params(Cursor& cur, bool allow_inner) {
    ParamSet ps;
    if (!cur.consume('(')) return ps;  // bare family name
    if (cur.consume(')')) return ps;
    bool first = true;
    do {
        if (allow_inner && first) {
            // shifted(<model>, offset=...) : the first argument is a model.
            ps.inner = parse_model(cur);
            first = false;
            continue;
        }
        first = false;
        const std::string key = cur.identifier();
        cur.expect('=');
        if (cur.consume('[')) {
            std::vector<double> vals;
            if (!cur.consume(']')) {
                do {
                    vals.push_back(cur.number());
                } while (cur.consume(','));
                cur.expect(']');
            }
            if (!ps.lists.emplace(key, std::move(vals)).second)
                cur.fail("duplicate parameter '" + key + "'");
        } else {
            if (!ps.scalars.emplace(key, cur.number()).second)
                cur.fail("duplicate parameter '" + key + "'");
        }
    } while (cur.consume(','));
    cur.expect(')');
    return ps;
}

inline AnyDistribution parse_model(Cursor& cur) {
    const std::string family = cur.identifier();
    if (family == "uniform") {
        auto ps = parse_params(cur, false);
        ps.check_known(family, {"a", "b"});
        return DistributionModel::uniform(ps.scalar_or("a", 0.0), ps.scalar_or("b", 1.0));
    }
    if (family == "normal") {
        auto ps = parse_params(cur, false);
        ps.check_known(family, {"mu", "sigma"});
        return DistributionModel::normal(ps.scalar_or("mu", 0.0), ps.scalar_or("sigma", 1.0));
    }
    if (family == "exponential") {
        auto ps = parse_params(cur, false);
        ps.check_known(family, {"rate", "lambda"});
        const double rate = ps.scalars.count("lambda") ? ps.scalar_or("lambda", 1.0)
                                                       : ps.scalar_or("rate", 1.0);
        return DistributionModel::exponential(rate);
    }
    if (family == "lognormal") {
        auto ps = parse_params(cur, false);
        ps.check_known(family, {"mu", "sigma"});
        return DistributionModel::lognormal(ps.scalar_or("mu", 0.0), ps.scalar_or("sigma", 1.0));
    }
    if (family == "pareto") {
        auto ps = parse_params(cur, false);
        ps.check_known(family, {"alpha", "xm"});
        return DistributionModel::pareto(ps.scalar_or("alpha", 3.0), ps.scalar_or("xm", 1.0));
    }
    if (family == "step") {
        auto ps = parse_params(cur, false);
        ps.check_known(family, {"x", "p"});
        return StepDistribution(ps.list("x", family), ps.list("p", family));
    }
    if (family == "shifted") {
        auto ps = parse_params(cur, true);
        ps.check_known(family, {"offset"});
        if (!ps.inner)
            throw std::invalid_argument("model grammar: shifted needs an inner model");
        if (!is_continuous(*ps.inner))
            throw std::invalid_argument("model grammar: shifted applies to continuous models;"
                                        " use step atoms directly");
        return std::get<DistributionModel>(*ps.inner).shifted(ps.scalar_or("offset", 0.0));
    }
    throw std::invalid_argument(
        "model grammar: unknown family '" + family +
        "' (known: uniform, normal, exponential, lognormal, pareto, step, shifted)");
}

}  // namespace parse_detail

inline AnyDistribution parse_distribution(std::string_view text) {
    parse_detail::Cursor cur(text);
    AnyDistribution d = parse_detail::parse_model(cur);
    if (!cur.at_end()) cur.fail("trailing input after model");
    return d;
}

}  // namespace mallows
