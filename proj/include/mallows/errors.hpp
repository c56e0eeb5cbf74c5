#pragma once

#include <stdexcept>
#include <string>

namespace mallows {

// Thrown when a requested absolute moment does not exist for the law.
// Callers that want a verdict rather than a value catch this type.
class divergent_moment_error : public std::domain_error {
public:
    explicit divergent_moment_error(const std::string& what) : std::domain_error(what) {}
};

// Thrown when an operation's numeric preconditions cannot be certified:
// unbounded support without a finite inverse-hazard integral, exact
// enumeration beyond the size cap, and similar refusals.
class refusal_error : public std::runtime_error {
public:
    explicit refusal_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mallows
