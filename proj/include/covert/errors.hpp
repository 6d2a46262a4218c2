#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace covert {

/// Argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or invalid configuration / command input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A quadrature did not reach its tolerance; carries what it did reach.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved_error)
        : std::runtime_error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// An iterative solver ran out of iterations. Holds the best point found.
class MaxIterationsError : public std::runtime_error {
public:
    MaxIterationsError(const std::string& what, double best_x, double best_f)
        : std::runtime_error(what), best_x_(best_x), best_f_(best_f) {}

    double best_x() const noexcept { return best_x_; }
    double best_f() const noexcept { return best_f_; }

private:
    double best_x_;
    double best_f_;
};

/// The unimodal minimum of the lower stage could not be bracketed.
class BracketingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No feasible point was ever found by the upper-stage search.
/// `slacks` holds the constraint slacks of the least-violating point seen, if any.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what, std::vector<double> slacks = {})
        : std::runtime_error(what), slacks_(std::move(slacks)) {}

    const std::vector<double>& slacks() const noexcept { return slacks_; }

private:
    std::vector<double> slacks_;
};

}  // namespace covert
