#pragma once

#include <stdexcept>
#include <string>

namespace akin {

// Invalid argument or violated type invariant.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested regime is outside what an operation supports (e.g. tau0 for delta >= 2).
class UnsupportedRegime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A drift evaluation returned a negative or non-finite value.
class DriftContractError : public std::domain_error {
public:
    DriftContractError(const std::string& what, double t, double y)
        : std::domain_error(what), t_(t), y_(y) {}
    double t() const noexcept { return t_; }
    double y() const noexcept { return y_; }

private:
    double t_;
    double y_;
};

// Path state became non-finite or exceeded the blowup guard.
class NumericalBlowup : public std::runtime_error {
public:
    NumericalBlowup(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class InsufficientData : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A fit window contains a value that cannot be log-transformed.
// `where` is the offending abscissa so the caller can shrink the window.
class ShrinkWindowError : public std::domain_error {
public:
    ShrinkWindowError(const std::string& what, double where)
        : std::domain_error(what), where_(where) {}
    double where() const noexcept { return where_; }

private:
    double where_;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace akin
