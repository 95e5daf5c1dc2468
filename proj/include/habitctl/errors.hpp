#pragma once

#include <stdexcept>
#include <string>

namespace habitctl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of an operation (e.g. wealth below the subsistence boundary).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Time-to-go reached or passed the critical horizon of an explosive regime.
class ExplosionError : public Error {
public:
    ExplosionError(const std::string& what, double t, double s)
        : Error(what), t_(t), s_(s) {}

    double t() const noexcept { return t_; }
    double s() const noexcept { return s_; }

private:
    double t_;
    double s_;
};

/// 1 - 2 a(t;s) Omega(t) vanished.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double t, double s)
        : Error(what), t_(t), s_(s) {}

    double t() const noexcept { return t_; }
    double s() const noexcept { return s_; }

private:
    double t_;
    double s_;
};

/// A closed form produced a non-finite value or left its elementary-function domain.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A feedback policy returned c < Z or a non-finite control.
class PolicyError : public Error {
public:
    using Error::Error;
};

}  // namespace habitctl
