#pragma once

#include <stdexcept>
#include <string>

namespace v2xsec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the model or function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The result does not fit in a double.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// An integral that does not exist over the requested bounds.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// The integrand produced NaN or infinity.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature ran out of depth before reaching the tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
        : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

/// A handshake transcript or credential did not verify.
class AuthenticationError : public Error {
public:
    using Error::Error;
};

/// Append to a time-ordered log went backwards in time.
class OrderingError : public Error {
public:
    using Error::Error;
};

}  // namespace v2xsec
