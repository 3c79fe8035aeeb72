#pragma once

#include <stdexcept>
#include <string>

namespace scsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid network data or topology (islands, bad bus ids).
class NetworkError : public Error {
  public:
    using Error::Error;
};

/// An iterative solve (power flow or dynamic network solve) did not converge.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& what, double mismatch, int iterations)
        : Error(what), mismatch_(mismatch), iterations_(iterations) {}

    double mismatch() const noexcept { return mismatch_; }
    int iterations() const noexcept { return iterations_; }

  private:
    double mismatch_;
    int iterations_;
};

/// Power flow failed or the device states could not be placed at equilibrium.
class InitializationError : public Error {
  public:
    using Error::Error;
};

/// Scenario file or in-memory scenario fails validation.
class ScenarioError : public Error {
  public:
    using Error::Error;
};

/// A function was called outside its contract (wrong device mode, bad argument).
class ContractError : public Error {
  public:
    using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace scsim
