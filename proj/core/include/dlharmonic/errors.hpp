#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dlh {

// Every failure raised by the library derives from Error. The CLI maps each
// concrete type to its own exit code, see exit_code().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 10; }
};

// A vertex or boundary computation needed geodesic information below the
// known prefix of a boundary point.
class InsufficientDepth : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 11; }
};

class HorocycleMismatch : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 12; }
};

// Group operations on DL(q,r) exist only for q == r.
class ColorMismatch : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 13; }
};

// Malformed walk or vertex input. The message names the offending key.
class InvalidInput : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NoBracket : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 14; }
};

class NotStochastic : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 15; }
};

class Unclassifiable : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 16; }
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::uint64_t iterations, double residual)
      : Error("coefficient solver did not converge after " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  std::uint64_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }
  int exit_code() const noexcept override { return 17; }

 private:
  std::uint64_t iterations_;
  double residual_;
};

class TruncationExceeded : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 18; }
};

class DepthExceeded : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 19; }
};

}  // namespace dlh
