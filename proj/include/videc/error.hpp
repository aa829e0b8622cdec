#ifndef VIDEC_ERROR_HPP
#define VIDEC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace videc {

/// Base class for all toolkit errors. The CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad user input: flags, config values, or API preconditions (exit code 2).
class ConfigError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Malformed, missing or inconsistent data (exit code 3).
class DataError : public Error {
public:
  enum class Kind { missing_file, dimension_mismatch, non_finite, malformed, io };

  DataError(Kind kind, const std::string &what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }
  int exit_code() const noexcept override { return 3; }

private:
  Kind kind_;
};

/// Ill-conditioned or degenerate numerics (exit code 4).
class NumericalError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

} // namespace videc

#endif // VIDEC_ERROR_HPP
