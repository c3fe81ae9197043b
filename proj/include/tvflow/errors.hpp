#ifndef TVFLOW_ERRORS_HPP
#define TVFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tvflow {

/// Exit codes used by the command line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNoConvergence = 3,
  kExitIo = 4,
};

/// Base class for all library errors.  `kind()` is a stable machine-readable
/// tag, `exit_code()` the process exit code the CLI maps the error to.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, std::string message, int exit_code)
      : std::runtime_error(std::move(message)),
        kind_(std::move(kind)),
        exit_code_(exit_code) {}

  const std::string& kind() const { return kind_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string kind_;
  int exit_code_;
};

struct GridMismatch : Error {
  explicit GridMismatch(const std::string& msg)
      : Error("GridMismatch", msg, kExitConfig) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& msg)
      : Error("DimensionError", msg, kExitConfig) {}
};

struct NonMonotoneMap : Error {
  explicit NonMonotoneMap(const std::string& msg)
      : Error("NonMonotoneMap", msg, kExitConfig) {}
};

struct BarrierViolation : Error {
  explicit BarrierViolation(const std::string& msg)
      : Error("BarrierViolation", msg, kExitConfig) {}
};

struct RangeViolation : Error {
  explicit RangeViolation(const std::string& msg)
      : Error("RangeViolation", msg, kExitConfig) {}
};

struct BoundsViolated : Error {
  explicit BoundsViolated(const std::string& msg)
      : Error("BoundsViolated", msg, kExitConfig) {}
};

struct TooLarge : Error {
  explicit TooLarge(const std::string& msg)
      : Error("TooLarge", msg, kExitConfig) {}
};

struct NumericalUnderflow : Error {
  explicit NumericalUnderflow(const std::string& msg)
      : Error("NumericalUnderflow", msg, kExitNoConvergence) {}
};

/// Solver failed to reach its tolerance; carries a diagnostic summary.
struct NoConvergence : Error {
  NoConvergence(const std::string& msg, std::string diag = "")
      : Error("NoConvergence", msg, kExitNoConvergence),
        diagnostics(std::move(diag)) {}
  std::string diagnostics;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg)
      : Error("ValidationError", msg, kExitConfig) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg)
      : Error("ParseError", msg, kExitConfig) {}
};

struct UnknownPreset : Error {
  explicit UnknownPreset(const std::string& msg)
      : Error("UnknownPreset", msg, kExitConfig) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("IoError", msg, kExitIo) {}
};

struct FormatVersionMismatch : Error {
  explicit FormatVersionMismatch(const std::string& msg)
      : Error("FormatVersionMismatch", msg, kExitIo) {}
};

}  // namespace tvflow

#endif
