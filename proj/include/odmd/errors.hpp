#ifndef ODMD_ERRORS_HPP
#define ODMD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace odmd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite entries, out-of-range parameters, malformed data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Repeated or numerically coincident eigenvalues, or a rank-deficient
/// exponential basis.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// A denoised entry sits on the boundary of the sign cone where the
/// fidelity term is singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unwritable file.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV or JSON content.
class FormatError : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(const std::string& what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace odmd

#endif  // ODMD_ERRORS_HPP
