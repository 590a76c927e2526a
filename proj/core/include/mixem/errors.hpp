#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace mixem {

/// Raised when a numeric routine cannot reach its requested accuracy
/// (quadrature that refuses to converge, a degenerate EM denominator,
/// an overflowing likelihood). Carries the achieved error estimate when
/// the failing routine has one; NaN otherwise.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what,
                           double achieved_error = std::nan(""))
      : std::runtime_error(what), achieved_error_(achieved_error) {}

  double achieved_error() const { return achieved_error_; }

 private:
  double achieved_error_;
};

}  // namespace mixem
