#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mixem {

enum class VerifyLevel { Fast, Full };

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed() const;
};

/// Runs the library's invariant suites. Fast covers every module in
/// a few seconds; Full adds the contraction-theorem grid, the
/// closed-form derivative grids, and larger randomized batches.
/// Streams one line per check to log when given.
VerifyReport run_verification(VerifyLevel level, std::ostream* log = nullptr);

}  // namespace mixem
