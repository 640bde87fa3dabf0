#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace tabalign::verify {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  unsigned threads = 1;
  /// Criterion ids to run; empty means all.
  std::vector<int> only;
};

/// Runs the acceptance criteria in order.  `on_result` sees each result as
/// soon as it is available.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3  title  (1.23 s)  detail"
std::string format_result(const CriterionResult& r);

}  // namespace tabalign::verify
