#pragma once

#include <string>
#include <vector>

#include "bwlab/lab/config.hpp"
#include "bwlab/lab/report.hpp"

namespace bwlab::lab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  bool gating = true;  // diagnostic criteria report but do not fail the suite
  std::string detail;
  double seconds = 0.0;
  std::vector<StatReport> reports;
};

const std::vector<int>& criterion_ids();
std::string criterion_title(int id);

/// Criteria 1, 4 and 11 are closed-form checks; the others run the
/// experiment configurations listed under "acceptance" in the defaults.
CriterionResult run_criterion(int id, const Defaults& defaults, int threads = 1);

// "PASS  5  embedding exponent: ..." (FAIL lines of diagnostic criteria say so)
std::string format_line(const CriterionResult& r);

}  // namespace bwlab::lab
