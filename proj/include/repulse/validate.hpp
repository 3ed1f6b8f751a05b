#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "repulse/stats.hpp"

namespace repulse::validate {

// Frozen suite seed: the acceptance run is a fixed reproducible computation,
// not a fresh statistical experiment.
constexpr std::uint64_t kSuiteSeed = 20240901ULL;

struct CriterionResult {
  int index = 0;
  std::string name;
  std::vector<stats::FitReport> checks;
  double seconds = 0.0;
  std::string error;  // set when the criterion aborted with an exception

  bool pass() const;
  // Check with the largest statistic/threshold ratio; null when empty.
  const stats::FitReport* worst() const;
};

// Runs the twelve acceptance criteria. quick shrinks the Monte Carlo sample
// sizes and PDE grids for a smoke run; the full suite is the gate.
std::vector<CriterionResult> run_all(bool quick, int workers,
                                     std::uint64_t seed = kSuiteSeed);

void print_table(const std::vector<CriterionResult>& results, std::ostream& os);
bool all_pass(const std::vector<CriterionResult>& results);

}  // namespace repulse::validate
