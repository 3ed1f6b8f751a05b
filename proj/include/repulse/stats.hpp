#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace repulse::stats {

struct FitReport {
  std::string test_name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
  std::vector<double> details;  // per-bin residuals, auxiliary values
  std::string note;
  std::string to_json() const;
};

// Kolmogorov acceptance threshold c(alpha)/sqrt(n); alpha = 0.01 gives the
// conventional 1.63/sqrt(n).
double ks_threshold(std::size_t n, double alpha = 0.01);

// Two-sided KS test of samples against a continuous CDF.
FitReport ks_statistic(std::vector<double> samples,
                       const std::function<double(double)>& cdf,
                       double alpha = 0.01, std::uint64_t seed = 0,
                       std::string name = "ks");

// Pearson chi-square test of counts[k-1] = #{samples == k} against a
// geometric law on {1,2,...} with known parameter p. Bins are pooled from the
// tail until every expected count is >= 5; throws std::domain_error when
// fewer than two bins survive pooling.
FitReport chisq_geometric(const std::vector<std::int64_t>& counts, double p,
                          double alpha = 1e-3, std::uint64_t seed = 0,
                          std::string name = "chisq_geometric");

// KS test of samples/scale against Exp(1).
FitReport exp_rescaled_test(const std::vector<double>& samples, double scale,
                            double alpha = 0.01, std::uint64_t seed = 0,
                            std::string name = "exp_rescaled");

// Self-normalized weighted-ratio estimate sum(w f)/sum(w) from log-weights,
// with delta-method standard error and effective sample size (sum w)^2/sum w^2.
struct WeightedRatio {
  double value = 0.0;
  double std_error = 0.0;
  double ess = 0.0;
  double sum_weight = 0.0;  // normalized by max weight; diagnostic only
};
WeightedRatio weighted_ratio(const std::vector<double>& log_weights,
                             const std::vector<double>& values);

}  // namespace repulse::stats
