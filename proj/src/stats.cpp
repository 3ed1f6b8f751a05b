#include "repulse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "repulse/numeric.hpp"

namespace repulse::stats {

std::string FitReport::to_json() const {
  nlohmann::json j;
  j["test"] = test_name;
  j["statistic"] = statistic;
  j["threshold"] = threshold;
  j["n"] = n_samples;
  j["seed"] = seed;
  j["pass"] = pass;
  if (!details.empty()) j["details"] = details;
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

double ks_threshold(std::size_t n, double alpha) {
  if (n == 0) throw std::domain_error("ks_threshold: n must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("ks_threshold: alpha in (0,1)");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) /
         std::sqrt(static_cast<double>(n));
}

FitReport ks_statistic(std::vector<double> samples,
                       const std::function<double(double)>& cdf, double alpha,
                       std::uint64_t seed, std::string name) {
  if (samples.empty()) throw std::domain_error("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    if (!(f >= -1e-12 && f <= 1.0 + 1e-12))
      throw std::domain_error("ks_statistic: cdf left [0,1]");
    const double lo = f - static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n - f;
    d = std::max({d, lo, hi});
  }
  FitReport r;
  r.test_name = std::move(name);
  r.statistic = d;
  r.threshold = ks_threshold(samples.size(), alpha);
  r.n_samples = samples.size();
  r.seed = seed;
  r.pass = d < r.threshold;
  return r;
}

FitReport chisq_geometric(const std::vector<std::int64_t>& counts, double p,
                          double alpha, std::uint64_t seed, std::string name) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("chisq_geometric: p in (0,1)");
  if (counts.empty()) throw std::domain_error("chisq_geometric: no counts");
  double total = 0.0;
  for (const auto c : counts) {
    if (c < 0) throw std::domain_error("chisq_geometric: negative count");
    total += static_cast<double>(c);
  }
  if (total <= 0.0) throw std::domain_error("chisq_geometric: empty sample");

  // Individual bins for k = 1..K-1, one pooled bin for k >= K. K is the
  // largest cut such that every expected count stays >= 5.
  const double q = 1.0 - p;
  std::size_t cut = 1;  // number of individual bins
  while (cut < counts.size()) {
    const double e_next = total * p * std::pow(q, static_cast<double>(cut));
    const double e_tail = total * std::pow(q, static_cast<double>(cut + 1));
    if (e_next < 5.0 || e_tail < 5.0) break;
    ++cut;
  }
  const double e_tail = total * std::pow(q, static_cast<double>(cut));
  if (cut < 1 || e_tail < 5.0 || total * p < 5.0)
    throw std::domain_error("chisq_geometric: sample too small to pool bins");

  std::vector<double> observed(cut + 1, 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::size_t k = i + 1;
    observed[k <= cut ? k - 1 : cut] += static_cast<double>(counts[i]);
  }
  std::vector<double> expected(cut + 1, 0.0);
  for (std::size_t k = 1; k <= cut; ++k)
    expected[k - 1] = total * p * std::pow(q, static_cast<double>(k - 1));
  expected[cut] = e_tail;

  double x2 = 0.0;
  FitReport r;
  for (std::size_t b = 0; b < observed.size(); ++b) {
    const double res = (observed[b] - expected[b]) / std::sqrt(expected[b]);
    x2 += res * res;
    r.details.push_back(res);
  }
  const double df = static_cast<double>(observed.size() - 1);
  r.test_name = std::move(name);
  r.statistic = x2;
  r.threshold = num::chi2_quantile(df, 1.0 - alpha);
  r.n_samples = static_cast<std::size_t>(total);
  r.seed = seed;
  r.pass = x2 < r.threshold;
  std::ostringstream os;
  os << "bins=" << observed.size() << " df=" << df;
  r.note = os.str();
  return r;
}

FitReport exp_rescaled_test(const std::vector<double>& samples, double scale,
                            double alpha, std::uint64_t seed,
                            std::string name) {
  if (!(scale > 0.0)) throw std::domain_error("exp_rescaled_test: scale > 0");
  std::vector<double> z;
  z.reserve(samples.size());
  for (const double v : samples) z.push_back(v / scale);
  return ks_statistic(
      std::move(z), [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); },
      alpha, seed, std::move(name));
}

WeightedRatio weighted_ratio(const std::vector<double>& log_weights,
                             const std::vector<double>& values) {
  if (log_weights.size() != values.size() || log_weights.empty())
    throw std::domain_error("weighted_ratio: need matching nonempty inputs");
  double max_lw = -std::numeric_limits<double>::infinity();
  for (const double lw : log_weights) max_lw = std::max(max_lw, lw);
  if (!std::isfinite(max_lw))
    throw std::domain_error("weighted_ratio: all weights vanished");
  double sw = 0.0, swf = 0.0, sw2 = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double w = std::exp(log_weights[i] - max_lw);
    sw += w;
    swf += w * values[i];
    sw2 += w * w;
  }
  WeightedRatio out;
  out.value = swf / sw;
  out.ess = sw * sw / sw2;
  double s2 = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double w = std::exp(log_weights[i] - max_lw);
    const double d = w * (values[i] - out.value);
    s2 += d * d;
  }
  out.std_error = std::sqrt(s2) / sw;
  out.sum_weight = sw;
  return out;
}

}  // namespace repulse::stats
