#include "pihc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>

namespace pihc {

BinomialCi clopper_pearson(std::int64_t successes, std::int64_t trials, double confidence) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("confidence interval needs 0 <= successes <= trials, trials > 0");
  if (confidence <= 0.0 || confidence >= 1.0)
    throw std::invalid_argument("confidence must lie strictly between 0 and 1");

  using boost::math::binomial_distribution;
  const double alpha = (1.0 - confidence) / 2.0;
  const double t = static_cast<double>(trials);
  const double s = static_cast<double>(successes);
  BinomialCi ci;
  ci.lower = successes == 0 ? 0.0 : binomial_distribution<>::find_lower_bound_on_p(t, s, alpha);
  ci.upper =
      successes == trials ? 1.0 : binomial_distribution<>::find_upper_bound_on_p(t, s, alpha);
  return ci;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  s.min = s.max = values.front();
  double mean = 0.0, m2 = 0.0;
  std::int64_t i = 0;
  for (double v : values) {
    ++i;
    const double delta = v - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (v - mean);
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = mean;
  s.variance = s.count > 1 ? m2 / static_cast<double>(s.count - 1) : 0.0;
  return s;
}

double poisson_pmf(int x, double lambda) {
  if (x < 0) return 0.0;
  if (lambda <= 0.0) return x == 0 ? 1.0 : 0.0;
  return std::exp(-lambda + x * std::log(lambda) - std::lgamma(x + 1.0));
}

double total_variation_to_poisson(std::span<const std::int64_t> histogram, double lambda) {
  std::int64_t total = 0;
  for (std::int64_t h : histogram) {
    if (h < 0) throw std::invalid_argument("histogram counts must be non-negative");
    total += h;
  }
  if (total == 0) throw std::invalid_argument("histogram must contain observations");

  double tv = 0.0;
  double covered = 0.0;
  for (std::size_t x = 0; x < histogram.size(); ++x) {
    const double pmf = poisson_pmf(static_cast<int>(x), lambda);
    const double emp = static_cast<double>(histogram[x]) / static_cast<double>(total);
    tv += std::abs(emp - pmf);
    covered += pmf;
  }
  tv += std::max(0.0, 1.0 - covered);
  return tv / 2.0;
}

}  // namespace pihc
