#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pihc {

// Exact (Clopper-Pearson) binomial confidence interval.
struct BinomialCi {
  double lower = 0.0;
  double upper = 1.0;
};

BinomialCi clopper_pearson(std::int64_t successes, std::int64_t trials,
                           double confidence = 0.95);

struct Summary {
  std::int64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance, zero below two observations
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

double poisson_pmf(int x, double lambda);

// Total variation distance between the empirical distribution given by
// histogram[x] = #observations of value x and Poisson(lambda); the tail mass
// beyond the histogram is accounted to the Poisson side.
double total_variation_to_poisson(std::span<const std::int64_t> histogram, double lambda);

}  // namespace pihc
