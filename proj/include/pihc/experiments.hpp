#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pihc/pattern.hpp"
#include "pihc/pipeline.hpp"
#include "pihc/stats.hpp"

namespace pihc {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind { EventA, LowDegree, HittingTime, Walkup };
enum class SolverChoice { Pipeline, Exact, PipelineFallback };
enum class OutputFormat { Csv, Json };

const char* to_string(ExperimentKind k);
const char* to_string(SolverChoice s);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::EventA;
  std::vector<int> n_values;
  Pattern pattern;
  double c = 0.0;
  int trials = 1;
  std::uint64_t master_seed = 0;
  SolverChoice solver = SolverChoice::PipelineFallback;
  int walkup_m = 500;  // choice-graph side size, walkup only
  int threads = 1;
  PipelineConfig pipeline;
};

// One Monte Carlo trial. Fully determined by (master seed, trial index):
// wall_ms is the only schedule-dependent field and is never emitted.
struct TrialRecord {
  std::int64_t trial = -1;
  std::uint64_t seed = 0;
  int n = 0;
  double c = 0.0;
  double p = 0.0;
  std::int64_t m_star = -1;
  bool success = false;
  std::string outcome;  // "success" or the failure stage
  std::int64_t x_count = -1, y_count = -1;
  int good = -1, bad = -1, dangerous = -1;
  double wall_ms = 0.0;
};

// Aggregate per n (per m for the matching experiment). Fields that do not
// apply to an experiment hold NaN and are emitted empty.
struct GroupSummary {
  int n = 0;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
  double rate = 0.0;
  BinomialCi ci;
  double target = 0.0;      // closed-form limit value when one exists
  double mean_value = 0.0;  // low-degree: mean count; hitting: mean m_star
  double tv_distance = 0.0;
  std::vector<std::pair<std::string, std::int64_t>> failure_breakdown;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> records;
  std::vector<GroupSummary> groups;
  std::vector<std::vector<std::int64_t>> histograms;  // per group, low-degree only
};

// Empirical probability of the degree event at the critical density,
// against the closed-form limit exp(-exp(-c)/4) resp. exp(-exp(-c)).
ExperimentResult mc_event_A(const ExperimentConfig& cfg);

// Mean and histogram of the low-degree count (alternating: vertices with
// in- and out-degree one; otherwise: vertices of total degree one) at the
// critical density, against the Poisson limit.
ExperimentResult mc_low_degree(const ExperimentConfig& cfg);

// Patterned Hamilton cycles in the hitting-time prefix, by the configured
// solver; successes are verified against that prefix, failures tallied by
// first failing stage.
ExperimentResult mc_hitting_time(const ExperimentConfig& cfg);

// Perfect-matching rate of the two-choices bipartite model.
ExperimentResult mc_walkup(int m, int trials, std::uint64_t seed);
ExperimentResult mc_walkup(const ExperimentConfig& cfg);

// Stable tabular form: one row per trial plus one summary row per group,
// identical bytes for identical configs regardless of worker count. The
// column set is fixed across experiments; inapplicable cells stay empty.
void emit(const ExperimentResult& result, OutputFormat format, std::ostream& os);

std::vector<std::string> emit_columns();

}  // namespace pihc
