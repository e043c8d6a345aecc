#include "pihc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "pihc/digraph.hpp"
#include "pihc/hc_solve.hpp"
#include "pihc/process.hpp"
#include "pihc/sin_tout.hpp"

namespace pihc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Runs body(0..count-1) over a worker pool. Bodies write to disjoint slots;
// the first exception wins and is rethrown after the pool drains.
void run_indexed(std::int64_t count, int threads,
                 const std::function<void(std::int64_t)>& body) {
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::int64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int pool =
      std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::int64_t>(count, 64))));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    workers.reserve(pool);
    for (int t = 0; t < pool; ++t) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

DegreeVariant variant_of(const Pattern& p) {
  switch (classify(p)) {
    case PatternClass::Alternating:
      return DegreeVariant::AlternatingA;
    case PatternClass::NonAlternating:
      return DegreeVariant::NonAlternatingA;
    default:
      throw ConfigError("experiments need a primitive pattern of length >= 2");
  }
}

void validate_common(const ExperimentConfig& cfg, int min_n) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  if (cfg.n_values.empty()) throw ConfigError("at least one n value is required");
  variant_of(cfg.pattern);
  for (int n : cfg.n_values)
    if (n < min_n) throw ConfigError("n must be at least " + std::to_string(min_n));
}

GroupSummary blank_summary(int n, std::int64_t trials) {
  GroupSummary g;
  g.n = n;
  g.trials = trials;
  g.rate = kNaN;
  g.ci = {kNaN, kNaN};
  g.target = kNaN;
  g.mean_value = kNaN;
  g.tv_distance = kNaN;
  return g;
}

void fill_rate(GroupSummary& g) {
  g.rate = static_cast<double>(g.successes) / static_cast<double>(g.trials);
  g.ci = clopper_pearson(g.successes, g.trials);
}

// Degree-event and low-degree trials share the degree-only sampler.
struct DegreeTrial {
  bool event = false;
  std::int64_t x = 0, y = 0;
};

DegreeTrial degree_trial(int n, double p, DegreeVariant variant, Rng& rng,
                         std::vector<std::int32_t>& in_deg, std::vector<std::int32_t>& out_deg) {
  sample_dnp_degrees(n, p, rng, in_deg, out_deg);
  DegreeTrial t;
  t.event = true;
  for (int v = 0; v < n; ++v) {
    const std::int32_t in = in_deg[v];
    const std::int32_t out = out_deg[v];
    if (variant == DegreeVariant::AlternatingA) {
      if (in < 2 && out < 2) t.event = false;
    } else {
      if (in + out < 2) t.event = false;
    }
    if (in == 1 && out == 1) ++t.x;
    if (in + out == 1) ++t.y;
  }
  return t;
}

std::vector<std::pair<std::string, std::int64_t>> tally_failures(
    std::span<const TrialRecord> records) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& r : records)
    if (!r.success) ++counts[r.outcome];
  return {counts.begin(), counts.end()};
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::EventA:
      return "eventA";
    case ExperimentKind::LowDegree:
      return "lowdeg";
    case ExperimentKind::HittingTime:
      return "hitting";
    case ExperimentKind::Walkup:
      return "walkup";
  }
  return "?";
}

const char* to_string(SolverChoice s) {
  switch (s) {
    case SolverChoice::Pipeline:
      return "pipeline";
    case SolverChoice::Exact:
      return "exact";
    case SolverChoice::PipelineFallback:
      return "pipeline+fallback";
  }
  return "?";
}

ExperimentResult mc_event_A(const ExperimentConfig& cfg) {
  validate_common(cfg, 3);
  const DegreeVariant variant = variant_of(cfg.pattern);
  const bool alternating = variant == DegreeVariant::AlternatingA;
  const double target = std::exp(-std::exp(-cfg.c) * (alternating ? 0.25 : 1.0));

  ExperimentResult res;
  res.config = cfg;
  const std::int64_t per_group = cfg.trials;
  const std::int64_t total = per_group * static_cast<std::int64_t>(cfg.n_values.size());
  res.records.resize(total);

  std::vector<double> densities;
  for (int n : cfg.n_values) densities.push_back(threshold_p(variant, n, cfg.c));

  run_indexed(total, cfg.threads, [&](std::int64_t i) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t gi = static_cast<std::size_t>(i / per_group);
    const int n = cfg.n_values[gi];
    const double p = densities[gi];
    TrialRecord& rec = res.records[i];
    rec.trial = i;
    rec.seed = keyed_u64(cfg.master_seed, static_cast<std::uint64_t>(i));
    rec.n = n;
    rec.c = cfg.c;
    rec.p = p;
    Rng rng(rec.seed);
    std::vector<std::int32_t> in_deg, out_deg;
    const DegreeTrial t = degree_trial(n, p, variant, rng, in_deg, out_deg);
    rec.success = t.event;
    rec.outcome = t.event ? "success" : "event_failed";
    rec.x_count = t.x;
    rec.y_count = t.y;
    rec.wall_ms = elapsed_ms(start);
  });

  for (std::size_t gi = 0; gi < cfg.n_values.size(); ++gi) {
    GroupSummary g = blank_summary(cfg.n_values[gi], per_group);
    for (std::int64_t t = 0; t < per_group; ++t)
      g.successes += res.records[gi * per_group + t].success;
    fill_rate(g);
    g.target = target;
    res.groups.push_back(g);
  }
  return res;
}

ExperimentResult mc_low_degree(const ExperimentConfig& cfg) {
  validate_common(cfg, 3);
  const DegreeVariant variant = variant_of(cfg.pattern);
  const bool alternating = variant == DegreeVariant::AlternatingA;
  const double lambda = std::exp(-cfg.c) * (alternating ? 0.25 : 1.0);

  ExperimentResult res;
  res.config = cfg;
  const std::int64_t per_group = cfg.trials;
  const std::int64_t total = per_group * static_cast<std::int64_t>(cfg.n_values.size());
  res.records.resize(total);

  std::vector<double> densities;
  for (int n : cfg.n_values) densities.push_back(threshold_p(variant, n, cfg.c));

  run_indexed(total, cfg.threads, [&](std::int64_t i) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t gi = static_cast<std::size_t>(i / per_group);
    const int n = cfg.n_values[gi];
    TrialRecord& rec = res.records[i];
    rec.trial = i;
    rec.seed = keyed_u64(cfg.master_seed, static_cast<std::uint64_t>(i));
    rec.n = n;
    rec.c = cfg.c;
    rec.p = densities[gi];
    Rng rng(rec.seed);
    std::vector<std::int32_t> in_deg, out_deg;
    const DegreeTrial t = degree_trial(n, rec.p, variant, rng, in_deg, out_deg);
    rec.success = true;
    rec.outcome = "success";
    rec.x_count = t.x;
    rec.y_count = t.y;
    rec.wall_ms = elapsed_ms(start);
  });

  for (std::size_t gi = 0; gi < cfg.n_values.size(); ++gi) {
    GroupSummary g = blank_summary(cfg.n_values[gi], per_group);
    g.successes = per_group;
    std::vector<std::int64_t> histogram;
    double sum = 0.0;
    for (std::int64_t t = 0; t < per_group; ++t) {
      const TrialRecord& rec = res.records[gi * per_group + t];
      const std::int64_t count = alternating ? rec.x_count : rec.y_count;
      if (static_cast<std::int64_t>(histogram.size()) <= count) histogram.resize(count + 1, 0);
      ++histogram[count];
      sum += static_cast<double>(count);
    }
    g.mean_value = sum / static_cast<double>(per_group);
    g.target = lambda;
    g.tv_distance = total_variation_to_poisson(histogram, lambda);
    res.groups.push_back(g);
    res.histograms.push_back(std::move(histogram));
  }
  return res;
}

ExperimentResult mc_hitting_time(const ExperimentConfig& cfg) {
  validate_common(cfg, 16);
  const DegreeVariant variant = variant_of(cfg.pattern);
  const bool alternating = variant == DegreeVariant::AlternatingA;
  const int k = static_cast<int>(cfg.pattern.length());
  for (int n : cfg.n_values) {
    if (alternating ? n % 2 != 0 : n % k != 0)
      throw ConfigError("n = " + std::to_string(n) + " breaks the pattern's divisibility");
    if (cfg.solver == SolverChoice::Exact && n > 16)
      throw ConfigError("the exhaustive solver handles n <= 16 only");
  }

  ExperimentResult res;
  res.config = cfg;
  const std::int64_t per_group = cfg.trials;
  const std::int64_t total = per_group * static_cast<std::int64_t>(cfg.n_values.size());
  res.records.resize(total);

  run_indexed(total, cfg.threads, [&](std::int64_t i) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t gi = static_cast<std::size_t>(i / per_group);
    const int n = cfg.n_values[gi];
    TrialRecord& rec = res.records[i];
    rec.trial = i;
    rec.seed = keyed_u64(cfg.master_seed, static_cast<std::uint64_t>(i));
    rec.n = n;
    rec.c = cfg.c;

    const ProcessTrace trace(n, rec.seed);
    Rng rng(rec.seed, 1);
    rec.m_star = trace.hitting_index(variant);
    const LabeledDigraph prefix = trace.prefix_count(rec.m_star);
    const LowDegreeStats stats = low_degree_stats(prefix);
    rec.x_count = stats.x;
    rec.y_count = stats.y;

    auto succeed = [&](const CycleWitness& w) {
      if (!verify_pi_hc(prefix, w, cfg.pattern))
        throw std::logic_error("solver returned an unverified cycle");
      rec.success = true;
      rec.outcome = "success";
    };

    if (cfg.solver == SolverChoice::Exact) {
      if (auto w = exact_pi_hc(prefix, cfg.pattern))
        succeed(*w);
      else
        rec.outcome = to_string(FailStage::HCNotFound);
    } else {
      PipelineDiagnostics diag;
      auto run = run_pipeline(trace, cfg.pattern, rng, cfg.pipeline, &diag);
      rec.good = diag.good;
      rec.bad = diag.bad;
      rec.dangerous = diag.dangerous;
      if (run) {
        succeed(run.value());
      } else if (cfg.solver == SolverChoice::PipelineFallback) {
        std::optional<CycleWitness> w = n <= 16 ? exact_pi_hc(prefix, cfg.pattern)
                                                : heuristic_pi_hc(prefix, cfg.pattern, rng,
                                                                  cfg.pipeline.budget);
        if (w)
          succeed(*w);
        else
          rec.outcome = to_string(run.error().stage);
      } else {
        rec.outcome = to_string(run.error().stage);
      }
    }
    rec.wall_ms = elapsed_ms(start);
  });

  for (std::size_t gi = 0; gi < cfg.n_values.size(); ++gi) {
    GroupSummary g = blank_summary(cfg.n_values[gi], per_group);
    double m_sum = 0.0;
    const auto first = res.records.begin() + gi * per_group;
    for (std::int64_t t = 0; t < per_group; ++t) {
      g.successes += first[t].success;
      m_sum += static_cast<double>(first[t].m_star);
    }
    fill_rate(g);
    g.mean_value = m_sum / static_cast<double>(per_group);
    g.failure_breakdown = tally_failures({&*first, static_cast<std::size_t>(per_group)});
    res.groups.push_back(g);
  }
  return res;
}

ExperimentResult mc_walkup(const ExperimentConfig& cfg) {
  if (cfg.walkup_m < 2) throw ConfigError("the matching model needs m >= 2");
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  const int m = cfg.walkup_m;

  ExperimentResult res;
  res.config = cfg;
  res.records.resize(cfg.trials);

  run_indexed(cfg.trials, cfg.threads, [&](std::int64_t i) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord& rec = res.records[i];
    rec.trial = i;
    rec.seed = keyed_u64(cfg.master_seed, static_cast<std::uint64_t>(i));
    rec.n = m;
    Rng rng(rec.seed);
    const BipartiteTwoOut g = sample_walkup(m, rng);
    const auto match = find_perfect_matching(g);
    if (match) {
      // defence in depth: the matching must be a bijection along pick edges
      std::vector<char> hit(m, 0);
      for (int left = 0; left < m; ++left) {
        const int right = (*match)[left];
        const bool from_left = std::find(g.left_picks[left].begin(), g.left_picks[left].end(),
                                         right) != g.left_picks[left].end();
        const bool from_right = std::find(g.right_picks[right].begin(),
                                          g.right_picks[right].end(),
                                          left) != g.right_picks[right].end();
        if (right < 0 || right >= m || hit[right] || (!from_left && !from_right))
          throw std::logic_error("matching verification failed");
        hit[right] = 1;
      }
      rec.success = true;
      rec.outcome = "success";
    } else {
      rec.outcome = to_string(FailStage::MatchingFailed);
    }
    rec.wall_ms = elapsed_ms(start);
  });

  GroupSummary g = blank_summary(m, cfg.trials);
  for (const auto& r : res.records) g.successes += r.success;
  fill_rate(g);
  g.failure_breakdown = tally_failures(res.records);
  res.groups.push_back(g);
  return res;
}

ExperimentResult mc_walkup(int m, int trials, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::Walkup;
  cfg.pattern = parse_pattern("><");
  cfg.n_values = {m};
  cfg.walkup_m = m;
  cfg.trials = trials;
  cfg.master_seed = seed;
  return mc_walkup(cfg);
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_count(std::int64_t v) { return v < 0 ? std::string() : std::to_string(v); }

std::string fmt_breakdown(const std::vector<std::pair<std::string, std::int64_t>>& b) {
  std::string out;
  for (const auto& [stage, count] : b) {
    if (!out.empty()) out += ';';
    out += stage + ":" + std::to_string(count);
  }
  return out;
}

std::vector<std::string> trial_row(const ExperimentResult& res, const TrialRecord& r) {
  return {to_string(res.config.experiment),
          "trial",
          std::to_string(r.n),
          std::to_string(r.trial),
          std::to_string(r.seed),
          fmt_double(res.config.experiment == ExperimentKind::Walkup ? kNaN : r.c),
          fmt_double(r.p == 0.0 ? kNaN : r.p),
          fmt_count(r.m_star),
          r.outcome,
          r.success ? "1" : "0",
          fmt_count(r.x_count),
          fmt_count(r.y_count),
          fmt_count(r.good),
          fmt_count(r.bad),
          fmt_count(r.dangerous),
          "",
          "",
          "",
          "",
          "",
          ""};
}

std::vector<std::string> summary_row(const ExperimentResult& res, const GroupSummary& g) {
  double value = g.rate;
  if (res.config.experiment == ExperimentKind::LowDegree) value = g.mean_value;
  return {to_string(res.config.experiment),
          "summary",
          std::to_string(g.n),
          "",
          "",
          fmt_double(res.config.experiment == ExperimentKind::Walkup ? kNaN : res.config.c),
          "",
          "",
          "summary",
          std::to_string(g.successes),
          "",
          "",
          "",
          "",
          "",
          fmt_double(value),
          fmt_double(res.config.experiment == ExperimentKind::HittingTime ? g.mean_value
                                                                          : g.tv_distance),
          fmt_double(g.target),
          fmt_double(g.ci.lower),
          fmt_double(g.ci.upper),
          fmt_breakdown(g.failure_breakdown)};
}

}  // namespace

std::vector<std::string> emit_columns() {
  return {"experiment", "row",     "n",       "trial",   "seed",  "c",       "p",
          "m_star",     "outcome", "success", "x_count", "y_count", "good",  "bad",
          "dangerous",  "value",   "value2",  "target",  "ci_low", "ci_high", "failures"};
}

void emit(const ExperimentResult& result, OutputFormat format, std::ostream& os) {
  const auto columns = emit_columns();
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.records.size() + result.groups.size());
  for (const auto& r : result.records) rows.push_back(trial_row(result, r));
  for (const auto& g : result.groups) rows.push_back(summary_row(result, g));

  if (format == OutputFormat::Csv) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      os << columns[i] << (i + 1 < columns.size() ? ',' : '\n');
    for (const auto& row : rows)
      for (std::size_t i = 0; i < row.size(); ++i)
        os << row[i] << (i + 1 < row.size() ? ',' : '\n');
  } else {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
      doc.push_back(std::move(obj));
    }
    os << doc.dump(2) << '\n';
  }
}

}  // namespace pihc
