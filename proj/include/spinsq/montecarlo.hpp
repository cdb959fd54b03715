#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinsq/states.hpp"
#include "spinsq/types.hpp"
#include "spinsq/variance.hpp"

namespace spinsq {

/// Left-closed bins [anchor + i w, anchor + (i+1) w). Values outside the
/// covered range go to underflow/overflow.
struct Histogram {
  double anchor = 0.0;
  double width = 1.0;
  std::vector<std::int64_t> counts;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;

  std::vector<double> edges() const;
  std::int64_t total() const;
};

Histogram histogram(const std::vector<double>& values, int bin_count, double bin_width,
                    double anchor);

struct HistogramSpec {
  int bins = 99;
  /// 0 selects a width covering about +-4 standard deviations.
  double width = 0.0;
};

struct TrialConfig {
  std::string state;  // StateModel::describe()
  Scheme scheme = Scheme::TS;
  Parameter parameter;
  Budget budget;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;

  std::string canonical() const;
};

struct TrialStats {
  TrialConfig config;
  std::string config_hash;
  double mean = 0.0;
  double empirical_variance = 0.0;
  double analytic_mean = 0.0;
  std::vector<double> values;  // by trial index
  Histogram histogram;
};

/// T end-to-end simulations with fresh data sets. Trial i draws from its
/// own stream seeded with mix64(seed, i) and results are reduced in trial
/// order, so the output is bit-identical for any thread count.
/// `threads` = 0 leaves the OpenMP default.
TrialStats run_trials(const StateModel& state, Scheme scheme, const Parameter& parameter,
                      const Budget& budget, std::int64_t trials, std::uint64_t seed,
                      int threads = 0, const HistogramSpec& hist = {});

/// Single-threaded reference of run_trials.
TrialStats run_trials_serial(const StateModel& state, Scheme scheme, const Parameter& parameter,
                             const Budget& budget, std::int64_t trials, std::uint64_t seed,
                             const HistogramSpec& hist = {});

/// Thrown by compare_analytic when the two inputs describe different runs.
class ConfigMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Comparison {
  double empirical = 0.0;
  double analytic = 0.0;
  double relative_deviation = 0.0;  // 0 when both vanish
  double tolerance = 0.10;
  bool pass = false;
};

Comparison compare_analytic(const TrialStats& stats, const VarianceReport& report,
                            double tolerance = 0.10);

struct NoiseSweepRow {
  double p = 0.0;
  double analytic = 0.0;
  std::optional<double> empirical;
};

struct NoiseSweep {
  Scheme scheme = Scheme::TS;
  Parameter parameter;
  int n = 0;
  Budget budget;
  std::vector<NoiseSweepRow> rows;
  /// True when the smallest analytic variance on the grid sits at p = 1.
  bool minimum_at_pure = false;
};

/// Variance over the noisy half-filled Dicke family on a grid of p values.
/// With trials > 0 every grid point is also simulated.
NoiseSweep sweep_noise(Scheme scheme, const Parameter& parameter, int n, const Budget& budget,
                       const std::vector<double>& p_grid, std::int64_t trials = 0,
                       std::uint64_t seed = 0, int threads = 0);

struct SampleSizeRow {
  int n = 0;
  Scheme scheme = Scheme::TS;
  std::int64_t budget = 0;
  Budget detail;
  std::int64_t total_preparations = 0;
  double worst_case_p = 0.0;
};

/// Required preparations for every scheme and N; t is derived per N.
std::vector<SampleSizeRow> sweep_sample_size(const Parameter& parameter, const std::string& t_rule,
                                             double gamma, const std::vector<int>& n_list);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace spinsq
