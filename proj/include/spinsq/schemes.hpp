#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "spinsq/rng.hpp"
#include "spinsq/states.hpp"
#include "spinsq/types.hpp"

namespace spinsq {

/// Measurement pattern that produced a block of records.
enum class Pattern : std::uint8_t { TotalSpin, AllPairs, Split, RandomPairs, RandomSplit };

std::string to_string(Pattern p);
Pattern parse_pattern(std::string_view text);

/// K collective measurements of J_d; outcomes stored as 2m.
struct TotalSpinBlock {
  Direction direction = Direction::X;
  int n = 0;
  std::vector<std::int16_t> outcome2m;

  int reps() const { return static_cast<int>(outcome2m.size()); }
};

/// Two-qubit records for one direction.
///
///   AllPairs, RandomPairs: slot s is the ordered pair pairs[s] = (i, j);
///     first/second hold the joint outcomes (2s_i, 2s_j) of `reps` runs.
///   Split, RandomSplit: i == j is allowed; first holds qubit i from the
///     even runs and second holds qubit j from the odd runs, `reps` = K/2
///     each, so the two series never share a state preparation.
///
/// Record r of slot s lives at index s * reps + r.
struct PairBlock {
  Pattern pattern = Pattern::AllPairs;
  Direction direction = Direction::X;
  int n = 0;
  int reps = 0;
  std::vector<std::array<int, 2>> pairs;
  std::vector<std::int8_t> first;
  std::vector<std::int8_t> second;

  int slots() const { return static_cast<int>(pairs.size()); }
  /// Repetitions K of the scheme (split patterns store K/2 per qubit).
  int scheme_reps() const {
    return pattern == Pattern::Split || pattern == Pattern::RandomSplit ? 2 * reps : reps;
  }
};

using TotalSpinPtr = std::shared_ptr<const TotalSpinBlock>;
using PairBlockPtr = std::shared_ptr<const PairBlock>;

using TotalSpinDataset = std::array<TotalSpinPtr, 3>;
using PairDataset = std::array<PairBlockPtr, 3>;
using SplitSingleDataset = std::array<PairBlockPtr, 3>;
using RandomPairDataset = std::array<PairBlockPtr, 3>;
using RandomSplitDataset = std::array<PairBlockPtr, 3>;

// ---------------------------------------------------------------- collection

TotalSpinPtr collect_total_spin_block(const StateModel& state, Direction d, int k, Rng& rng);
PairBlockPtr collect_all_pairs_block(const StateModel& state, Direction d, int k, Rng& rng);
PairBlockPtr collect_split_single_block(const StateModel& state, Direction d, int k, Rng& rng);
PairBlockPtr collect_random_pairs_block(const StateModel& state, Direction d, int l, int k,
                                        Rng& rng);
PairBlockPtr collect_random_split_block(const StateModel& state, Direction d, int l, int k,
                                        Rng& rng);

TotalSpinDataset collect_total_spin(const StateModel& state, int k, Rng& rng);
PairDataset collect_all_pairs(const StateModel& state, int k, Rng& rng);
SplitSingleDataset collect_split_single(const StateModel& state, int k, Rng& rng);
RandomPairDataset collect_random_pairs(const StateModel& state, int l, int k, Rng& rng);
RandomSplitDataset collect_random_split(const StateModel& state, int l, int k, Rng& rng);

// ------------------------------------------------------------ integer kernels
//
// All sums are over encoded outcomes (2s = +-1, 2m), so they are exact.

/// sum_m (2m)
std::int64_t ts_sum(const TotalSpinBlock& b);
/// sum_m (2m)^2
std::int64_t ts_sum_sq(const TotalSpinBlock& b);
/// sum over slots and runs of first * second.
std::int64_t pair_product_sum(const PairBlock& b);
/// Cross term of the all-pairs variance estimator:
///   sum_{k != l} A_k B_l,  A_k = sum_P first(P, k),  B_l = sum_Q second(Q, l),
/// evaluated as (sum A)(sum B) - sum_k A_k B_k.
std::int64_t ap_cross_sum(const PairBlock& b);
/// Cross term of the random-pairs variance estimator:
///   sum_{l != m} sum_{k,q} first(l, k) second(m, q),
/// evaluated as (sum_l a_l)(sum_m b_m) - sum_l a_l b_l with a_l, b_l the
/// per-slot sums over runs.
std::int64_t rp_cross_sum(const PairBlock& b);

// ---------------------------------------------------------------- estimators

double est_J2_ts(const TotalSpinBlock& b);
double est_deltaJ2_ts(const TotalSpinBlock& b);
double est_J2_ap(const PairBlock& b);
double est_deltaJ2_ap(const PairBlock& b);
double est_Jsq_split(const PairBlock& b);
double est_J2_rp(const PairBlock& b);
double est_deltaJ2_rp(const PairBlock& b);
double est_Jsq_rsplit(const PairBlock& b);

/// Final divisions, shared with the naive reference implementations in the
/// tests so that the comparison is bit-exact.
double finish_J2_ts(std::int64_t sum_sq, int k);
double finish_deltaJ2_ts(std::int64_t sum, std::int64_t sum_sq, int k);
double finish_J2_ap(std::int64_t product_sum, int n, int k);
double finish_deltaJ2_ap(std::int64_t product_sum, std::int64_t cross, int n, int k);
double finish_Jsq_split(std::int64_t product_sum, int k);
double finish_J2_rp(std::int64_t product_sum, int n, int l, int k);
double finish_deltaJ2_rp(std::int64_t product_sum, std::int64_t cross, int n, int l, int k);
double finish_Jsq_rsplit(std::int64_t product_sum, int n, int l, int k);

// --------------------------------------------------------------- composition

/// Blocks backing one estimate. Unused slots stay empty.
///   TS:   ts[*]
///   AP1:  pairs[*]                  (AllPairs)
///   AP2:  pairs[*] + split[variance directions]
///   RP1:  pairs[*]                  (RandomPairs)
///   RP2:  pairs[*] + split[variance directions] (RandomSplit)
struct SchemeDatasets {
  TotalSpinDataset ts{};
  std::array<PairBlockPtr, 3> pairs{};
  std::array<PairBlockPtr, 3> split{};
};

struct EstimateResult {
  Scheme scheme = Scheme::TS;
  Parameter parameter;
  int n = 0;
  Budget budget;
  double value = 0.0;
  std::int64_t samples_used = 0;
  std::array<double, 3> second_moment{};  // <J_a^2> estimates used (NaN if unused)
  std::array<double, 3> variance{};       // (dJ_a)^2 estimates used (NaN if unused)
};

/// Draws fresh, independent blocks for everything `parameter` needs.
SchemeDatasets collect_for(const StateModel& state, Scheme scheme, const Parameter& parameter,
                           const Budget& budget, Rng& rng);

/// Composes the parameter estimate. Throws std::invalid_argument when a
/// needed block is missing, has the wrong pattern or direction, the blocks
/// disagree on N or budget, or one block object backs two roles.
EstimateResult estimate_parameter(Scheme scheme, const Parameter& parameter,
                                  const SchemeDatasets& data);

/// Total number of state preparations consumed.
std::int64_t sample_cost(Scheme scheme, const Parameter& parameter, int n, const Budget& budget);

/// Number of directions whose variance (not only <J^2>) the parameter needs.
int variance_direction_count(const Parameter& parameter);

/// Composes a parameter value from per-direction <J^2> and (dJ)^2 values.
double compose_parameter(const Parameter& parameter, int n, const std::array<double, 3>& j2,
                         const std::array<double, 3>& var);

}  // namespace spinsq
