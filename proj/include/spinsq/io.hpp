#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "spinsq/hypothesis.hpp"
#include "spinsq/montecarlo.hpp"
#include "spinsq/schemes.hpp"
#include "spinsq/variance.hpp"

namespace spinsq {

inline constexpr int kSchemaVersion = 1;

/// Blocks of a single pattern as stored in one CSV file.
struct PatternData {
  Pattern pattern = Pattern::TotalSpin;
  int n = 0;
  Budget budget;  // K per slot (scheme K for split patterns), L for random ones
  std::uint64_t seed = 0;
  std::string state;
  std::array<TotalSpinPtr, 3> ts{};
  std::array<PairBlockPtr, 3> blocks{};

  std::string canonical() const;
};

/// CSV with a leading "# spinsq-dataset v1 key=value ..." line and a header:
///   ts      direction,rep,outcome2m
///   pairs   direction,i,j,rep,si2,sj2
///   split   direction,i,j,rep,who,who_s2
///   rpairs  slot,direction,i,j,rep,si2,sj2
///   rsplit  slot,direction,i,j,rep,who,who_s2
void write_dataset_csv(std::ostream& out, const PatternData& data);

/// Throws std::invalid_argument on any schema violation.
PatternData read_dataset_csv(std::istream& in);

/// Slots the blocks of `data` into `target`; rejects a direction already
/// filled for the same role.
void merge_into(SchemeDatasets& target, const PatternData& data);

nlohmann::json to_json(const Parameter& p);
nlohmann::json to_json(const Budget& b);
nlohmann::json to_json(const MomentAggregates& a);
nlohmann::json to_json(const EstimateResult& r);
nlohmann::json to_json(const VarianceReport& r);
nlohmann::json to_json(const SampleSizeResult& r);
nlohmann::json to_json(const Histogram& h);
/// Per-trial values are included only when `with_values` is set.
nlohmann::json to_json(const TrialStats& s, bool with_values = false);
nlohmann::json to_json(const Comparison& c);

}  // namespace spinsq
