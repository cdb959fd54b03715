#include "spinsq/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace spinsq {

namespace {

using i128 = __int128;

double ratio(i128 num, i128 den) { return static_cast<double>(num) / static_cast<double>(den); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string dir_name(Direction d) { return std::string(1, to_char(d)); }

int uniform_index(int bound, Rng& rng) {
  return static_cast<int>(std::uniform_int_distribution<int>(0, bound - 1)(rng));
}

std::shared_ptr<PairBlock> make_block(Pattern pattern, Direction d, int n, int reps,
                                      std::size_t slots) {
  auto b = std::make_shared<PairBlock>();
  b->pattern = pattern;
  b->direction = d;
  b->n = n;
  b->reps = reps;
  b->pairs.reserve(slots);
  b->first.reserve(slots * static_cast<std::size_t>(reps));
  b->second.reserve(slots * static_cast<std::size_t>(reps));
  return b;
}

struct JointSampler {
  double c0, c1, c2, total;

  explicit JointSampler(const PairProbabilities& p)
      : c0(p[0]), c1(p[0] + p[1]), c2(p[0] + p[1] + p[2]), total(p[0] + p[1] + p[2] + p[3]) {}

  void draw(PairBlock& b, Rng& rng) const {
    const double u = uniform01(rng) * total;
    const int idx = u < c0 ? 0 : u < c1 ? 1 : u < c2 ? 2 : 3;
    b.first.push_back(static_cast<std::int8_t>(idx < 2 ? 1 : -1));
    b.second.push_back(static_cast<std::int8_t>(idx % 2 == 0 ? 1 : -1));
  }
};

void fill_joint(const JointSampler& sampler, PairBlock& b, int i, int j, Rng& rng) {
  b.pairs.push_back({i, j});
  for (int r = 0; r < b.reps; ++r) sampler.draw(b, rng);
}

/// Probability of outcome +1 for every qubit along one axis.
std::vector<double> up_probabilities(const StateModel& state, Direction d) {
  std::vector<double> p(static_cast<std::size_t>(state.num_qubits()));
  for (int i = 0; i < state.num_qubits(); ++i) {
    p[static_cast<std::size_t>(i)] = 0.5 * (1.0 + state.single_expectation(d, i));
  }
  return p;
}

void fill_split(const std::vector<double>& up, PairBlock& b, int i, int j, Rng& rng) {
  b.pairs.push_back({i, j});
  const double pi = up[static_cast<std::size_t>(i)];
  const double pj = up[static_cast<std::size_t>(j)];
  // Runs alternate: qubit i is read out in one preparation, qubit j in the next.
  for (int r = 0; r < b.reps; ++r) {
    b.first.push_back(static_cast<std::int8_t>(uniform01(rng) < pi ? 1 : -1));
    b.second.push_back(static_cast<std::int8_t>(uniform01(rng) < pj ? 1 : -1));
  }
}

void check_split_k(int k) {
  require(k >= 2 && k % 2 == 0, "split pattern requires an even K >= 2 (got " +
                                    std::to_string(k) + ")");
}

}  // namespace

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::TotalSpin:
      return "ts";
    case Pattern::AllPairs:
      return "pairs";
    case Pattern::Split:
      return "split";
    case Pattern::RandomPairs:
      return "rpairs";
    case Pattern::RandomSplit:
      return "rsplit";
  }
  return "?";
}

Pattern parse_pattern(std::string_view text) {
  for (Pattern p : {Pattern::TotalSpin, Pattern::AllPairs, Pattern::Split, Pattern::RandomPairs,
                    Pattern::RandomSplit}) {
    if (to_string(p) == text) return p;
  }
  throw std::invalid_argument("unknown pattern '" + std::string(text) +
                              "' (expected ts, pairs, split, rpairs or rsplit)");
}

// ---------------------------------------------------------------- collection

TotalSpinPtr collect_total_spin_block(const StateModel& state, Direction d, int k, Rng& rng) {
  require(k >= 2, "total-spin pattern requires K >= 2 (got " + std::to_string(k) + ")");
  auto b = std::make_shared<TotalSpinBlock>();
  b->direction = d;
  b->n = state.num_qubits();
  b->outcome2m.reserve(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    b->outcome2m.push_back(static_cast<std::int16_t>(state.sample_total_spin(d, rng)));
  }
  return b;
}

PairBlockPtr collect_all_pairs_block(const StateModel& state, Direction d, int k, Rng& rng) {
  require(k >= 1, "all-pairs pattern requires K >= 1 (got " + std::to_string(k) + ")");
  const int n = state.num_qubits();
  require(n >= 2, "pair patterns need N >= 2");
  auto b = make_block(Pattern::AllPairs, d, n, k, static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) fill_joint(JointSampler(state.pair_probabilities(d, i, j)), *b, i, j, rng);
    }
  }
  return b;
}

PairBlockPtr collect_split_single_block(const StateModel& state, Direction d, int k, Rng& rng) {
  check_split_k(k);
  const int n = state.num_qubits();
  auto b = make_block(Pattern::Split, d, n, k / 2, static_cast<std::size_t>(n) * n);
  const auto up = up_probabilities(state, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) fill_split(up, *b, i, j, rng);
  }
  return b;
}

PairBlockPtr collect_random_pairs_block(const StateModel& state, Direction d, int l, int k,
                                        Rng& rng) {
  require(l >= 1 && k >= 1, "random-pairs pattern requires L >= 1 and K >= 1");
  const int n = state.num_qubits();
  require(n >= 2, "pair patterns need N >= 2");
  auto b = make_block(Pattern::RandomPairs, d, n, k, static_cast<std::size_t>(l));
  // Samplers are built on first use of each ordered pair.
  std::vector<std::optional<JointSampler>> cache(static_cast<std::size_t>(n) * n);
  for (int s = 0; s < l; ++s) {
    int i = 0;
    int j = 0;
    do {
      i = uniform_index(n, rng);
      j = uniform_index(n, rng);
    } while (i == j);
    auto& sampler = cache[static_cast<std::size_t>(i) * n + j];
    if (!sampler) sampler.emplace(state.pair_probabilities(d, i, j));
    fill_joint(*sampler, *b, i, j, rng);
  }
  return b;
}

PairBlockPtr collect_random_split_block(const StateModel& state, Direction d, int l, int k,
                                        Rng& rng) {
  check_split_k(k);
  require(l >= 1, "random-split pattern requires L >= 1");
  const int n = state.num_qubits();
  auto b = make_block(Pattern::RandomSplit, d, n, k / 2, static_cast<std::size_t>(l));
  const auto up = up_probabilities(state, d);
  for (int s = 0; s < l; ++s) {
    const int i = uniform_index(n, rng);
    const int j = uniform_index(n, rng);
    fill_split(up, *b, i, j, rng);
  }
  return b;
}

TotalSpinDataset collect_total_spin(const StateModel& state, int k, Rng& rng) {
  TotalSpinDataset ds;
  for (Direction d : kDirections) ds[index_of(d)] = collect_total_spin_block(state, d, k, rng);
  return ds;
}

PairDataset collect_all_pairs(const StateModel& state, int k, Rng& rng) {
  PairDataset ds;
  for (Direction d : kDirections) ds[index_of(d)] = collect_all_pairs_block(state, d, k, rng);
  return ds;
}

SplitSingleDataset collect_split_single(const StateModel& state, int k, Rng& rng) {
  SplitSingleDataset ds;
  for (Direction d : kDirections) ds[index_of(d)] = collect_split_single_block(state, d, k, rng);
  return ds;
}

RandomPairDataset collect_random_pairs(const StateModel& state, int l, int k, Rng& rng) {
  RandomPairDataset ds;
  for (Direction d : kDirections) {
    ds[index_of(d)] = collect_random_pairs_block(state, d, l, k, rng);
  }
  return ds;
}

RandomSplitDataset collect_random_split(const StateModel& state, int l, int k, Rng& rng) {
  RandomSplitDataset ds;
  for (Direction d : kDirections) {
    ds[index_of(d)] = collect_random_split_block(state, d, l, k, rng);
  }
  return ds;
}

// ------------------------------------------------------------ integer kernels

std::int64_t ts_sum(const TotalSpinBlock& b) {
  std::int64_t s = 0;
  for (auto v : b.outcome2m) s += v;
  return s;
}

std::int64_t ts_sum_sq(const TotalSpinBlock& b) {
  std::int64_t s = 0;
  for (auto v : b.outcome2m) s += static_cast<std::int64_t>(v) * v;
  return s;
}

std::int64_t pair_product_sum(const PairBlock& b) {
  std::int64_t s = 0;
  for (std::size_t r = 0; r < b.first.size(); ++r) s += b.first[r] * b.second[r];
  return s;
}

std::int64_t ap_cross_sum(const PairBlock& b) {
  const int k = b.reps;
  std::vector<std::int64_t> a(static_cast<std::size_t>(k), 0);
  std::vector<std::int64_t> c(static_cast<std::size_t>(k), 0);
  for (int s = 0; s < b.slots(); ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * k;
    for (int r = 0; r < k; ++r) {
      a[static_cast<std::size_t>(r)] += b.first[base + r];
      c[static_cast<std::size_t>(r)] += b.second[base + r];
    }
  }
  std::int64_t sa = 0;
  std::int64_t sb = 0;
  std::int64_t diag = 0;
  for (int r = 0; r < k; ++r) {
    sa += a[static_cast<std::size_t>(r)];
    sb += c[static_cast<std::size_t>(r)];
    diag += a[static_cast<std::size_t>(r)] * c[static_cast<std::size_t>(r)];
  }
  return sa * sb - diag;
}

std::int64_t rp_cross_sum(const PairBlock& b) {
  const int k = b.reps;
  std::int64_t sa = 0;
  std::int64_t sb = 0;
  std::int64_t diag = 0;
  for (int s = 0; s < b.slots(); ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * k;
    std::int64_t a = 0;
    std::int64_t c = 0;
    for (int r = 0; r < k; ++r) {
      a += b.first[base + r];
      c += b.second[base + r];
    }
    sa += a;
    sb += c;
    diag += a * c;
  }
  return sa * sb - diag;
}

// ---------------------------------------------------------------- finishing

double finish_J2_ts(std::int64_t sum_sq, int k) { return ratio(sum_sq, i128{4} * k); }

double finish_deltaJ2_ts(std::int64_t sum, std::int64_t sum_sq, int k) {
  return ratio(i128{k} * sum_sq - i128{sum} * sum, i128{4} * k * (k - 1));
}

double finish_J2_ap(std::int64_t product_sum, int n, int k) {
  return ratio(i128{n} * k + product_sum, i128{4} * k);
}

double finish_deltaJ2_ap(std::int64_t product_sum, std::int64_t cross, int n, int k) {
  const i128 w = i128{k - 1} * (n - 1) * (n - 1);
  return ratio((i128{n} * k + product_sum) * w - cross, i128{4} * k * w);
}

double finish_Jsq_split(std::int64_t product_sum, int k) {
  return ratio(product_sum, i128{2} * k);
}

double finish_J2_rp(std::int64_t product_sum, int n, int l, int k) {
  return ratio(i128{n} * k * l + i128{n} * (n - 1) * product_sum, i128{4} * k * l);
}

double finish_deltaJ2_rp(std::int64_t product_sum, std::int64_t cross, int n, int l, int k) {
  const i128 num =
      (i128{n} * k * l + i128{n} * (n - 1) * product_sum) * k * (l - 1) - i128{n} * n * cross;
  return ratio(num, i128{4} * k * k * l * (l - 1));
}

double finish_Jsq_rsplit(std::int64_t product_sum, int n, int l, int k) {
  return ratio(i128{n} * n * product_sum, i128{2} * k * l);
}

// ---------------------------------------------------------------- estimators

namespace {

void expect_pattern(const PairBlock& b, Pattern p) {
  require(b.pattern == p, "expected a " + to_string(p) + " block, got " + to_string(b.pattern));
}

void expect_complete_all_pairs(const PairBlock& b) {
  expect_pattern(b, Pattern::AllPairs);
  const std::size_t expected = static_cast<std::size_t>(b.n) * (b.n - 1);
  require(b.pairs.size() == expected, "all-pairs block must hold N(N-1) = " +
                                          std::to_string(expected) + " ordered pairs (got " +
                                          std::to_string(b.pairs.size()) + ")");
  std::vector<char> seen(static_cast<std::size_t>(b.n) * b.n, 0);
  for (const auto& [i, j] : b.pairs) {
    require(i != j && i >= 0 && j >= 0 && i < b.n && j < b.n, "invalid pair in all-pairs block");
    char& flag = seen[static_cast<std::size_t>(i) * b.n + j];
    require(!flag, "duplicate pair in all-pairs block");
    flag = 1;
  }
}

void expect_records(const PairBlock& b) {
  const std::size_t expected = b.pairs.size() * static_cast<std::size_t>(b.reps);
  require(b.first.size() == expected && b.second.size() == expected,
          "pair block record count does not match slots x reps");
}

}  // namespace

double est_J2_ts(const TotalSpinBlock& b) {
  require(b.reps() >= 1, "total-spin block is empty");
  return finish_J2_ts(ts_sum_sq(b), b.reps());
}

double est_deltaJ2_ts(const TotalSpinBlock& b) {
  require(b.reps() >= 2, "sample variance requires K >= 2 (got " + std::to_string(b.reps()) + ")");
  return finish_deltaJ2_ts(ts_sum(b), ts_sum_sq(b), b.reps());
}

double est_J2_ap(const PairBlock& b) {
  expect_complete_all_pairs(b);
  expect_records(b);
  return finish_J2_ap(pair_product_sum(b), b.n, b.reps);
}

double est_deltaJ2_ap(const PairBlock& b) {
  expect_complete_all_pairs(b);
  expect_records(b);
  require(b.reps >= 2, "all-pairs variance requires K >= 2 (got " + std::to_string(b.reps) + ")");
  return finish_deltaJ2_ap(pair_product_sum(b), ap_cross_sum(b), b.n, b.reps);
}

double est_Jsq_split(const PairBlock& b) {
  expect_pattern(b, Pattern::Split);
  expect_records(b);
  const std::size_t expected = static_cast<std::size_t>(b.n) * b.n;
  require(b.pairs.size() == expected, "split block must hold N^2 = " + std::to_string(expected) +
                                          " ordered pairs");
  return finish_Jsq_split(pair_product_sum(b), b.scheme_reps());
}

double est_J2_rp(const PairBlock& b) {
  expect_pattern(b, Pattern::RandomPairs);
  expect_records(b);
  require(b.slots() >= 1, "random-pairs block is empty");
  return finish_J2_rp(pair_product_sum(b), b.n, b.slots(), b.reps);
}

double est_deltaJ2_rp(const PairBlock& b) {
  expect_pattern(b, Pattern::RandomPairs);
  expect_records(b);
  require(b.slots() >= 2, "random-pairs variance requires L >= 2 (got " +
                              std::to_string(b.slots()) + ")");
  return finish_deltaJ2_rp(pair_product_sum(b), rp_cross_sum(b), b.n, b.slots(), b.reps);
}

double est_Jsq_rsplit(const PairBlock& b) {
  expect_pattern(b, Pattern::RandomSplit);
  expect_records(b);
  require(b.slots() >= 1, "random-split block is empty");
  return finish_Jsq_rsplit(pair_product_sum(b), b.n, b.slots(), b.scheme_reps());
}

// --------------------------------------------------------------- composition

int variance_direction_count(const Parameter& parameter) {
  int v = 0;
  for (Direction d : kDirections) v += parameter.needs_variance(d) ? 1 : 0;
  return v;
}

namespace {

bool needs_second_moment(const Parameter& p, Direction d) {
  switch (p.kind) {
    case ParameterKind::A:
      return true;
    case ParameterKind::B:
      return false;
    case ParameterKind::C:
      return d != p.m();
    case ParameterKind::D:
      return d == p.m();
  }
  return false;
}

}  // namespace

double compose_parameter(const Parameter& p, int n, const std::array<double, 3>& j2,
                         const std::array<double, 3>& var) {
  const auto at = [](const std::array<double, 3>& a, Direction d) { return a[index_of(d)]; };
  switch (p.kind) {
    case ParameterKind::A:
      return j2[0] + j2[1] + j2[2];
    case ParameterKind::B:
      return var[0] + var[1] + var[2];
    case ParameterKind::C:
      return at(j2, p.k()) + at(j2, p.l()) - (n - 1.0) * at(var, p.m());
    case ParameterKind::D:
      return (n - 1.0) * (at(var, p.k()) + at(var, p.l())) - at(j2, p.m());
  }
  return 0.0;
}

std::int64_t sample_cost(Scheme scheme, const Parameter& parameter, int n, const Budget& budget) {
  const std::int64_t nn = n;
  const std::int64_t k = budget.k;
  const std::int64_t l = budget.l;
  const std::int64_t v = variance_direction_count(parameter);
  switch (scheme) {
    case Scheme::TS:
      return 3 * k;
    case Scheme::AP1:
      return 3 * nn * (nn - 1) * k;
    case Scheme::AP2:
      return 3 * nn * (nn - 1) * k + v * nn * nn * k;
    case Scheme::RP1:
      return 3 * l * k;
    case Scheme::RP2:
      return 3 * l * k + v * l * k;
  }
  return 0;
}

SchemeDatasets collect_for(const StateModel& state, Scheme scheme, const Parameter& parameter,
                           const Budget& budget, Rng& rng) {
  parameter.validate();
  validate_budget(scheme, budget);
  SchemeDatasets out;
  for (Direction d : kDirections) {
    const std::size_t a = index_of(d);
    switch (scheme) {
      case Scheme::TS:
        out.ts[a] = collect_total_spin_block(state, d, budget.k, rng);
        break;
      case Scheme::AP1:
      case Scheme::AP2:
        out.pairs[a] = collect_all_pairs_block(state, d, budget.k, rng);
        break;
      case Scheme::RP1:
      case Scheme::RP2:
        out.pairs[a] = collect_random_pairs_block(state, d, budget.l, budget.k, rng);
        break;
    }
  }
  if (scheme == Scheme::AP2 || scheme == Scheme::RP2) {
    for (Direction d : kDirections) {
      if (!parameter.needs_variance(d)) continue;
      out.split[index_of(d)] =
          scheme == Scheme::AP2
              ? collect_split_single_block(state, d, budget.k, rng)
              : collect_random_split_block(state, d, budget.l, budget.k, rng);
    }
  }
  return out;
}

EstimateResult estimate_parameter(Scheme scheme, const Parameter& parameter,
                                  const SchemeDatasets& data) {
  parameter.validate();
  EstimateResult res;
  res.scheme = scheme;
  res.parameter = parameter;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  res.second_moment = {nan, nan, nan};
  res.variance = {nan, nan, nan};

  std::set<const void*> used;
  auto claim = [&](const void* ptr, const std::string& role) {
    require(used.insert(ptr).second,
            "the same dataset object backs two blocks (" + role +
                ") that must come from independent measurements");
  };
  int n = -1;
  std::optional<Budget> budget;
  auto agree = [&](int block_n, Budget b, const std::string& role) {
    if (n < 0) n = block_n;
    require(block_n == n, "block " + role + " has N = " + std::to_string(block_n) +
                              ", expected " + std::to_string(n));
    if (!budget) budget = b;
    require(*budget == b, "block " + role + " has a budget inconsistent with the other blocks");
  };

  const bool split_scheme = scheme == Scheme::AP2 || scheme == Scheme::RP2;
  const Pattern pair_pattern =
      scheme == Scheme::RP1 || scheme == Scheme::RP2 ? Pattern::RandomPairs : Pattern::AllPairs;
  const Pattern split_pattern = scheme == Scheme::RP2 ? Pattern::RandomSplit : Pattern::Split;

  for (Direction d : kDirections) {
    const std::size_t a = index_of(d);
    const bool want_var = parameter.needs_variance(d);
    const bool want_j2 = needs_second_moment(parameter, d);
    const std::string dn = dir_name(d);
    if (scheme == Scheme::TS) {
      const auto& blk = data.ts[a];
      require(blk != nullptr, "missing total-spin block for direction " + dn);
      require(blk->direction == d, "total-spin block in slot " + dn + " holds direction " +
                                       dir_name(blk->direction));
      claim(blk.get(), "ts/" + dn);
      agree(blk->n, Budget{blk->reps(), 0}, "ts/" + dn);
      if (want_j2) res.second_moment[a] = est_J2_ts(*blk);
      if (want_var) res.variance[a] = est_deltaJ2_ts(*blk);
      continue;
    }
    const auto& blk = data.pairs[a];
    require(blk != nullptr, "missing " + to_string(pair_pattern) + " block for direction " + dn);
    require(blk->pattern == pair_pattern, "block for direction " + dn + " is " +
                                              to_string(blk->pattern) + ", scheme " +
                                              to_string(scheme) + " needs " +
                                              to_string(pair_pattern));
    require(blk->direction == d, "pair block in slot " + dn + " holds direction " +
                                     dir_name(blk->direction));
    claim(blk.get(), to_string(pair_pattern) + "/" + dn);
    const bool random = pair_pattern == Pattern::RandomPairs;
    agree(blk->n, random ? Budget{blk->reps, blk->slots()} : Budget{blk->reps, 0},
          to_string(pair_pattern) + "/" + dn);
    const double j2 = random ? est_J2_rp(*blk) : est_J2_ap(*blk);
    if (want_j2) res.second_moment[a] = j2;
    if (!want_var) continue;
    if (!split_scheme) {
      res.variance[a] = random ? est_deltaJ2_rp(*blk) : est_deltaJ2_ap(*blk);
      continue;
    }
    const auto& sb = data.split[a];
    require(sb != nullptr, "missing " + to_string(split_pattern) + " block for direction " + dn);
    require(sb->pattern == split_pattern, "split block for direction " + dn + " is " +
                                              to_string(sb->pattern) + ", expected " +
                                              to_string(split_pattern));
    require(sb->direction == d, "split block in slot " + dn + " holds direction " +
                                    dir_name(sb->direction));
    claim(sb.get(), to_string(split_pattern) + "/" + dn);
    require(sb->n == n, "split block " + dn + " has a different N");
    require(sb->scheme_reps() == budget->k,
            "split block " + dn + " has K = " + std::to_string(sb->scheme_reps()) +
                ", pair blocks have K = " + std::to_string(budget->k));
    if (random) {
      require(sb->slots() == budget->l, "random-split block " + dn + " has L = " +
                                            std::to_string(sb->slots()) + ", pair blocks have L = " +
                                            std::to_string(budget->l));
    }
    const double jsq = random ? est_Jsq_rsplit(*sb) : est_Jsq_split(*sb);
    res.variance[a] = j2 - jsq;
  }
  res.n = n;
  res.budget = *budget;
  validate_budget(scheme, res.budget);

  std::array<double, 3> j2{};
  std::array<double, 3> var{};
  for (std::size_t a = 0; a < 3; ++a) {
    j2[a] = std::isnan(res.second_moment[a]) ? 0.0 : res.second_moment[a];
    var[a] = std::isnan(res.variance[a]) ? 0.0 : res.variance[a];
  }
  res.value = compose_parameter(parameter, n, j2, var);
  res.samples_used = sample_cost(scheme, parameter, n, res.budget);
  return res;
}

}  // namespace spinsq
