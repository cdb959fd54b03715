#include "spinsq/io.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace spinsq {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("dataset: " + msg);
}

const char* header_for(Pattern p) {
  switch (p) {
    case Pattern::TotalSpin:
      return "direction,rep,outcome2m";
    case Pattern::AllPairs:
      return "direction,i,j,rep,si2,sj2";
    case Pattern::Split:
      return "direction,i,j,rep,who,who_s2";
    case Pattern::RandomPairs:
      return "slot,direction,i,j,rep,si2,sj2";
    case Pattern::RandomSplit:
      return "slot,direction,i,j,rep,who,who_s2";
  }
  return "";
}

bool is_split(Pattern p) { return p == Pattern::Split || p == Pattern::RandomSplit; }
bool is_random(Pattern p) { return p == Pattern::RandomPairs || p == Pattern::RandomSplit; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

long long to_ll(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  require(!s.empty() && pos == s.size(), "malformed " + what + " '" + s + "'");
  return v;
}

std::int8_t to_spin(const std::string& s) {
  const long long v = to_ll(s, "single-qubit outcome");
  require(v == 1 || v == -1, "single-qubit outcome must be +1 or -1 (got " + s + ")");
  return static_cast<std::int8_t>(v);
}

}  // namespace

std::string PatternData::canonical() const {
  return "pattern=" + to_string(pattern) + ";n=" + std::to_string(n) +
         ";k=" + std::to_string(budget.k) + ";l=" + std::to_string(budget.l) +
         ";seed=" + std::to_string(seed) + ";state=" + state;
}

void write_dataset_csv(std::ostream& out, const PatternData& d) {
  out << "# spinsq-dataset v" << kSchemaVersion << " pattern=" << to_string(d.pattern)
      << " n=" << d.n << " k=" << d.budget.k << " l=" << d.budget.l << " seed=" << d.seed
      << " state=" << (d.state.empty() ? "-" : d.state)
      << " config=" << hex64(fnv1a64(d.canonical())) << "\n";
  out << header_for(d.pattern) << "\n";
  for (Direction dir : kDirections) {
    const char dc = to_char(dir);
    const std::size_t a = index_of(dir);
    if (d.pattern == Pattern::TotalSpin) {
      if (!d.ts[a]) continue;
      const auto& v = d.ts[a]->outcome2m;
      for (std::size_t r = 0; r < v.size(); ++r) out << dc << ',' << r << ',' << v[r] << '\n';
      continue;
    }
    const auto& b = d.blocks[a];
    if (!b) continue;
    for (int s = 0; s < b->slots(); ++s) {
      const auto [i, j] = b->pairs[static_cast<std::size_t>(s)];
      for (int r = 0; r < b->reps; ++r) {
        const std::size_t idx = static_cast<std::size_t>(s) * b->reps + r;
        const int f = b->first[idx];
        const int g = b->second[idx];
        std::ostringstream prefix;
        if (is_random(d.pattern)) prefix << s << ',';
        prefix << dc << ',' << i << ',' << j << ',' << r << ',';
        if (is_split(d.pattern)) {
          out << prefix.str() << "first," << f << '\n';
          out << prefix.str() << "second," << g << '\n';
        } else {
          out << prefix.str() << f << ',' << g << '\n';
        }
      }
    }
  }
}

PatternData read_dataset_csv(std::istream& in) {
  PatternData d;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty input");
  const std::string magic = "# spinsq-dataset v";
  require(line.rfind(magic, 0) == 0, "missing '# spinsq-dataset' schema line");
  std::map<std::string, std::string> meta;
  {
    std::istringstream ls(line.substr(2));
    std::string tok;
    ls >> tok;  // spinsq-dataset
    ls >> tok;
    require(tok == "v" + std::to_string(kSchemaVersion), "unsupported schema version " + tok);
    while (ls >> tok) {
      const auto eq = tok.find('=');
      require(eq != std::string::npos, "malformed schema field '" + tok + "'");
      meta[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  for (const char* key : {"pattern", "n", "k", "l"}) {
    require(meta.count(key) != 0, std::string("schema line lacks '") + key + "'");
  }
  d.pattern = parse_pattern(meta["pattern"]);
  d.n = static_cast<int>(to_ll(meta["n"], "n"));
  d.budget = {static_cast<int>(to_ll(meta["k"], "k")), static_cast<int>(to_ll(meta["l"], "l"))};
  if (meta.count("seed")) d.seed = std::stoull(meta["seed"]);
  if (meta.count("state") && meta["state"] != "-") d.state = meta["state"];
  require(d.n >= 1, "n must be positive");

  require(static_cast<bool>(std::getline(in, line)), "missing column header");
  require(line == header_for(d.pattern), "column header '" + line + "' does not match pattern " +
                                             to_string(d.pattern) + " (expected '" +
                                             header_for(d.pattern) + "')");

  const bool random = is_random(d.pattern);
  const bool split = is_split(d.pattern);
  const int reps = split ? d.budget.k / 2 : d.budget.k;
  require(reps >= 1, "budget k too small for pattern " + to_string(d.pattern));
  std::array<std::shared_ptr<TotalSpinBlock>, 3> ts{};
  std::array<std::shared_ptr<PairBlock>, 3> blocks{};
  // Per direction: slot key -> slot index, and per-record fill flags.
  std::array<std::map<long long, int>, 3> slot_of{};
  std::array<std::vector<char>, 3> seen_first{}, seen_second{};

  std::size_t row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string at = " (row " + std::to_string(row) + ")";
    std::size_t c = 0;
    long long slot_col = -1;
    if (random) {
      require(cells.size() == 7, "expected 7 columns" + at);
      slot_col = to_ll(cells[c++], "slot");
      require(slot_col >= 0, "negative slot" + at);
    } else {
      require(cells.size() == (d.pattern == Pattern::TotalSpin ? 3u : 6u),
              "wrong column count" + at);
    }
    const Direction dir = parse_direction(cells[c++]);
    const std::size_t a = index_of(dir);
    if (d.pattern == Pattern::TotalSpin) {
      const long long r = to_ll(cells[c++], "rep");
      const long long v = to_ll(cells[c++], "outcome2m");
      require(std::llabs(v) <= d.n && (v + d.n) % 2 == 0,
              "outcome2m " + std::to_string(v) + " impossible for N = " + std::to_string(d.n) + at);
      if (!ts[a]) {
        ts[a] = std::make_shared<TotalSpinBlock>();
        ts[a]->direction = dir;
        ts[a]->n = d.n;
      }
      require(r == static_cast<long long>(ts[a]->outcome2m.size()), "rep out of order" + at);
      ts[a]->outcome2m.push_back(static_cast<std::int16_t>(v));
      continue;
    }
    const int i = static_cast<int>(to_ll(cells[c++], "i"));
    const int j = static_cast<int>(to_ll(cells[c++], "j"));
    const long long r = to_ll(cells[c++], "rep");
    require(i >= 0 && j >= 0 && i < d.n && j < d.n, "qubit index out of range" + at);
    require(split || i != j, "pair with i == j in a two-qubit pattern" + at);
    require(r >= 0 && r < reps, "rep out of range" + at);
    if (!blocks[a]) {
      blocks[a] = std::make_shared<PairBlock>();
      blocks[a]->pattern = d.pattern;
      blocks[a]->direction = dir;
      blocks[a]->n = d.n;
      blocks[a]->reps = reps;
    }
    PairBlock& b = *blocks[a];
    const long long key = random ? slot_col : static_cast<long long>(i) * d.n + j;
    auto it = slot_of[a].find(key);
    if (it == slot_of[a].end()) {
      if (random) {
        require(slot_col == static_cast<long long>(b.pairs.size()), "slots out of order" + at);
      }
      it = slot_of[a].emplace(key, b.slots()).first;
      b.pairs.push_back({i, j});
      b.first.resize(b.first.size() + reps, 0);
      b.second.resize(b.second.size() + reps, 0);
      seen_first[a].resize(b.first.size(), 0);
      seen_second[a].resize(b.second.size(), 0);
    }
    const int s = it->second;
    require(b.pairs[static_cast<std::size_t>(s)] == std::array<int, 2>{i, j},
            "slot changes its qubit pair" + at);
    const std::size_t idx = static_cast<std::size_t>(s) * reps + static_cast<std::size_t>(r);
    auto put = [&](std::vector<std::int8_t>& v, std::vector<char>& seen, std::int8_t x) {
      require(!seen[idx], "duplicate record" + at);
      seen[idx] = 1;
      v[idx] = x;
    };
    if (split) {
      const std::string& who = cells[c++];
      const std::int8_t x = to_spin(cells[c++]);
      if (who == "first") {
        put(b.first, seen_first[a], x);
      } else if (who == "second") {
        put(b.second, seen_second[a], x);
      } else {
        require(false, "who must be 'first' or 'second'" + at);
      }
    } else {
      put(b.first, seen_first[a], to_spin(cells[c++]));
      put(b.second, seen_second[a], to_spin(cells[c++]));
    }
  }

  for (std::size_t a = 0; a < 3; ++a) {
    const std::string dn(1, to_char(kDirections[a]));
    if (ts[a]) {
      require(ts[a]->reps() == d.budget.k, "direction " + dn + " has " +
                                               std::to_string(ts[a]->reps()) + " outcomes, k = " +
                                               std::to_string(d.budget.k));
    }
    if (blocks[a]) {
      for (std::size_t x = 0; x < seen_first[a].size(); ++x) {
        require(seen_first[a][x] && seen_second[a][x], "incomplete records in direction " + dn);
      }
      if (random) {
        require(blocks[a]->slots() == d.budget.l, "direction " + dn + " has " +
                                                      std::to_string(blocks[a]->slots()) +
                                                      " slots, l = " + std::to_string(d.budget.l));
      }
    }
    d.ts[a] = ts[a];
    d.blocks[a] = blocks[a];
  }
  return d;
}

void merge_into(SchemeDatasets& target, const PatternData& data) {
  for (Direction dir : kDirections) {
    const std::size_t a = index_of(dir);
    const std::string dn(1, to_char(dir));
    if (data.pattern == Pattern::TotalSpin) {
      if (!data.ts[a]) continue;
      require(!target.ts[a], "two total-spin blocks for direction " + dn);
      target.ts[a] = data.ts[a];
      continue;
    }
    if (!data.blocks[a]) continue;
    auto& slot = is_split(data.pattern) ? target.split[a] : target.pairs[a];
    require(!slot, "two " + to_string(data.pattern) + " blocks for direction " + dn);
    slot = data.blocks[a];
  }
}

// ---------------------------------------------------------------------- json

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

json to_json(const Parameter& p) {
  std::string axes;
  for (Direction d : p.axes) axes += to_char(d);
  return {{"kind", std::string(1, static_cast<char>('a' + static_cast<int>(p.kind)))},
          {"axes", axes},
          {"label", to_string(p)}};
}

json to_json(const Budget& b) { return {{"k", b.k}, {"l", b.l}}; }

json to_json(const MomentAggregates& a) {
  return {{"j1", a.j1},
          {"j2", a.j2},
          {"j3", a.j3},
          {"j4", a.j4},
          {"sum_single_sq", a.sum_single_sq},
          {"sum_pair", a.sum_pair},
          {"sum_pair_sq", a.sum_pair_sq},
          {"mixed", a.mixed}};
}

json to_json(const EstimateResult& r) {
  json j = {{"schema", "spinsq-estimate/" + std::to_string(kSchemaVersion)},
            {"scheme", to_string(r.scheme)},
            {"parameter", to_json(r.parameter)},
            {"n", r.n},
            {"budget", to_json(r.budget)},
            {"value", r.value},
            {"samples_used", r.samples_used}};
  json second = json::object();
  json var = json::object();
  for (Direction d : kDirections) {
    const std::string key(1, to_char(d));
    second[key] = number_or_null(r.second_moment[index_of(d)]);
    var[key] = number_or_null(r.variance[index_of(d)]);
  }
  j["second_moment"] = second;
  j["variance_estimates"] = var;
  return j;
}

json to_json(const VarianceReport& r) {
  json contrib = json::object();
  json agg = json::object();
  for (Direction d : kDirections) {
    const std::string key(1, to_char(d));
    contrib[key] = r.contributions[index_of(d)];
    agg[key] = to_json(r.aggregates[index_of(d)]);
  }
  return {{"schema", "spinsq-variance/" + std::to_string(kSchemaVersion)},
          {"scheme", to_string(r.scheme)},
          {"parameter", to_json(r.parameter)},
          {"n", r.n},
          {"budget", to_json(r.budget)},
          {"value", r.value},
          {"contributions", contrib},
          {"aggregates", agg}};
}

json to_json(const SampleSizeResult& r) {
  return {{"schema", "spinsq-samplesize/" + std::to_string(kSchemaVersion)},
          {"scheme", to_string(r.scheme)},
          {"parameter", to_json(r.parameter)},
          {"n", r.n},
          {"t", r.t},
          {"gamma", r.gamma},
          {"worst_case_p", r.worst_case_p},
          {"worst_case_variance", r.worst_case_variance},
          {"budget", r.budget},
          {"detail", to_json(r.detail)},
          {"total_preparations", r.total_preparations},
          {"bound_at_budget", r.bound_at_budget},
          {"bound_at_previous", number_or_null(r.bound_at_previous)}};
}

json to_json(const Histogram& h) {
  return {{"anchor", h.anchor},       {"width", h.width},         {"counts", h.counts},
          {"underflow", h.underflow}, {"overflow", h.overflow}, {"edges", h.edges()}};
}

json to_json(const TrialStats& s, bool with_values) {
  json j = {{"schema", "spinsq-trials/" + std::to_string(kSchemaVersion)},
            {"state", s.config.state},
            {"scheme", to_string(s.config.scheme)},
            {"parameter", to_json(s.config.parameter)},
            {"budget", to_json(s.config.budget)},
            {"trials", s.config.trials},
            {"seed", s.config.seed},
            {"config_hash", s.config_hash},
            {"mean", s.mean},
            {"empirical_variance", s.empirical_variance},
            {"analytic_mean", s.analytic_mean},
            {"histogram", to_json(s.histogram)}};
  if (with_values) j["values"] = s.values;
  return j;
}

json to_json(const Comparison& c) {
  return {{"empirical", c.empirical},
          {"analytic", c.analytic},
          {"relative_deviation", std::isinf(c.relative_deviation) ? json(nullptr)
                                                                  : json(c.relative_deviation)},
          {"tolerance", c.tolerance},
          {"pass", c.pass}};
}

}  // namespace spinsq
