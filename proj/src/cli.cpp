#include "spinsq/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spinsq/hypothesis.hpp"
#include "spinsq/io.hpp"
#include "spinsq/moment_table.hpp"
#include "spinsq/montecarlo.hpp"
#include "spinsq/rng.hpp"
#include "spinsq/schemes.hpp"
#include "spinsq/states.hpp"
#include "spinsq/variance.hpp"

namespace spinsq {

Budget table2_budget(Scheme scheme) {
  switch (scheme) {
    case Scheme::TS:
      return {7400, 0};
    case Scheme::AP1:
      return {82, 0};
    case Scheme::AP2:
      return {60, 0};
    case Scheme::RP1:
      return {1, 7400};
    case Scheme::RP2:
      return {2, 2775};
  }
  return {};
}

namespace {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string state;
  std::string scheme;
  std::string param = "c";
  std::string pattern;
  std::string dirs = "xyz";
  std::string out;
  std::string format;
  std::string figure;
  std::string t_rule = "0.1halfN";
  std::vector<std::string> data;
  std::vector<int> n;
  int k = 0;
  int l = 0;
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  int threads = 0;
  int bins = 99;
  double width = 0.0;
  double gamma = 0.95;
  std::optional<double> t;
  std::optional<double> variance;
  int points = 101;
  bool exact_slots = false;
  bool values = false;

  std::string canonical() const {
    std::ostringstream s;
    s << std::setprecision(17) << "cmd=" << command << ";state=" << state
      << ";scheme=" << scheme << ";param=" << param << ";pattern=" << pattern
      << ";dirs=" << dirs << ";k=" << k << ";l=" << l << ";trials=" << trials
      << ";seed=" << seed << ";gamma=" << gamma << ";t_rule=" << t_rule
      << ";t=" << (t ? std::to_string(*t) : "-") << ";figure=" << figure
      << ";exact_slots=" << exact_slots << ";bins=" << bins << ";width=" << width << ";n=";
    for (int v : n) s << v << ',';
    s << ";data=";
    for (const auto& d : data) s << d << ',';
    return s.str();
  }
  std::string hash() const { return hex64(fnv1a64(canonical())); }
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string header_line(const std::string& kind, const RunConfig& c) {
  return "# spinsq-" + kind + " v" + std::to_string(kSchemaVersion) +
         " seed=" + std::to_string(c.seed) + " config=" + c.hash() + "\n";
}

json stamp(json j, const RunConfig& c) {
  j["config_hash"] = c.hash();
  j["seed"] = c.seed;
  return j;
}

Scheme need_scheme(const RunConfig& c) {
  require(!c.scheme.empty(), "--scheme is required for '" + c.command + "'");
  return parse_scheme(c.scheme);
}

StatePtr need_state(const RunConfig& c) {
  require(!c.state.empty(), "--state is required for '" + c.command + "'");
  return parse_state(c.state);
}

Budget cli_budget(const RunConfig& c, Scheme s) {
  const Budget b{c.k, c.l};
  validate_budget(s, b);
  return b;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

// ------------------------------------------------------------- subcommands

std::string cmd_sample(const RunConfig& c) {
  const StatePtr state = need_state(c);
  require(!c.pattern.empty(), "--pattern is required for 'sample'");
  PatternData d;
  d.pattern = parse_pattern(c.pattern);
  d.n = state->num_qubits();
  d.budget = {c.k, c.l};
  d.seed = c.seed;
  d.state = c.state;
  const bool random = d.pattern == Pattern::RandomPairs || d.pattern == Pattern::RandomSplit;
  require(c.k >= 1, "--k must be positive");
  if (random) {
    require(c.l >= 1, "--l must be positive for pattern " + to_string(d.pattern));
  } else {
    d.budget.l = 0;
  }
  require(!c.dirs.empty(), "--dirs must name at least one direction");
  std::vector<Direction> dirs;
  for (char ch : c.dirs) {
    const Direction dir = parse_direction(std::string(1, ch));
    require(std::find(dirs.begin(), dirs.end(), dir) == dirs.end(),
            "direction listed twice in --dirs");
    dirs.push_back(dir);
  }
  Rng rng(c.seed);
  for (Direction dir : dirs) {
    const std::size_t a = index_of(dir);
    switch (d.pattern) {
      case Pattern::TotalSpin:
        d.ts[a] = collect_total_spin_block(*state, dir, c.k, rng);
        break;
      case Pattern::AllPairs:
        d.blocks[a] = collect_all_pairs_block(*state, dir, c.k, rng);
        break;
      case Pattern::Split:
        d.blocks[a] = collect_split_single_block(*state, dir, c.k, rng);
        break;
      case Pattern::RandomPairs:
        d.blocks[a] = collect_random_pairs_block(*state, dir, c.l, c.k, rng);
        break;
      case Pattern::RandomSplit:
        d.blocks[a] = collect_random_split_block(*state, dir, c.l, c.k, rng);
        break;
    }
  }
  std::ostringstream s;
  write_dataset_csv(s, d);
  return s.str();
}

std::string cmd_estimate(const RunConfig& c) {
  const Scheme scheme = need_scheme(c);
  const Parameter param = parse_parameter(c.param);
  require(!c.data.empty(), "--data is required for 'estimate'");
  SchemeDatasets sets;
  for (const auto& path : c.data) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open dataset '" + path + "'");
    try {
      merge_into(sets, read_dataset_csv(f));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
  }
  const EstimateResult r = estimate_parameter(scheme, param, sets);
  json j = to_json(r);
  std::optional<double> variance = c.variance;
  if (!c.state.empty()) {
    require(!variance, "give either --state or --variance, not both");
    const StatePtr state = parse_state(c.state);
    require(state->num_qubits() == r.n, "state has N = " + std::to_string(state->num_qubits()) +
                                   " but the data have N = " + std::to_string(r.n));
    VarianceOptions opts;
    opts.exact_random_slots = true;
    variance = var_parameter(moment_table(*state), scheme, param, r.budget, opts).value;
  }
  if (variance) {
    require(*variance >= 0.0, "--variance must be non-negative");
    const SeparableBound sb = separable_bound(param, r.n);
    const PValueBound pv = p_value_bound(r.value, sb, *variance);
    j["variance_source"] = c.state.empty() ? "user" : "analytic";
    j["estimator_variance"] = *variance;
    j["separable_bound"] = {{"value", sb.bound}, {"violation_side", to_string(sb.side)}};
    j["p_value_bound"] = pv.value;
    j["violation"] = pv.violation;
    j["margin"] = pv.margin;
  }
  return stamp(j, c).dump(2) + "\n";
}

std::string cmd_variance(const RunConfig& c) {
  const StatePtr state = need_state(c);
  const Scheme scheme = need_scheme(c);
  const Parameter param = parse_parameter(c.param);
  VarianceOptions opts;
  opts.exact_random_slots = c.exact_slots;
  const VarianceReport r =
      var_parameter(moment_table(*state), scheme, param, cli_budget(c, scheme), opts);
  if (c.format == "csv") {
    return header_line("variance", c) + "state,scheme,param,n,k,l,variance\n" + c.state + ',' +
           to_string(scheme) + ',' + to_string(param) + ',' + std::to_string(r.n) + ',' +
           std::to_string(c.k) + ',' + std::to_string(c.l) + ',' + fmt(r.value) + "\n";
  }
  json j = to_json(r);
  j["state"] = c.state;
  j["exact_random_slots"] = c.exact_slots;
  return stamp(j, c).dump(2) + "\n";
}

double t_for(const RunConfig& c, int n) { return c.t ? *c.t : parse_t_rule(c.t_rule, n); }

std::string cmd_samplesize(const RunConfig& c) {
  const Parameter param = parse_parameter(c.param);
  std::vector<Scheme> schemes;
  if (c.scheme.empty()) {
    schemes.assign(kSchemes.begin(), kSchemes.end());
  } else {
    schemes.push_back(parse_scheme(c.scheme));
  }
  std::vector<int> ns = c.n;
  if (ns.empty()) {
    for (int n = 4; n <= 20; n += 2) ns.push_back(n);
  }
  std::vector<SampleSizeResult> results;
  for (int n : ns) {
    for (Scheme s : schemes) results.push_back(required_budget(s, param, n, t_for(c, n), c.gamma));
  }
  if (c.format == "json" || (c.format.empty() && results.size() == 1)) {
    if (results.size() == 1) return stamp(to_json(results[0]), c).dump(2) + "\n";
    json arr = json::array();
    for (const auto& r : results) arr.push_back(to_json(r));
    return stamp(json{{"results", arr}}, c).dump(2) + "\n";
  }
  std::string s = header_line("samplesize", c) +
                  "n,scheme,t,gamma,worst_case_p,worst_case_variance,budget,k,l,"
                  "total_preparations\n";
  for (const auto& r : results) {
    s += std::to_string(r.n) + ',' + to_string(r.scheme) + ',' + fmt(r.t) + ',' + fmt(r.gamma) +
         ',' + fmt(r.worst_case_p) + ',' + fmt(r.worst_case_variance) + ',' +
         std::to_string(r.budget) + ',' + std::to_string(r.detail.k) + ',' +
         std::to_string(r.detail.l) + ',' + std::to_string(r.total_preparations) + "\n";
  }
  return s;
}

std::string cmd_mc(const RunConfig& c) {
  const StatePtr state = need_state(c);
  const Scheme scheme = need_scheme(c);
  const Parameter param = parse_parameter(c.param);
  const Budget budget = cli_budget(c, scheme);
  require(c.threads >= 0, "--threads must be >= 0");
  const TrialStats stats =
      run_trials(*state, scheme, param, budget, c.trials, c.seed, c.threads, {c.bins, c.width});
  std::optional<Comparison> cmp;
  try {
    VarianceOptions opts;
    opts.exact_random_slots = true;
    cmp = compare_analytic(stats, var_parameter(moment_table(*state), scheme, param, budget, opts));
  } catch (const UnsupportedAnalyticCase&) {
  }
  if (c.format == "csv") {
    std::string s = header_line("histogram", c) + "# trials_hash=" + stats.config_hash +
                    " underflow=" + std::to_string(stats.histogram.underflow) +
                    " overflow=" + std::to_string(stats.histogram.overflow) + "\n" +
                    "bin_lo,bin_hi,count\n";
    const auto e = stats.histogram.edges();
    for (std::size_t i = 0; i < stats.histogram.counts.size(); ++i) {
      s += fmt(e[i]) + ',' + fmt(e[i + 1]) + ',' + std::to_string(stats.histogram.counts[i]) + "\n";
    }
    return s;
  }
  json j = to_json(stats, c.values);
  if (cmp) j["comparison"] = to_json(*cmp);
  return stamp(j, c).dump(2) + "\n";
}

std::string cmd_sweep(const RunConfig& c) {
  const Parameter param = parse_parameter(c.param);
  if (c.figure == "table2") {
    require(c.param == "c", "the table2 sweep is defined for parameter c only");
    const StatePtr state = std::make_shared<DickeState>(10, 5);
    const MomentTable table = moment_table(*state);
    std::string s = header_line("table2", c) + "scheme,k,l,variance,total_preparations\n";
    for (Scheme sc : kSchemes) {
      const Budget b = table2_budget(sc);
      s += to_string(sc) + ',' + std::to_string(b.k) + ',' + std::to_string(b.l) + ',' +
           fmt(var_parameter(table, sc, param, b).value) + ',' +
           std::to_string(sample_cost(sc, param, 10, b)) + "\n";
    }
    return s;
  }
  if (c.figure == "fig8") {
    const int n = c.n.empty() ? 10 : c.n.front();
    require(c.n.size() <= 1, "fig8 takes a single --n");
    require(c.points >= 2, "--points must be at least 2");
    std::vector<double> grid;
    for (int i = 0; i < c.points; ++i) grid.push_back(static_cast<double>(i) / (c.points - 1));
    std::vector<NoiseSweep> sweeps;
    for (Scheme sc : kSchemes) sweeps.push_back(sweep_noise(sc, param, n, table2_budget(sc), grid));
    std::string s = header_line("fig8", c) + "# n=" + std::to_string(n) +
                    " p_star=" + fmt(critical_noise(n)) + "\np";
    for (Scheme sc : kSchemes) s += ',' + to_string(sc);
    s += "\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      s += fmt(grid[g]);
      for (const auto& sw : sweeps) s += ',' + fmt(sw.rows[g].analytic);
      s += "\n";
    }
    return s;
  }
  if (c.figure == "fig9") {
    std::vector<int> ns = c.n;
    if (ns.empty()) {
      for (int n = 4; n <= 20; n += 2) ns.push_back(n);
    }
    std::string s = header_line("fig9", c) + "n,scheme,t,budget,k,l,total_preparations\n";
    for (int n : ns) {
      require(n >= 2, "fig9 needs N >= 2");
      const double t = t_for(c, n);
      for (Scheme sc : kSchemes) {
        const SampleSizeResult r = required_budget(sc, param, n, t, c.gamma);
        s += std::to_string(n) + ',' + to_string(sc) + ',' + fmt(t) + ',' +
             std::to_string(r.budget) + ',' + std::to_string(r.detail.k) + ',' +
             std::to_string(r.detail.l) + ',' + std::to_string(r.total_preparations) + "\n";
      }
    }
    return s;
  }
  throw std::invalid_argument("--figure must be table2, fig8 or fig9 (got '" + c.figure + "')");
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Spin-squeezing estimator simulator", "spinsq"};
  app.set_config("--config", "", "key=value configuration file; flags override it");
  app.fallthrough();
  app.require_subcommand(1, 1);

  app.add_option("--state", c.state, "dicke:N:m[:p] or singlet:N[:p]");
  app.add_option("--scheme", c.scheme, "ts|ap1|ap2|rp1|rp2");
  app.add_option("--param", c.param, "a|b|c|d[:kxlymz]");
  app.add_option("--pattern", c.pattern, "ts|pairs|split|rpairs|rsplit");
  app.add_option("--dirs", c.dirs, "directions to sample, e.g. xyz");
  app.add_option("--k", c.k, "repetitions per pair (per direction for ts)");
  app.add_option("--l", c.l, "number of random pairs");
  app.add_option("--trials", c.trials, "Monte Carlo trials");
  auto* seed_opt = app.add_option("--seed", c.seed, "master seed (default: $SPINSQ_SEED or 0)");
  app.add_option("--threads", c.threads, "OpenMP threads, 0 = auto");
  app.add_option("--out", c.out, "output file (default stdout)");
  app.add_option("--format", c.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--data", c.data, "dataset CSV (repeatable)");
  app.add_option("--n", c.n, "qubit numbers");
  app.add_option("--gamma", c.gamma, "confidence level");
  app.add_option("--t-rule", c.t_rule, "margin rule: 0.1halfN, <f>N or a number");
  app.add_option("--t", c.t, "explicit margin (overrides --t-rule)");
  app.add_option("--variance", c.variance, "estimator variance for the p-value bound");
  app.add_option("--figure", c.figure, "table2|fig8|fig9");
  app.add_option("--points", c.points, "noise grid points for fig8");
  app.add_option("--bins", c.bins, "histogram bins");
  app.add_option("--width", c.width, "histogram bin width, 0 = auto");
  app.add_flag("--exact-slots", c.exact_slots, "include within-slot correlations for RP");
  app.add_flag("--values", c.values, "include per-trial values in mc output");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"sample", "draw one measurement pattern and write it as CSV"},
      {"estimate", "estimate a parameter from dataset files"},
      {"variance", "analytic estimator variance"},
      {"samplesize", "required budget for a hypothesis test"},
      {"mc", "Monte Carlo trials of an estimator"},
      {"sweep", "regenerate a figure or table as CSV"}};
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&c, name = name] { c.command = name; });
  }

  std::string text;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    if (seed_opt->count() == 0) {
      if (const char* env = std::getenv("SPINSQ_SEED")) {
        try {
          std::size_t pos = 0;
          c.seed = std::stoull(env, &pos);
          require(pos == std::string(env).size(), "");
        } catch (const std::exception&) {
          throw std::invalid_argument("SPINSQ_SEED is not an unsigned integer: '" +
                                      std::string(env) + "'");
        }
      }
    }
    if (c.command == "sample") {
      text = cmd_sample(c);
    } else if (c.command == "estimate") {
      text = cmd_estimate(c);
    } else if (c.command == "variance") {
      text = cmd_variance(c);
    } else if (c.command == "samplesize") {
      text = cmd_samplesize(c);
    } else if (c.command == "mc") {
      text = cmd_mc(c);
    } else {
      text = cmd_sweep(c);
    }
    if (c.out.empty()) {
      out << text;
    } else {
      std::ofstream f(c.out);
      if (!f) throw IoError("cannot open output file '" + c.out + "'");
      f << text;
      if (!f) throw IoError("write to '" + c.out + "' failed");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::FileError& e) {
    emit_error(err, "io", e.what());
    return 1;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "validation", e.what());
    return 2;
  } catch (const IoError& e) {
    emit_error(err, "io", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    emit_error(err, "validation", e.what());
    return 2;
  } catch (const std::out_of_range& e) {
    emit_error(err, "validation", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error(err, "runtime", e.what());
    return 1;
  }
  return 0;
}

}  // namespace spinsq
