#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinsq/cli.hpp"
#include "spinsq/io.hpp"

using namespace spinsq;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("spinsq_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // schema line
  std::getline(in, line);  // column header
  while (std::getline(in, line)) rows.push_back(line);
  return rows;
}

PatternData sampled(Pattern p, const StateModel& s, int k, int l, std::uint64_t seed) {
  PatternData d;
  d.pattern = p;
  d.n = s.num_qubits();
  d.budget = {k, l};
  d.seed = seed;
  Rng rng(seed);
  for (Direction dir : kDirections) {
    const auto a = index_of(dir);
    switch (p) {
      case Pattern::TotalSpin:
        d.ts[a] = collect_total_spin_block(s, dir, k, rng);
        break;
      case Pattern::AllPairs:
        d.blocks[a] = collect_all_pairs_block(s, dir, k, rng);
        break;
      case Pattern::Split:
        d.blocks[a] = collect_split_single_block(s, dir, k, rng);
        break;
      case Pattern::RandomPairs:
        d.blocks[a] = collect_random_pairs_block(s, dir, l, k, rng);
        break;
      case Pattern::RandomSplit:
        d.blocks[a] = collect_random_split_block(s, dir, l, k, rng);
        break;
    }
  }
  return d;
}

PatternData reparse(const std::string& text) {
  std::istringstream in(text);
  return read_dataset_csv(in);
}

}  // namespace

TEST(DatasetCsv, RoundTripEveryPattern) {
  const DickeState s(5, 2);
  for (Pattern p : {Pattern::TotalSpin, Pattern::AllPairs, Pattern::Split, Pattern::RandomPairs,
                    Pattern::RandomSplit}) {
    SCOPED_TRACE(to_string(p));
    const PatternData d = sampled(p, s, 4, 6, 11);
    std::ostringstream out;
    write_dataset_csv(out, d);
    const PatternData back = reparse(out.str());
    EXPECT_EQ(back.pattern, p);
    EXPECT_EQ(back.n, 5);
    EXPECT_EQ(back.budget, (d.budget.l ? d.budget : Budget{4, 0}));
    for (int a = 0; a < 3; ++a) {
      if (p == Pattern::TotalSpin) {
        EXPECT_EQ(back.ts[a]->outcome2m, d.ts[a]->outcome2m);
        continue;
      }
      EXPECT_EQ(back.blocks[a]->pairs, d.blocks[a]->pairs);
      EXPECT_EQ(back.blocks[a]->first, d.blocks[a]->first);
      EXPECT_EQ(back.blocks[a]->second, d.blocks[a]->second);
      EXPECT_EQ(back.blocks[a]->reps, d.blocks[a]->reps);
      EXPECT_EQ(back.blocks[a]->direction, d.blocks[a]->direction);
    }
    std::ostringstream again;
    write_dataset_csv(again, back);
    EXPECT_EQ(again.str(), out.str());
  }
}

TEST(DatasetCsv, HeadersFollowThePattern) {
  const DickeState s(3, 1);
  const std::vector<std::pair<Pattern, std::string>> cases = {
      {Pattern::TotalSpin, "direction,rep,outcome2m"},
      {Pattern::AllPairs, "direction,i,j,rep,si2,sj2"},
      {Pattern::Split, "direction,i,j,rep,who,who_s2"},
      {Pattern::RandomPairs, "slot,direction,i,j,rep,si2,sj2"},
      {Pattern::RandomSplit, "slot,direction,i,j,rep,who,who_s2"}};
  for (const auto& [p, header] : cases) {
    std::ostringstream out;
    write_dataset_csv(out, sampled(p, s, 2, 2, 1));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("# spinsq-dataset v1 pattern=" + to_string(p), 0), 0u) << line;
    std::getline(in, line);
    EXPECT_EQ(line, header);
  }
}

TEST(DatasetCsv, RejectsMalformedInput) {
  const std::string head = "# spinsq-dataset v1 pattern=ts n=4 k=2 l=0 seed=0 state=- config=0\n";
  const std::string cols = "direction,rep,outcome2m\n";
  EXPECT_NO_THROW(reparse(head + cols + "x,0,2\nx,1,-4\n"));
  EXPECT_THROW(reparse(""), std::invalid_argument);
  EXPECT_THROW(reparse(cols + "x,0,2\n"), std::invalid_argument);
  EXPECT_THROW(reparse("# spinsq-dataset v9 pattern=ts n=4 k=2 l=0\n" + cols), std::invalid_argument);
  EXPECT_THROW(reparse(head + "direction,rep,m\n"), std::invalid_argument);
  EXPECT_THROW(reparse(head + cols + "x,0,3\nx,1,0\n"), std::invalid_argument);
  EXPECT_THROW(reparse(head + cols + "x,0,6\nx,1,0\n"), std::invalid_argument);
  EXPECT_THROW(reparse(head + cols + "x,0,2\n"), std::invalid_argument);
  EXPECT_THROW(reparse(head + cols + "w,0,2\nw,1,2\n"), std::invalid_argument);
  EXPECT_THROW(reparse(head + cols + "x,0,two\nx,1,2\n"), std::invalid_argument);

  const std::string ph = "# spinsq-dataset v1 pattern=pairs n=2 k=1 l=0\n";
  const std::string pc = "direction,i,j,rep,si2,sj2\n";
  EXPECT_NO_THROW(reparse(ph + pc + "x,0,1,0,1,-1\nx,1,0,0,1,1\n"));
  EXPECT_THROW(reparse(ph + pc + "x,0,1,0,1,-1\nx,0,1,0,1,1\n"), std::invalid_argument);
  EXPECT_THROW(reparse(ph + pc + "x,0,0,0,1,-1\n"), std::invalid_argument);
  EXPECT_THROW(reparse(ph + pc + "x,0,2,0,1,-1\n"), std::invalid_argument);
  EXPECT_THROW(reparse(ph + pc + "x,0,1,0,2,-1\n"), std::invalid_argument);
  EXPECT_THROW(reparse(ph + pc + "x,0,1,1,1,-1\n"), std::invalid_argument);

  const std::string sh = "# spinsq-dataset v1 pattern=split n=2 k=2 l=0\n";
  const std::string sc = "direction,i,j,rep,who,who_s2\n";
  EXPECT_THROW(reparse(sh + sc + "x,0,0,0,first,1\n"), std::invalid_argument);
  EXPECT_THROW(reparse(sh + sc + "x,0,0,0,third,1\nx,0,0,0,second,1\n"), std::invalid_argument);
}

TEST(DatasetCsv, MergeRejectsDuplicateDirections) {
  const DickeState s(3, 1);
  SchemeDatasets sets;
  const auto d = sampled(Pattern::TotalSpin, s, 2, 0, 1);
  merge_into(sets, d);
  EXPECT_THROW(merge_into(sets, d), std::invalid_argument);
  merge_into(sets, sampled(Pattern::Split, s, 2, 0, 2));
  EXPECT_TRUE(sets.split[2] != nullptr);
}

TEST(Cli, SampleTotalSpinProducesOneRowPerMeasurement) {
  const auto r = cli({"sample", "--state", "dicke:10:5", "--pattern", "ts", "--k", "7400", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_rows(r.out).size(), 22200u);
}

TEST(Cli, SingletTotalSpinIsAlwaysZero) {
  const auto r = cli({"sample", "--state", "singlet:8", "--pattern", "ts", "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(r.out);
  EXPECT_EQ(rows.size(), 9u);
  for (const auto& row : rows) EXPECT_EQ(row.substr(row.rfind(',') + 1), "0");
}

TEST(Cli, SampleEstimateRoundTripIsBitExact) {
  TempDir dir;
  const DickeState s(6, 3);
  const Parameter c{};
  // AP2: pair data for every axis plus an independent split block for z.
  ASSERT_EQ(cli({"sample", "--state", "dicke:6:3", "--pattern", "pairs", "--k", "4", "--seed", "21",
                 "--out", dir.file("pairs.csv")})
                .code,
            0);
  ASSERT_EQ(cli({"sample", "--state", "dicke:6:3", "--pattern", "split", "--k", "4", "--seed", "22",
                 "--dirs", "z", "--out", dir.file("split.csv")})
                .code,
            0);
  const auto r = cli({"estimate", "--scheme", "ap2", "--param", "c", "--data", dir.file("pairs.csv"),
                      "--data", dir.file("split.csv")});
  ASSERT_EQ(r.code, 0) << r.err;

  SchemeDatasets mem;
  Rng a(21), b(22);
  for (Direction d : kDirections) mem.pairs[index_of(d)] = collect_all_pairs_block(s, d, 4, a);
  mem.split[2] = collect_split_single_block(s, Direction::Z, 4, b);
  const double expected = estimate_parameter(Scheme::AP2, c, mem).value;
  EXPECT_EQ(json::parse(r.out)["value"].get<double>(), expected);

  ASSERT_EQ(cli({"sample", "--state", "dicke:6:3", "--pattern", "rpairs", "--k", "1", "--l", "9",
                 "--seed", "5", "--out", dir.file("rp.csv")})
                .code,
            0);
  const auto rp = cli({"estimate", "--scheme", "rp1", "--data", dir.file("rp.csv")});
  ASSERT_EQ(rp.code, 0) << rp.err;
  SchemeDatasets mem_rp;
  Rng g(5);
  for (Direction d : kDirections) mem_rp.pairs[index_of(d)] = collect_random_pairs_block(s, d, 9, 1, g);
  EXPECT_EQ(json::parse(rp.out)["value"].get<double>(),
            estimate_parameter(Scheme::RP1, c, mem_rp).value);
}

TEST(Cli, EstimateSingletGivesZeroAndZeroPValue) {
  TempDir dir;
  ASSERT_EQ(cli({"sample", "--state", "singlet:8", "--pattern", "ts", "--k", "5", "--out",
                 dir.file("ts.csv")})
                .code,
            0);
  const auto r = cli({"estimate", "--scheme", "ts", "--param", "b", "--data", dir.file("ts.csv"),
                      "--state", "singlet:8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["value"].get<double>(), 0.0);
  EXPECT_EQ(j["p_value_bound"].get<double>(), 0.0);
  EXPECT_TRUE(j["violation"].get<bool>());
}

TEST(Cli, EstimateDickeNearThirty) {
  TempDir dir;
  ASSERT_EQ(cli({"sample", "--state", "dicke:10:5", "--pattern", "ts", "--k", "7400", "--seed", "3",
                 "--out", dir.file("ts.csv")})
                .code,
            0);
  const auto r = cli({"estimate", "--scheme", "ts", "--data", dir.file("ts.csv"), "--variance", "0.0284"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), 30.0, 5 * std::sqrt(0.0284));
  EXPECT_EQ(j["samples_used"].get<int>(), 22200);
  EXPECT_LT(j["p_value_bound"].get<double>(), 1e-4);
}

TEST(Cli, MissingDirectionIsNamed) {
  TempDir dir;
  ASSERT_EQ(cli({"sample", "--state", "dicke:4:2", "--pattern", "ts", "--k", "3", "--dirs", "xy",
                 "--out", dir.file("xy.csv")})
                .code,
            0);
  const auto r = cli({"estimate", "--scheme", "ts", "--data", dir.file("xy.csv")});
  EXPECT_EQ(r.code, 2);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["error"]["kind"], "validation");
  EXPECT_NE(e["error"]["message"].get<std::string>().find("direction z"), std::string::npos);
}

TEST(Cli, VarianceReferenceValue) {
  const auto r = cli({"variance", "--state", "dicke:10:5", "--scheme", "ts", "--param", "c", "--k", "7400"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), 0.0284, 5e-5);
  EXPECT_EQ(j["schema"], "spinsq-variance/1");
  EXPECT_TRUE(j.contains("config_hash"));
}

TEST(Cli, SampleSizeIsMinimal) {
  const auto r = cli({"samplesize", "--param", "c", "--n", "10", "--gamma", "0.95", "--t-rule",
                      "0.1halfN", "--scheme", "ts"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LE(j["bound_at_budget"].get<double>(), 0.05);
  EXPECT_GT(j["bound_at_previous"].get<double>(), 0.05);
  EXPECT_EQ(j["total_preparations"].get<long>(), 3 * j["budget"].get<long>());
}

TEST(Cli, SweepTable2) {
  const auto r = cli({"sweep", "--figure", "table2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 5u);
  const double expected[] = {0.0284, 5.5836, 24.5046, 5.5685, 25.6667};
  for (int i = 0; i < 5; ++i) {
    std::vector<std::string> cells;
    std::stringstream ss(rows[i]);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    EXPECT_NEAR(std::stod(cells[3]), expected[i], 5e-5) << rows[i];
  }
}

TEST(Cli, SweepFig8AndFig9HaveTheExpectedShape) {
  const auto f8 = cli({"sweep", "--figure", "fig8", "--points", "11"});
  ASSERT_EQ(f8.code, 0) << f8.err;
  std::istringstream in(f8.out);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "p,ts,ap1,ap2,rp1,rp2");
  EXPECT_EQ(f8.out.find("p_star=0.473684"), f8.out.find("p_star"));

  const auto f9 = cli({"sweep", "--figure", "fig9", "--n", "4", "--n", "6"});
  ASSERT_EQ(f9.code, 0) << f9.err;
  EXPECT_EQ(data_rows(f9.out).size(), 10u);
}

TEST(Cli, ExitCodesAndErrorJson) {
  auto r = cli({"nosuch"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NO_THROW(json::parse(r.err));
  r = cli({"variance", "--state", "dicke:10:5", "--scheme", "ts", "--k", "x"});
  EXPECT_EQ(r.code, 2);
  r = cli({"variance", "--state", "dicke:10:5", "--scheme", "ap2", "--k", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(json::parse(r.err)["error"]["message"].get<std::string>().find("even"), std::string::npos);
  r = cli({"variance", "--state", "blob:3", "--scheme", "ts", "--k", "3"});
  EXPECT_EQ(r.code, 2);
  r = cli({"variance", "--scheme", "ts", "--k", "3"});
  EXPECT_EQ(r.code, 2);
  r = cli({"variance", "--state", "dicke:4:2", "--scheme", "ts", "--k", "3", "--out",
           "/nonexistent-dir/out.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["kind"], "io");
  r = cli({"estimate", "--scheme", "ts", "--data", "/nonexistent-dir/in.csv"});
  EXPECT_EQ(r.code, 1);
  r = cli({"sweep", "--figure", "fig99"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  TempDir dir;
  {
    std::ofstream f(dir.file("run.cfg"));
    f << "# reference run\nstate=dicke:10:5\nscheme=ap1\nk=63\n";
  }
  auto r = cli({"variance", "--config", dir.file("run.cfg")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["value"].get<double>(), 7.267934, 1e-6);
  r = cli({"variance", "--config", dir.file("run.cfg"), "--k", "83"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["value"].get<double>(), 5.516325, 1e-6);
}

TEST(Cli, SeedFallsBackToEnvironment) {
  const std::vector<std::string> base = {"sample", "--state", "dicke:4:2", "--pattern", "ts", "--k", "20"};
  auto with_flag = base;
  with_flag.insert(with_flag.end(), {"--seed", "123"});
  const auto flagged = cli(with_flag);
  ::setenv("SPINSQ_SEED", "123", 1);
  const auto env = cli(base);
  ::setenv("SPINSQ_SEED", "999", 1);
  const auto overridden = cli(with_flag);
  ::setenv("SPINSQ_SEED", "abc", 1);
  const auto bad = cli(base);
  ::unsetenv("SPINSQ_SEED");
  EXPECT_EQ(flagged.out, env.out);
  EXPECT_EQ(flagged.out, overridden.out);
  EXPECT_EQ(bad.code, 2);
}

TEST(Cli, MonteCarloIsReproducible) {
  const std::vector<std::string> args = {"mc", "--state", "dicke:6:3", "--scheme", "rp1", "--k", "1",
                                         "--l", "40", "--trials", "400", "--seed", "8"};
  auto a_args = args;
  a_args.insert(a_args.end(), {"--threads", "1"});
  auto b_args = args;
  b_args.insert(b_args.end(), {"--threads", "3"});
  const auto a = cli(a_args);
  const auto b = cli(b_args);
  ASSERT_EQ(a.code, 0) << a.err;
  const json ja = json::parse(a.out), jb = json::parse(b.out);
  EXPECT_EQ(ja["mean"], jb["mean"]);
  EXPECT_EQ(ja["empirical_variance"], jb["empirical_variance"]);
  EXPECT_EQ(ja["histogram"], jb["histogram"]);
  EXPECT_TRUE(ja.contains("comparison"));

  auto c_args = args;
  c_args.insert(c_args.end(), {"--format", "csv"});
  const auto c = cli(c_args);
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out.rfind("# spinsq-histogram v1", 0), 0u);
}
