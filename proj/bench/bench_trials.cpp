// Wall-clock comparison of the serial and OpenMP trial drivers.
// Usage: spinsq_bench [trials] [threads]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "spinsq/montecarlo.hpp"
#include "spinsq/states.hpp"

using namespace spinsq;

namespace {

template <class F>
double time_s(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Budget small_budget(Scheme s) {
  switch (s) {
    case Scheme::RP1: return {1, 400};
    case Scheme::RP2: return {2, 200};
    case Scheme::AP2: return {4, 0};
    default: return {8, 0};
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t trials = argc > 1 ? std::atoll(argv[1]) : 2000;
  const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();
  const DickeState state(10, 5);
  std::printf("trials=%lld threads=%d state=%s\n", static_cast<long long>(trials), threads,
              state.describe().c_str());
  std::printf("%-6s %10s %10s %8s %s\n", "scheme", "serial_s", "omp_s", "speedup", "identical");
  for (Scheme s : kSchemes) {
    TrialStats a, b;
    const double ts = time_s([&] { a = run_trials_serial(state, s, Parameter{}, small_budget(s), trials, 1); });
    const double tp = time_s([&] { b = run_trials(state, s, Parameter{}, small_budget(s), trials, 1, threads); });
    std::printf("%-6s %10.3f %10.3f %8.2f %s\n", to_string(s).c_str(), ts, tp, ts / tp,
                a.values == b.values ? "yes" : "no");
  }
}
