// Branch-and-bound effort on synthetic EPM instances as N grows.
// Usage: scaling [g=4] [K=10] [max_steps=8] [seed=1]

#include <cstdio>
#include <cstdlib>

#include "matchain/timemachine.hpp"

int main(int argc, char** argv) {
  using namespace matchain;
  const unsigned g = argc > 1 ? static_cast<unsigned>(std::atoi(argv[1])) : 4;
  const std::size_t K = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 10;
  const std::size_t max_steps = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 8;
  const auto seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 1ULL;
  const auto T = build_epm(gen_synthetic(g, K, seed));
  const std::size_t d = std::size_t{1} << g;
  std::printf("N     avg_nodes   avg_seconds  (over %zu initial genotypes)\n", d - 1);
  for (std::size_t N = 1; N <= max_steps; ++N) {
    double nodes = 0.0, secs = 0.0;
    for (std::size_t j = 1; j < d; ++j) {
      const auto r = solve_atm(T, j, 0, N);
      nodes += static_cast<double>(r.node_count);
      secs += r.wall_time;
    }
    std::printf("%-4zu  %10.1f  %10.4f\n", N, nodes / static_cast<double>(d - 1), secs / static_cast<double>(d - 1));
  }
}
