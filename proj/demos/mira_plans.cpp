// Best static drug plans back to the wild type for every initial genotype
// of a growth table. Usage: mira_plans [cpm|epm] [max_steps=6] [growth.csv]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "matchain/io.hpp"

int main(int argc, char** argv) {
  using namespace matchain;
  const std::string model = argc > 1 ? argv[1] : "cpm";
  const std::size_t max_steps = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 6;
  const std::string path = argc > 3 ? argv[3] : std::string(MATCHAIN_DATA_DIR) + "/mira2015_growth.csv";
  const auto growth = parse_growth_csv(path);
  const auto T = build_transitions(growth, model == "epm" ? ProbabilityModel::EPM : ProbabilityModel::CPM);
  const auto sp = growth.space();
  std::printf("initial");
  for (std::size_t n = 1; n <= max_steps; ++n) std::printf("   N=%-2zu", n);
  std::printf("  plan(N=%zu)\n", max_steps);
  for (std::size_t j = 1; j < sp.d(); ++j) {
    std::printf("%7s", sp.name(j).c_str());
    SolveReport last;
    for (std::size_t n = 1; n <= max_steps; ++n) {
      last = solve_atm(T, j, 0, n);
      std::printf("  %.3f", last.optimal_value);
    }
    std::printf(" ");
    for (auto k : last.optimal_sequence) std::printf(" %s", growth.drugs[k].c_str());
    std::printf("\n");
  }
}
