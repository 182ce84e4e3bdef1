// Heuristic vs globally optimal reflectance of coated Tungsten, one row per
// wavelength. Usage: tungsten_table [max_layers=3] [data.csv]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "matchain/io.hpp"

int main(int argc, char** argv) {
  using namespace matchain;
  const std::size_t max_layers = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 3;
  const std::string path = argc > 2 ? argv[2] : std::string(MATCHAIN_DATA_DIR) + "/refractive_index.csv";
  const auto table = parse_refractive_csv(path);
  std::printf("lambda");
  for (std::size_t n = 0; n <= max_layers; ++n) std::printf("  heur%zu", n);
  for (std::size_t n = 1; n <= max_layers; ++n) std::printf("   opt%zu", n);
  std::printf("\n");
  for (double lam : table.wavelengths()) {
    const auto lib = table.library("Tungsten", lam);
    std::printf("%6.0f", lam);
    for (std::size_t n = 0; n <= max_layers; ++n) std::printf("  %.3f", quarter_wave_heuristic(lib, n).reflectance);
    for (std::size_t n = 1; n <= max_layers; ++n) std::printf("  %.3f", solve_thinfilm(lib, n).report.optimal_value);
    std::printf("\n");
  }
}
