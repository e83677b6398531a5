// Learns the entanglement feature of a sampled Haar state and prints how the
// bond dimension responds to the stopping threshold.

#include <cmath>
#include <cstdio>
#include <memory>

#include "eftci/ef_analysis.hpp"
#include "eftci/state_zoo.hpp"

int main() {
  using namespace eftci;
  const int L = 10;
  auto state = gen_haar(L, /*seed=*/42);
  auto backend = std::make_shared<CachedPurity>(std::make_shared<DensePurityBackend>(state));

  std::printf("Haar sample, L = %d\n", L);
  std::printf("%-12s %-10s %-10s %-10s\n", "eps_th", "avg chi", "max chi", "queries");
  for (int k : {40, 50, 60, 70, 80}) {
    const double eps_th = std::pow(1.1, -k);
    TciOptions opts;
    opts.seed = 7;
    EFRecord rec = learn_ef(backend, "dual", opts, TciMode::kAdaptive, eps_th);
    std::printf("1.1^-%-7d %-10.2f %-10d %-10ld\n", k, rec.tt.avg_rank(), rec.tt.max_rank(),
                rec.n_queries);
  }
  return 0;
}
