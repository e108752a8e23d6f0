#pragma once
#include <algorithm>
#include <chrono>
#include <vector>

#include "teesn/reservoir.hpp"
#include "teesn/rng.hpp"
#include "teesn/timecode.hpp"

namespace teesn {

struct BenchResult {
  int size = 0;
  long steps = 0;
  std::vector<double> rep_seconds;
  double median_seconds = 0.0;
  double checksum = 0.0;  // keeps the measured loop observable
};

// Wall time of the state-update loop (time encoding included, reservoir
// initialization excluded) over a unit-grid input of the given length.
inline BenchResult bench_run(int size, long steps, int reps = 3, uint64_t seed = 1) {
  if (size < 1 || steps < 1 || reps < 1) throw std::invalid_argument("bench: bad arguments");
  ReservoirParams p;
  p.size = size;
  p.seed = derive_seed(seed, 900);
  const TimeEncodingConfig te_cfg =
      TimeEncodingConfig::defaults(std::max(static_cast<double>(steps - 1), 3.0));
  const Reservoir res = init_reservoir(p, te_cfg.dim);

  Rng input_rng(derive_seed(seed, 901));
  std::vector<double> u(static_cast<size_t>(steps));
  for (auto& v : u) v = input_rng.uniform(-0.8, 0.8);

  BenchResult out;
  out.size = size;
  out.steps = steps;
  const std::vector<const Eigen::VectorXd*> no_neighbors;
  for (int rep = 0; rep < reps; ++rep) {
    ReservoirState st(size);
    const auto start = std::chrono::steady_clock::now();
    for (long t = 0; t < steps; ++t) {
      const auto te = time_encoding(static_cast<double>(t), 1.0, te_cfg);
      step(res, st, u[static_cast<size_t>(t)], te, no_neighbors);
    }
    const auto end = std::chrono::steady_clock::now();
    out.rep_seconds.push_back(std::chrono::duration<double>(end - start).count());
    out.checksum += st.fused.sum();
  }
  std::vector<double> sorted = out.rep_seconds;
  std::sort(sorted.begin(), sorted.end());
  out.median_seconds = sorted[sorted.size() / 2];
  return out;
}

}  // namespace teesn
