#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "teesn/dataset.hpp"
#include "teesn/errors.hpp"
#include "teesn/rng.hpp"
#include "teesn/timecode.hpp"

namespace teesn {

struct ReservoirParams {
  int size = 100;               // N
  double input_scale = 1.0;     // w_in
  double sparsity = 0.1;        // alpha, fraction of nonzero recurrent weights
  double spectral_radius = 0.7; // rho
  double leaky_rate = 0.8;      // gamma_l
  double fusion_rate = 1.0;     // gamma_f
  int long_skip = 6;            // k, in observation steps
  uint64_t seed = 0;

  void validate() const {
    if (size < 1) throw std::invalid_argument("reservoir: size must be >= 1");
    if (!(input_scale > 0.0 && input_scale <= 1.0))
      throw std::invalid_argument("reservoir: input_scale must be in (0,1]");
    if (!(sparsity > 0.0 && sparsity <= 1.0))
      throw std::invalid_argument("reservoir: sparsity must be in (0,1]");
    if (!(spectral_radius > 0.0 && spectral_radius <= 1.0))
      throw std::invalid_argument("reservoir: spectral_radius must be in (0,1]");
    if (leaky_rate < 0.0 || leaky_rate > 1.0)
      throw std::invalid_argument("reservoir: leaky_rate must be in [0,1]");
    if (fusion_rate < 0.0 || fusion_rate > 1.0)
      throw std::invalid_argument("reservoir: fusion_rate must be in [0,1]");
    if (long_skip < 1) throw std::invalid_argument("reservoir: long_skip must be >= 1");
  }
};

// Largest eigenvalue modulus from a growing Arnoldi factorization: the
// projected Hessenberg is eigensolved at a few checkpoint sizes and accepted
// once the dominant Ritz residual is negligible. If the Krylov space closes
// early, or the basis reaches the full dimension, the projected eigenvalues
// are exact. Handles complex dominant pairs, which plain power iteration
// never settles on.
inline double spectral_radius(const Eigen::SparseMatrix<double>& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("reservoir: spectral_radius needs a square matrix");
  const int n = static_cast<int>(a.rows());
  const double scale = a.norm();  // Frobenius
  if (scale == 0.0) return 0.0;
  Eigen::MatrixXd basis(n, n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  basis.col(0) = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (int col = 0; col < n; ++col) {
    Eigen::VectorXd v = a * basis.col(col);
    for (int pass = 0; pass < 2; ++pass)  // classical Gram-Schmidt, twice
      for (int j = 0; j <= col; ++j) {
        const double c = basis.col(j).dot(v);
        h(j, col) += c;
        v -= c * basis.col(j);
      }
    const double res = v.norm();
    const int m = col + 1;
    const bool closed = m == n || res <= 1e-13 * scale;
    if (closed || m == 32 || m == 64 || m == 128 || m == 256) {
      Eigen::EigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(m, m));
      if (es.info() != Eigen::Success)
        throw numeric_error("reservoir: spectral radius eigensolve failed");
      const Eigen::VectorXcd ev = es.eigenvalues();
      int best = 0;
      for (int i = 1; i < m; ++i)
        if (std::abs(ev[i]) > std::abs(ev[best])) best = i;
      const double est = std::abs(ev[best]);
      // closed: Ritz values are exact on the (invariant or full) space
      if (closed || res * std::abs(es.eigenvectors()(m - 1, best)) <= 1e-12 * scale)
        return est;
    }
    h(col + 1, col) = res;
    basis.col(col + 1) = v / res;
  }
  throw numeric_error("reservoir: spectral radius did not converge");
}

struct Reservoir {
  ReservoirParams params;
  Eigen::VectorXd w_in;                  // N
  Eigen::SparseMatrix<double> w_res;     // N x N
  Eigen::MatrixXd w_te;                  // N x d_TE
};

// Draw order is fixed (and mirrored by the oracle scripts): w_in, recurrent
// mask, recurrent values for every cell, spectral rescale, then w_te.
inline Reservoir init_reservoir(const ReservoirParams& params, int te_dim) {
  params.validate();
  if (te_dim < 1) throw std::invalid_argument("reservoir: te_dim must be >= 1");
  const int n = params.size;
  for (uint64_t attempt = 0; attempt < 8; ++attempt) {
    Rng rng(params.seed + attempt);
    Reservoir r;
    r.params = params;
    r.w_in.resize(n);
    for (int i = 0; i < n; ++i) r.w_in[i] = rng.uniform(-params.input_scale, params.input_scale);
    std::vector<char> mask(static_cast<size_t>(n) * n);
    for (auto& m : mask) m = rng.u01() < params.sparsity;
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double val = rng.uniform(-1.0, 1.0);
        if (mask[static_cast<size_t>(i) * n + j]) trips.emplace_back(i, j, val);
      }
    r.w_res.resize(n, n);
    r.w_res.setFromTriplets(trips.begin(), trips.end());
    const double rad = trips.empty() ? 0.0 : spectral_radius(r.w_res);
    if (rad <= 0.0) continue;  // degenerate draw, redraw with incremented seed
    r.w_res *= params.spectral_radius / rad;
    r.w_te.resize(n, te_dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < te_dim; ++j)
        r.w_te(i, j) = rng.uniform(-params.input_scale, params.input_scale);
    return r;
  }
  throw numeric_error("reservoir: could not draw a matrix with nonzero spectral radius");
}

struct ReservoirState {
  Eigen::VectorXd fused;                   // x-tilde at the previous own event
  std::vector<Eigen::VectorXd> raw_hist;   // raw core states, most recent last
  Eigen::VectorXd prefusion;               // latest long-short state x'

  explicit ReservoirState(int n)
      : fused(Eigen::VectorXd::Zero(n)), prefusion(Eigen::VectorXd::Zero(n)) {}
};

// One state update: core tanh step, long-short mixing over raw states at
// t-1 and t-k, then fusion with the neighbor mean. Missing history entries
// substitute zero vectors; an empty neighbor set makes fusion the identity.
inline Eigen::VectorXd step(const Reservoir& r, ReservoirState& st, double u,
                            const std::vector<double>& te,
                            const std::vector<const Eigen::VectorXd*>& neighbors) {
  const int n = r.params.size;
  Eigen::VectorXd pre = r.w_in * u + r.w_res * st.fused;
  if (!te.empty()) {
    if (static_cast<int>(te.size()) != r.w_te.cols())
      throw std::invalid_argument("reservoir: te dimension mismatch");
    pre += r.w_te * Eigen::Map<const Eigen::VectorXd>(te.data(), static_cast<long>(te.size()));
  }
  const Eigen::VectorXd core = pre.array().tanh();

  const double gl = r.params.leaky_rate;
  Eigen::VectorXd ls = gl * core;
  if (gl < 1.0) {
    const size_t h = st.raw_hist.size();
    const size_t k = static_cast<size_t>(r.params.long_skip);
    Eigen::VectorXd past = Eigen::VectorXd::Zero(n);
    if (h >= 1) past += st.raw_hist[h - 1];
    if (h >= k) past += st.raw_hist[h - k];
    ls += (1.0 - gl) * past;
  }
  st.raw_hist.push_back(core);
  if (st.raw_hist.size() > static_cast<size_t>(r.params.long_skip))
    st.raw_hist.erase(st.raw_hist.begin());

  Eigen::VectorXd fused;
  if (neighbors.empty()) {
    fused = ls;
  } else {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto* nb : neighbors) mean += *nb;
    mean /= static_cast<double>(neighbors.size());
    fused = r.params.fusion_rate * ls + (1.0 - r.params.fusion_rate) * mean;
  }
  st.prefusion = ls;
  st.fused = fused;
  return fused;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<size_t> obs_index;  // position within the series
  Eigen::MatrixXd states;         // N x steps, fused states
};

// Merged event timeline over all series; each reservoir fires only at its own
// observation times. Ties resolve in ascending series order. Neighbor fusion
// reads the most recent pre-fusion states of the other reservoirs.
inline std::vector<Trajectory> run_reservoirs(const std::vector<Reservoir>& reservoirs,
                                              const IstsDataset& ds,
                                              const TimeEncodingConfig& te_cfg, bool use_te,
                                              bool te_rate_scaling = true) {
  const size_t d_count = ds.series.size();
  if (reservoirs.size() != d_count)
    throw std::invalid_argument("reservoir: need one reservoir per series");
  if (d_count == 0) throw std::invalid_argument("reservoir: empty dataset");

  struct Event {
    double t;
    size_t d, i;
  };
  std::vector<Event> events;
  for (size_t d = 0; d < d_count; ++d)
    for (size_t i = 0; i < ds.series[d].obs.size(); ++i)
      events.push_back({ds.series[d].obs[i].time, d, i});
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.t != b.t ? a.t < b.t : a.d < b.d;
  });

  std::vector<ReservoirState> states;
  std::vector<Trajectory> out(d_count);
  for (size_t d = 0; d < d_count; ++d) {
    states.emplace_back(reservoirs[d].params.size);
    out[d].states.resize(reservoirs[d].params.size,
                         static_cast<long>(ds.series[d].obs.size()));
  }

  std::vector<double> te;
  for (const auto& ev : events) {
    const auto& series = ds.series[ev.d];
    if (use_te) {
      const double rate = te_rate_scaling ? series.sampling_rate : 1.0;
      te = time_encoding(ev.t, rate, te_cfg);
    }
    std::vector<const Eigen::VectorXd*> neighbors;
    for (size_t d = 0; d < d_count; ++d)
      if (d != ev.d) neighbors.push_back(&states[d].prefusion);
    const Eigen::VectorXd fused =
        step(reservoirs[ev.d], states[ev.d], series.obs[ev.i].value, te, neighbors);
    auto& tr = out[ev.d];
    tr.states.col(static_cast<long>(tr.times.size())) = fused;
    tr.times.push_back(ev.t);
    tr.obs_index.push_back(ev.i);
  }
  return out;
}

inline int washout_steps(size_t series_len) {
  return static_cast<int>(std::min<size_t>(30, series_len / 10));
}

}  // namespace teesn
