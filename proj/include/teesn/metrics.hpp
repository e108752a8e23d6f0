#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "teesn/readout.hpp"
#include "teesn/reservoir.hpp"
#include "teesn/rng.hpp"
#include "teesn/timecode.hpp"

namespace teesn {

inline std::string fnv1a_hex(const std::string& s) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct EvalReport {
  std::string metric;
  double value = 0.0;
  double dispersion = 0.0;  // std over folds/seeds
  std::vector<uint64_t> seeds;
  std::string params_hash;
  nlohmann::json extra;  // metric-specific run metadata

  void validate() const {
    if (!std::isfinite(value)) throw std::invalid_argument("metrics: report value must be finite");
    if (!(dispersion >= 0.0))
      throw std::invalid_argument("metrics: report dispersion must be >= 0");
  }

  nlohmann::json to_json() const {
    validate();
    nlohmann::json meta{{"seeds", seeds}, {"params_hash", params_hash}};
    if (!extra.is_null())
      for (auto& [k, v] : extra.items()) meta[k] = v;
    return {{"metric", metric}, {"value", value}, {"dispersion", dispersion}, {"metadata", meta}};
  }
};

inline double mse(const std::vector<double>& pred, const std::vector<double>& actual) {
  if (pred.size() != actual.size()) throw std::invalid_argument("metrics: length mismatch");
  if (pred.empty()) throw std::invalid_argument("metrics: empty input");
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - actual[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

// Mann-Whitney rank statistic; ties contribute 1/2.
inline double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("metrics: length mismatch");
  const size_t n = scores.size();
  size_t npos = 0;
  for (int l : labels) npos += (l != 0);
  const size_t nneg = n - npos;
  if (npos == 0 || nneg == 0) throw std::invalid_argument("metrics: auc needs both classes");

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (size_t m = i; m < j; ++m)
      if (labels[idx[m]] != 0) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos - static_cast<double>(npos) * (npos + 1) / 2.0;
  return u / (static_cast<double>(npos) * static_cast<double>(nneg));
}

// Pearson correlation squared; zero variance in either input yields 0 and
// raises the flag instead of erroring.
inline double squared_correlation(const std::vector<double>& a, const std::vector<double>& b,
                                  bool* degenerate = nullptr) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("metrics: bad r2 input");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (degenerate) *degenerate = false;
  if (saa <= 0.0 || sbb <= 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  const double r = sab / std::sqrt(saa * sbb);
  return r * r;
}

struct McResult {
  double mc = 0.0;
  std::vector<double> per_delay;  // r^2 for k = 0..k_max
};

// Short-term memory benchmark: drive the reservoir with i.i.d. uniform input
// on a unit grid, train one ridge readout per delay k to reconstruct u(t-k),
// and sum the squared correlations on the held-out tail. The te term is
// subtracted at the reconstructed value's own time t-k.
inline McResult memory_capacity(const ReservoirParams& params, bool te_enabled, int k_max,
                                uint64_t seed) {
  if (k_max < 1) throw std::invalid_argument("metrics: k_max must be >= 1");
  const int washout = 100;
  const int n_train = 2000, n_test = 1000;
  const int total = washout + n_train + n_test;
  if (k_max > washout) throw std::invalid_argument("metrics: k_max must not exceed the washout");
  const double lambda = 1e-6;

  Rng input_rng(derive_seed(seed, 11));
  std::vector<double> u(static_cast<size_t>(total));
  for (auto& v : u) v = input_rng.uniform(-0.8, 0.8);

  ReservoirParams rp = params;
  rp.seed = seed;
  const TimeEncodingConfig te_cfg = TimeEncodingConfig::defaults(static_cast<double>(total - 1));
  Reservoir res = init_reservoir(rp, te_cfg.dim);
  const int n = rp.size;

  Eigen::MatrixXd x(n, total);
  {
    ReservoirState st(n);
    std::vector<double> te;
    std::vector<const Eigen::VectorXd*> no_neighbors;
    for (int t = 0; t < total; ++t) {
      if (te_enabled) te = time_encoding(static_cast<double>(t), 1.0, te_cfg);
      x.col(t) = step(res, st, u[static_cast<size_t>(t)], te, no_neighbors);
    }
  }

  const Eigen::MatrixXd x_tr = x.middleCols(washout, n_train);
  const Eigen::MatrixXd x_te = x.middleCols(washout + n_train, n_test);
  const Eigen::MatrixXd g0 = x_tr * x_tr.transpose();

  const int d_te = te_cfg.dim;
  Eigen::MatrixXd e_tr, e_te;
  if (te_enabled) {
    e_tr.resize(d_te, n_train);
    e_te.resize(d_te, n_test);
  }

  McResult out;
  out.per_delay.reserve(static_cast<size_t>(k_max) + 1);
  std::vector<double> y_te_v(static_cast<size_t>(n_test));
  for (int k = 0; k <= k_max; ++k) {
    Eigen::VectorXd y_tr(n_train);
    for (int t = 0; t < n_train; ++t) y_tr(t) = u[static_cast<size_t>(washout + t - k)];
    for (int t = 0; t < n_test; ++t)
      y_te_v[static_cast<size_t>(t)] = u[static_cast<size_t>(washout + n_train + t - k)];

    Eigen::MatrixXd gram = g0;
    Eigen::VectorXd rhs = x_tr * y_tr;
    if (te_enabled) {
      for (int t = 0; t < n_train; ++t) {
        const auto te = time_encoding(static_cast<double>(washout + t - k), 1.0, te_cfg);
        for (int j = 0; j < d_te; ++j) e_tr(j, t) = te[static_cast<size_t>(j)];
      }
      for (int t = 0; t < n_test; ++t) {
        const auto te = time_encoding(static_cast<double>(washout + n_train + t - k), 1.0, te_cfg);
        for (int j = 0; j < d_te; ++j) e_te(j, t) = te[static_cast<size_t>(j)];
      }
      const Eigen::MatrixXd xe = x_tr * e_tr.transpose();      // N x d
      const Eigen::MatrixXd axe = xe * res.w_te.transpose();   // N x N
      const Eigen::MatrixXd ee = e_tr * e_tr.transpose();      // d x d
      gram -= axe + axe.transpose();
      gram += res.w_te * ee * res.w_te.transpose();
      rhs -= res.w_te * (e_tr * y_tr);
    }
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd w = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(rhs);

    Eigen::VectorXd pred = x_te.transpose() * w;
    if (te_enabled) pred -= e_te.transpose() * (res.w_te.transpose() * w);
    std::vector<double> pred_v(pred.data(), pred.data() + pred.size());
    out.per_delay.push_back(squared_correlation(pred_v, y_te_v));
    out.mc += out.per_delay.back();
  }
  return out;
}

}  // namespace teesn
