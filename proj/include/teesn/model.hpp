#pragma once
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "teesn/dataset.hpp"
#include "teesn/errors.hpp"
#include "teesn/metrics.hpp"
#include "teesn/readout.hpp"
#include "teesn/reservoir.hpp"
#include "teesn/timecode.hpp"

namespace teesn {

enum class Variant { full, no_te, no_ls, no_sf, plain, single_freq };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_te: return "no-te";
    case Variant::no_ls: return "no-ls";
    case Variant::no_sf: return "no-sf";
    case Variant::plain: return "esn";
    case Variant::single_freq: return "single-freq";
  }
  throw std::invalid_argument("model: unknown variant");
}

inline Variant parse_variant(const std::string& s) {
  if (s == "full" || s == "te-esn") return Variant::full;
  if (s == "no-te") return Variant::no_te;
  if (s == "no-ls") return Variant::no_ls;
  if (s == "no-sf") return Variant::no_sf;
  if (s == "esn" || s == "plain") return Variant::plain;
  if (s == "single-freq") return Variant::single_freq;
  throw std::invalid_argument("model: unknown variant '" + s + "'");
}

struct ModelConfig {
  ReservoirParams res;
  int te_dim = 64;
  int te_freqs = 4;
  double lambda = 1e-2;
  int folds = 5;
  uint64_t seed = 1;
  Variant variant = Variant::full;

  void validate() const {
    res.validate();
    if (te_dim < 2 || te_dim % 2 != 0)
      throw std::invalid_argument("model: te_dim must be even and >= 2");
    if (te_freqs < 1) throw std::invalid_argument("model: te_freqs must be >= 1");
    if (lambda < 0.0) throw std::invalid_argument("model: lambda must be >= 0");
    if (folds < 2) throw std::invalid_argument("model: folds must be >= 2");
  }
};

inline bool variant_uses_te(Variant v) { return v != Variant::no_te && v != Variant::plain; }

// Apply the variant's structural overrides to a base configuration.
inline ModelConfig resolve_variant(ModelConfig cfg) {
  switch (cfg.variant) {
    case Variant::full:
    case Variant::no_te:
      break;
    case Variant::no_ls:
      cfg.res.leaky_rate = 1.0;
      break;
    case Variant::no_sf:
      cfg.res.fusion_rate = 1.0;
      break;
    case Variant::plain:
      cfg.res.leaky_rate = 1.0;
      cfg.res.fusion_rate = 1.0;
      break;
    case Variant::single_freq:
      cfg.te_dim = 32;
      cfg.te_freqs = 1;
      break;
  }
  return cfg;
}

// Geometric ladder of magnitude bases centered on max_time: K=4 gives
// {MT/2, MT, 2MT, 4MT}, K=1 gives {MT}.
inline TimeEncodingConfig make_te_config(const ModelConfig& cfg, double max_time) {
  TimeEncodingConfig c;
  c.dim = cfg.te_dim;
  c.num_freqs = cfg.te_freqs;
  c.max_time = max_time;
  c.bases.clear();
  const int shift = (cfg.te_freqs - 1) / 2;
  for (int k = 0; k < cfg.te_freqs; ++k)
    c.bases.push_back(max_time * std::pow(2.0, static_cast<double>(k - shift)));
  c.validate();
  return c;
}

struct TrainedModel {
  ModelConfig cfg;  // resolved
  bool use_te = false;
  double max_time = 0.0;
  std::vector<int> series_ids;
  std::vector<double> rates;
  std::vector<NormParams> norms;
  std::vector<Reservoir> reservoirs;
  TimeEncodingConfig te_cfg;
  Readout readout;
};

// Build reservoirs and normalization for a dataset; the readout stays empty.
inline TrainedModel assemble(const ModelConfig& base, const IstsDataset& ds) {
  if (ds.series.empty()) throw std::invalid_argument("model: dataset has no series");
  TrainedModel m;
  m.cfg = resolve_variant(base);
  if (ds.series.size() == 1 && m.cfg.res.fusion_rate != 1.0) {
    static bool warned = false;  // once per process; search loops hit this often
    if (!warned) {
      warned = true;
      std::cerr << "warning: single-series dataset, forcing fusion_rate to 1\n";
    }
    m.cfg.res.fusion_rate = 1.0;
  }
  m.cfg.validate();
  m.use_te = variant_uses_te(m.cfg.variant);
  m.max_time = ds.max_time;
  if (m.use_te) m.te_cfg = make_te_config(m.cfg, ds.max_time);
  const int te_dim = m.use_te ? m.cfg.te_dim : 0;
  for (size_t d = 0; d < ds.series.size(); ++d) {
    const auto& s = ds.series[d];
    m.series_ids.push_back(s.id);
    m.rates.push_back(s.sampling_rate);
    m.norms.push_back(fit_norm(s, 0, s.obs.size()));
    ReservoirParams rp = m.cfg.res;
    rp.seed = derive_seed(m.cfg.seed, 100 + static_cast<uint64_t>(d));
    m.reservoirs.push_back(init_reservoir(rp, std::max(te_dim, 2)));
  }
  return m;
}

// One-step-ahead training/evaluation samples: for each consecutive pair
// (t_i, t_{i+1}) within a series past its washout, the feature column is the
// D concatenated reservoir states as of t_i and the target is the normalized
// value at t_{i+1}; te columns hold each reservoir's projected encoding of
// the target time.
struct SampleSet {
  Eigen::MatrixXd states;
  Eigen::MatrixXd te_mat;
  Eigen::MatrixXd targets;          // 1 x S, normalized
  std::vector<double> times;        // target times
  std::vector<double> actual_raw;   // denormalized targets
  std::vector<size_t> series_of;
};

namespace detail {

// Column index of the latest trajectory state at or before t, or -1.
inline long latest_at(const Trajectory& tr, double t) {
  const auto it = std::upper_bound(tr.times.begin(), tr.times.end(), t);
  return static_cast<long>(it - tr.times.begin()) - 1;
}

inline Eigen::VectorXd projected_te(const TrainedModel& m, double t) {
  const int n = m.cfg.res.size;
  const size_t d_count = m.reservoirs.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<long>(d_count) * n);
  if (!m.use_te) return out;
  for (size_t d = 0; d < d_count; ++d) {
    const auto te = time_encoding(t, m.rates[d], m.te_cfg);
    out.segment(static_cast<long>(d) * n, n) =
        m.reservoirs[d].w_te *
        Eigen::Map<const Eigen::VectorXd>(te.data(), static_cast<long>(te.size()));
  }
  return out;
}

}  // namespace detail

inline SampleSet build_samples(const TrainedModel& m, const IstsDataset& ds) {
  if (ds.series.size() != m.reservoirs.size())
    throw std::invalid_argument("model: dataset series count does not match the model");
  const int n = m.cfg.res.size;
  const size_t d_count = ds.series.size();
  const auto trajs = run_reservoirs(m.reservoirs, ds, m.te_cfg, m.use_te);

  struct Pending {
    double t_target;
    size_t d;
    size_t obs_i;  // predict obs_i+1 from the state at obs_i
  };
  std::vector<Pending> pend;
  for (size_t d = 0; d < d_count; ++d) {
    const auto& s = ds.series[d];
    const size_t wash = static_cast<size_t>(washout_steps(s.obs.size()));
    for (size_t i = wash; i + 1 < s.obs.size(); ++i)
      pend.push_back({s.obs[i + 1].time, d, i});
  }
  std::sort(pend.begin(), pend.end(), [](const Pending& a, const Pending& b) {
    return a.t_target != b.t_target ? a.t_target < b.t_target : a.d < b.d;
  });

  SampleSet out;
  const long s_count = static_cast<long>(pend.size());
  out.states.resize(static_cast<long>(d_count) * n, s_count);
  out.te_mat = Eigen::MatrixXd::Zero(static_cast<long>(d_count) * n, s_count);
  out.targets.resize(1, s_count);
  for (long c = 0; c < s_count; ++c) {
    const auto& p = pend[static_cast<size_t>(c)];
    const double t_state = ds.series[p.d].obs[p.obs_i].time;
    for (size_t d = 0; d < d_count; ++d) {
      const long j = detail::latest_at(trajs[d], t_state);
      if (j >= 0)
        out.states.col(c).segment(static_cast<long>(d) * n, n) = trajs[d].states.col(j);
      else
        out.states.col(c).segment(static_cast<long>(d) * n, n).setZero();
    }
    if (m.use_te) out.te_mat.col(c) = detail::projected_te(m, p.t_target);
    const double raw = ds.series[p.d].obs[p.obs_i + 1].value;
    out.targets(0, c) = normalize_value(raw, m.norms[p.d]);
    out.times.push_back(p.t_target);
    out.actual_raw.push_back(raw);
    out.series_of.push_back(p.d);
  }
  return out;
}

inline TrainedModel train(const ModelConfig& cfg, const IstsDataset& ds) {
  TrainedModel m = assemble(cfg, ds);
  const SampleSet ss = build_samples(m, ds);
  if (ss.times.empty()) throw std::invalid_argument("model: no training samples after washout");
  DesignMatrices dm{ss.states, ss.te_mat, ss.targets};
  m.readout = fit(dm, m.cfg.lambda);
  return m;
}

struct Prediction {
  double time;
  double predicted;  // denormalized
  double actual;     // denormalized
  size_t series;
};

// Decode every sample with an already-fitted readout.
inline std::vector<Prediction> apply_model(const TrainedModel& m, const IstsDataset& ds) {
  const SampleSet ss = build_samples(m, ds);
  std::vector<Prediction> out;
  out.reserve(ss.times.size());
  for (long c = 0; c < static_cast<long>(ss.times.size()); ++c) {
    const Eigen::VectorXd y = decode(m.readout, ss.states.col(c), ss.te_mat.col(c));
    const size_t d = ss.series_of[static_cast<size_t>(c)];
    out.push_back({ss.times[static_cast<size_t>(c)], denormalize_value(y(0), m.norms[d]),
                   ss.actual_raw[static_cast<size_t>(c)], d});
  }
  return out;
}

// Raw linear score at a future time from the final reservoir states.
inline double early_predict(const TrainedModel& m, const IstsDataset& ds, double t_pre) {
  double last_obs = -std::numeric_limits<double>::infinity();
  for (const auto& s : ds.series) last_obs = std::max(last_obs, s.obs.back().time);
  if (t_pre < last_obs)
    throw std::invalid_argument("model: prediction time precedes the last observation");
  const int n = m.cfg.res.size;
  const auto trajs = run_reservoirs(m.reservoirs, ds, m.te_cfg, m.use_te);
  Eigen::VectorXd state(static_cast<long>(ds.series.size()) * n);
  for (size_t d = 0; d < ds.series.size(); ++d)
    state.segment(static_cast<long>(d) * n, n) = trajs[d].states.rightCols(1);
  const Eigen::VectorXd te_pre = detail::projected_te(m, t_pre);
  return decode(m.readout, state, te_pre)(0);
}

struct CvResult {
  std::vector<double> fold_mse;  // normalized scale
  double mean = 0.0;
  double stdev = 0.0;  // population std over folds
  std::vector<Prediction> predictions;
};

// Contiguous-block cross-validation over time-ordered samples: states are
// computed once (the reservoir is fixed), only the readout is refit per fold.
inline CvResult evaluate_cv(const ModelConfig& cfg, const IstsDataset& ds, int folds = 0) {
  TrainedModel m = assemble(cfg, ds);
  if (folds <= 0) folds = m.cfg.folds;
  const SampleSet ss = build_samples(m, ds);
  const long s_count = static_cast<long>(ss.times.size());
  if (s_count < folds) throw std::invalid_argument("model: fewer samples than folds");

  CvResult out;
  out.predictions.resize(static_cast<size_t>(s_count));
  for (int f = 0; f < folds; ++f) {
    const long lo = s_count * f / folds;
    const long hi = s_count * (f + 1) / folds;
    const long n_test = hi - lo, n_train = s_count - n_test;
    DesignMatrices dm;
    dm.states.resize(ss.states.rows(), n_train);
    dm.te_mat.resize(ss.states.rows(), n_train);
    dm.targets.resize(1, n_train);
    long c = 0;
    for (long i = 0; i < s_count; ++i) {
      if (i >= lo && i < hi) continue;
      dm.states.col(c) = ss.states.col(i);
      dm.te_mat.col(c) = ss.te_mat.col(i);
      dm.targets(0, c) = ss.targets(0, i);
      ++c;
    }
    const Readout ro = fit(dm, m.cfg.lambda);
    double acc = 0.0;
    for (long i = lo; i < hi; ++i) {
      const double y = decode(ro, ss.states.col(i), ss.te_mat.col(i))(0);
      const double e = y - ss.targets(0, i);
      acc += e * e;
      const size_t d = ss.series_of[static_cast<size_t>(i)];
      out.predictions[static_cast<size_t>(i)] = {ss.times[static_cast<size_t>(i)],
                                                 denormalize_value(y, m.norms[d]),
                                                 ss.actual_raw[static_cast<size_t>(i)], d};
    }
    out.fold_mse.push_back(acc / static_cast<double>(n_test));
  }
  for (double v : out.fold_mse) out.mean += v;
  out.mean /= static_cast<double>(folds);
  double var = 0.0;
  for (double v : out.fold_mse) var += (v - out.mean) * (v - out.mean);
  out.stdev = std::sqrt(var / static_cast<double>(folds));
  return out;
}

// --- model artifact (JSON) ---

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["format"] = "teesn-model";
  j["version"] = 1;
  j["variant"] = variant_name(m.cfg.variant);
  j["seed"] = m.cfg.seed;
  j["lambda"] = m.cfg.lambda;
  j["folds"] = m.cfg.folds;
  j["te_dim"] = m.cfg.te_dim;
  j["te_freqs"] = m.cfg.te_freqs;
  j["reservoir"] = {{"size", m.cfg.res.size},
                    {"input_scale", m.cfg.res.input_scale},
                    {"sparsity", m.cfg.res.sparsity},
                    {"spectral_radius", m.cfg.res.spectral_radius},
                    {"leaky_rate", m.cfg.res.leaky_rate},
                    {"fusion_rate", m.cfg.res.fusion_rate},
                    {"long_skip", m.cfg.res.long_skip}};
  j["max_time"] = m.max_time;
  j["series_ids"] = m.series_ids;
  j["rates"] = m.rates;
  nlohmann::json norms = nlohmann::json::array();
  for (const auto& nm : m.norms)
    norms.push_back({{"mean", nm.mean}, {"scale", nm.scale}, {"zero_variance", nm.zero_variance}});
  j["norms"] = norms;
  j["readout"] = {{"rows", m.readout.w_out.rows()},
                  {"cols", m.readout.w_out.cols()},
                  {"ridge", m.readout.ridge}};
  std::vector<double> w(m.readout.w_out.data(),
                        m.readout.w_out.data() + m.readout.w_out.size());
  j["readout"]["w_out"] = w;  // column-major
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j["format"] != "teesn-model")
    throw artifact_error("model: not a model artifact");
  ModelConfig cfg;
  cfg.variant = parse_variant(j.at("variant").get<std::string>());
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.lambda = j.at("lambda").get<double>();
  cfg.folds = j.at("folds").get<int>();
  cfg.te_dim = j.at("te_dim").get<int>();
  cfg.te_freqs = j.at("te_freqs").get<int>();
  const auto& r = j.at("reservoir");
  cfg.res.size = r.at("size").get<int>();
  cfg.res.input_scale = r.at("input_scale").get<double>();
  cfg.res.sparsity = r.at("sparsity").get<double>();
  cfg.res.spectral_radius = r.at("spectral_radius").get<double>();
  cfg.res.leaky_rate = r.at("leaky_rate").get<double>();
  cfg.res.fusion_rate = r.at("fusion_rate").get<double>();
  cfg.res.long_skip = r.at("long_skip").get<int>();

  TrainedModel m;
  m.cfg = cfg;  // already-resolved values were serialized
  m.cfg.validate();
  m.use_te = variant_uses_te(cfg.variant);
  m.max_time = j.at("max_time").get<double>();
  m.series_ids = j.at("series_ids").get<std::vector<int>>();
  m.rates = j.at("rates").get<std::vector<double>>();
  for (const auto& nm : j.at("norms"))
    m.norms.push_back({nm.at("mean").get<double>(), nm.at("scale").get<double>(),
                       nm.at("zero_variance").get<bool>()});
  if (m.series_ids.size() != m.rates.size() || m.norms.size() != m.rates.size())
    throw artifact_error("model: inconsistent series metadata");
  if (m.use_te) m.te_cfg = make_te_config(m.cfg, m.max_time);
  const int te_dim = m.use_te ? m.cfg.te_dim : 0;
  for (size_t d = 0; d < m.series_ids.size(); ++d) {
    ReservoirParams rp = m.cfg.res;
    rp.seed = derive_seed(m.cfg.seed, 100 + static_cast<uint64_t>(d));
    m.reservoirs.push_back(init_reservoir(rp, std::max(te_dim, 2)));
  }
  const auto& ro = j.at("readout");
  const long rows = ro.at("rows").get<long>(), cols = ro.at("cols").get<long>();
  const auto w = ro.at("w_out").get<std::vector<double>>();
  if (static_cast<long>(w.size()) != rows * cols)
    throw artifact_error("model: readout size mismatch");
  m.readout.w_out = Eigen::Map<const Eigen::MatrixXd>(w.data(), rows, cols);
  m.readout.ridge = ro.at("ridge").get<double>();
  return m;
}

}  // namespace teesn
