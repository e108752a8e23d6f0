#pragma once
#include <cmath>
#include <stdexcept>
#include <vector>

namespace teesn {

struct TimeVectorConfig {
  int dim = 64;          // d_TV, even
  double max_time = 1.0; // MT, largest wavelength base

  void validate() const {
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("timecode: dim must be even and >= 2");
    if (max_time <= 0.0) throw std::invalid_argument("timecode: max_time must be positive");
  }
};

struct TimeEncodingConfig {
  int dim = 64;                // d_TE, even; dim/2 complex components
  int num_freqs = 4;           // K
  std::vector<double> bases;   // M_0 .. M_{K-1}
  double max_time = 1.0;

  static TimeEncodingConfig defaults(double mt) {
    TimeEncodingConfig c;
    c.max_time = mt;
    c.bases = {mt / 2.0, mt, 2.0 * mt, 4.0 * mt};
    return c;
  }

  void validate() const {
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("timecode: dim must be even and >= 2");
    if (num_freqs < 1) throw std::invalid_argument("timecode: num_freqs must be >= 1");
    if (bases.size() != static_cast<size_t>(num_freqs))
      throw std::invalid_argument("timecode: bases size must equal num_freqs");
    for (double b : bases)
      if (!(b > 1.0)) throw std::invalid_argument("timecode: all bases must exceed 1");
    if (max_time <= 0.0) throw std::invalid_argument("timecode: max_time must be positive");
  }
};

// c_i = MT^(-2i/d_TV); output interleaves [sin(c_i t), cos(c_i t)].
inline std::vector<double> time_vector(double t, const TimeVectorConfig& cfg) {
  cfg.validate();
  std::vector<double> out(static_cast<size_t>(cfg.dim));
  for (int i = 0; i < cfg.dim / 2; ++i) {
    const double c = std::pow(cfg.max_time, -2.0 * i / cfg.dim);
    out[static_cast<size_t>(2 * i)] = std::sin(c * t);
    out[static_cast<size_t>(2 * i + 1)] = std::cos(c * t);
  }
  return out;
}

// Frequency ladder: component j draws base M_{j mod K}, exponent -2j/d_TE,
// scaled by the inverse sampling rate.
inline std::vector<double> te_frequencies(double rate, const TimeEncodingConfig& cfg) {
  cfg.validate();
  if (rate <= 0.0) throw std::invalid_argument("timecode: rate must be positive");
  std::vector<double> w(static_cast<size_t>(cfg.dim / 2));
  for (int j = 0; j < cfg.dim / 2; ++j) {
    const double m = cfg.bases[static_cast<size_t>(j % cfg.num_freqs)];
    w[static_cast<size_t>(j)] = std::pow(m, -2.0 * j / cfg.dim) / rate;
  }
  return w;
}

// Complex unit-circle encoding materialized as interleaved [cos(w_j t), sin(w_j t)].
inline std::vector<double> time_encoding(double t, double rate, const TimeEncodingConfig& cfg) {
  const auto w = te_frequencies(rate, cfg);
  std::vector<double> out(static_cast<size_t>(cfg.dim));
  for (size_t j = 0; j < w.size(); ++j) {
    out[2 * j] = std::cos(w[j] * t);
    out[2 * j + 1] = std::sin(w[j] * t);
  }
  return out;
}

// Real part of the Hermitian inner product of TE(t) and TE(t+p): sum_j cos(w_j p).
// Depends on the distance p only.
inline std::vector<std::pair<double, double>> dot_product_curve(const TimeEncodingConfig& cfg,
                                                                double rate,
                                                                const std::vector<double>& distances) {
  const auto w = te_frequencies(rate, cfg);
  std::vector<std::pair<double, double>> out;
  out.reserve(distances.size());
  for (double p : distances) {
    double s = 0.0;
    for (double wj : w) s += std::cos(wj * p);
    out.emplace_back(p, s);
  }
  return out;
}

// Reconstructs TV(t+p) from TV(t) by the 2x2 rotation with angles c_i p and
// returns the max absolute deviation from the directly computed TV(t+p).
inline double check_absolute_distance(double t, double p, const TimeVectorConfig& cfg) {
  const auto a = time_vector(t, cfg);
  const auto b = time_vector(t + p, cfg);
  double worst = 0.0;
  for (int i = 0; i < cfg.dim / 2; ++i) {
    const double c = std::pow(cfg.max_time, -2.0 * i / cfg.dim);
    const double sp = std::sin(c * p), cp = std::cos(c * p);
    const double s_t = a[static_cast<size_t>(2 * i)], c_t = a[static_cast<size_t>(2 * i + 1)];
    const double s_rec = s_t * cp + c_t * sp;  // sin(x+y)
    const double c_rec = c_t * cp - s_t * sp;  // cos(x+y)
    worst = std::max(worst, std::abs(s_rec - b[static_cast<size_t>(2 * i)]));
    worst = std::max(worst, std::abs(c_rec - b[static_cast<size_t>(2 * i + 1)]));
  }
  return worst;
}

}  // namespace teesn
