#pragma once
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "teesn/csv.hpp"
#include "teesn/errors.hpp"
#include "teesn/rng.hpp"

namespace teesn {

struct Observation {
  double time = 0.0;
  double value = 0.0;
};

struct IrregularSeries {
  int id = 0;
  std::vector<Observation> obs;
  double sampling_rate = 0.0;  // observations per unit time

  void validate() const {
    if (obs.size() < 2) throw std::invalid_argument("ists: series needs at least 2 observations");
    for (size_t i = 0; i < obs.size(); ++i) {
      if (!std::isfinite(obs[i].time) || !std::isfinite(obs[i].value))
        throw std::invalid_argument("ists: non-finite observation in series " + std::to_string(id));
      if (i > 0 && obs[i].time <= obs[i - 1].time)
        throw std::invalid_argument("ists: non-increasing timestamps in series " + std::to_string(id));
    }
  }
};

inline double estimate_rate(const IrregularSeries& s) {
  if (s.obs.size() < 2) throw std::invalid_argument("ists: rate needs at least 2 observations");
  const double span = s.obs.back().time - s.obs.front().time;
  if (span <= 0.0) throw std::invalid_argument("ists: zero time span");
  return static_cast<double>(s.obs.size() - 1) / span;
}

struct IstsDataset {
  std::vector<IrregularSeries> series;
  std::vector<Observation> targets;  // optional teacher signal
  double max_time = 0.0;

  void finalize() {
    if (series.empty()) throw std::invalid_argument("ists: dataset needs at least one series");
    max_time = 0.0;
    for (auto& s : series) {
      s.validate();
      s.sampling_rate = estimate_rate(s);
      max_time = std::max(max_time, s.obs.back().time);
    }
    for (const auto& t : targets)
      if (t.time < 0.0 || t.time > max_time)
        throw std::invalid_argument("ists: target timestamp outside [0, max_time]");
  }
};

struct MgParams {
  double delta = 0.1;
  double a = 0.2;
  double b = -0.1;  // stored as listed; the recurrence applies decay 0.1 (see generate_mg)
  int n = 10;
  double tau = 17.0;
  double y0 = 1.2;
  long length = 10000;

  void validate() const {
    if (delta <= 0.0) throw std::invalid_argument("mg: delta must be positive");
    if (tau <= 0.0) throw std::invalid_argument("mg: tau must be positive");
    if (n < 1) throw std::invalid_argument("mg: n must be >= 1");
    if (length < static_cast<long>(std::lround(tau / delta)))
      throw std::invalid_argument("mg: length must be at least tau/delta");
  }
};

// Euler integration of the Mackey-Glass system, one point per step
// (times 0, 1, 2, ...). The listed b = -0.1 would anti-damp as literally
// substituted, so the decay term uses magnitude 0.1; the guard below
// aborts if the trajectory ever leaves the chaotic band.
inline IrregularSeries generate_mg(const MgParams& p, uint64_t /*seed*/ = 0) {
  p.validate();
  const long ds = std::lround(p.tau / p.delta);
  const double decay = std::abs(p.b);
  std::vector<double> y(static_cast<size_t>(p.length));
  y[0] = p.y0;
  for (long m = 0; m + 1 < p.length; ++m) {
    const double yd = (m - ds >= 0) ? y[static_cast<size_t>(m - ds)] : p.y0;
    y[static_cast<size_t>(m + 1)] =
        y[static_cast<size_t>(m)] +
        p.delta * (p.a * yd / (1.0 + std::pow(yd, p.n)) - decay * y[static_cast<size_t>(m)]);
    if (std::abs(y[static_cast<size_t>(m + 1)]) > 10.0)
      throw numeric_error("mg: trajectory diverged; check sign convention");
  }
  IrregularSeries s;
  s.obs.resize(y.size());
  for (size_t i = 0; i < y.size(); ++i) s.obs[i] = {static_cast<double>(i), y[i]};
  s.sampling_rate = estimate_rate(s);
  return s;
}

// Keeps every stride-th observation, original timestamps.
inline IrregularSeries decimate(const IrregularSeries& in, long stride) {
  if (stride < 1) throw std::invalid_argument("ists: stride must be >= 1");
  IrregularSeries out;
  out.id = in.id;
  for (size_t i = 0; i < in.obs.size(); i += static_cast<size_t>(stride)) out.obs.push_back(in.obs[i]);
  if (out.obs.size() < 2) throw std::invalid_argument("ists: decimation left fewer than 2 observations");
  out.sampling_rate = estimate_rate(out);
  return out;
}

inline IrregularSeries scale_time(const IrregularSeries& in, double c) {
  if (c <= 0.0) throw std::invalid_argument("ists: time scale must be positive");
  IrregularSeries out = in;
  for (auto& o : out.obs) o.time *= c;
  out.sampling_rate = estimate_rate(out);
  return out;
}

struct IntervalDist {
  enum class Kind { constant, uniform } kind = Kind::uniform;
  long lo = 1;
  long hi = 6;
};

// Retains observation 0 and then jumps by random index gaps.
inline IrregularSeries irregular_subsample(const IrregularSeries& in, const IntervalDist& d,
                                           uint64_t seed) {
  if (d.lo < 1 || d.hi < d.lo) throw std::invalid_argument("ists: interval bounds must satisfy 1 <= lo <= hi");
  Rng rng(seed);
  IrregularSeries out;
  out.id = in.id;
  size_t i = 0;
  out.obs.push_back(in.obs[0]);
  while (true) {
    const long gap = (d.kind == IntervalDist::Kind::constant) ? d.lo : rng.uniform_int(d.lo, d.hi);
    i += static_cast<size_t>(gap);
    if (i >= in.obs.size()) break;
    out.obs.push_back(in.obs[i]);
  }
  if (out.obs.size() < 2) throw std::invalid_argument("ists: subsample left fewer than 2 observations");
  out.sampling_rate = estimate_rate(out);
  return out;
}

struct NormParams {
  double mean = 0.0;
  double scale = 1.0;
  bool zero_variance = false;
};

// z-score over the index range [lo, hi) (population std). Zero-variance
// series get scale 1 and a flag instead of an error.
inline NormParams fit_norm(const IrregularSeries& s, size_t lo, size_t hi) {
  if (hi > s.obs.size() || lo >= hi) throw std::invalid_argument("ists: bad normalization range");
  double mean = 0.0;
  for (size_t i = lo; i < hi; ++i) mean += s.obs[i].value;
  mean /= static_cast<double>(hi - lo);
  double var = 0.0;
  for (size_t i = lo; i < hi; ++i) {
    const double d = s.obs[i].value - mean;
    var += d * d;
  }
  var /= static_cast<double>(hi - lo);
  NormParams p;
  p.mean = mean;
  if (var > 0.0) {
    p.scale = std::sqrt(var);
  } else {
    p.scale = 1.0;
    p.zero_variance = true;
  }
  return p;
}

inline double normalize_value(double v, const NormParams& p) { return (v - p.mean) / p.scale; }
inline double denormalize_value(double v, const NormParams& p) { return v * p.scale + p.mean; }

inline IstsDataset load_csv_dataset(const std::string& path) {
  CsvTable t = read_csv(path);
  const int ci = t.column("series_id"), ct = t.column("time"), cv = t.column("value");
  if (ci < 0 || ct < 0 || cv < 0)
    throw std::invalid_argument("csv: " + path + " must have columns series_id,time,value");
  std::map<long, IrregularSeries> by_id;
  size_t lineno = 1;
  for (const auto& row : t.rows) {
    ++lineno;
    const std::string ctx = path + " line " + std::to_string(lineno);
    const long id = std::lround(parse_double(row[static_cast<size_t>(ci)], ctx));
    auto& s = by_id[id];
    s.id = static_cast<int>(id);
    s.obs.push_back({parse_double(row[static_cast<size_t>(ct)], ctx),
                     parse_double(row[static_cast<size_t>(cv)], ctx)});
  }
  if (by_id.empty()) throw std::invalid_argument("csv: " + path + " has no data rows");
  IstsDataset ds;
  for (auto& [id, s] : by_id) {
    std::stable_sort(s.obs.begin(), s.obs.end(),
                     [](const Observation& a, const Observation& b) { return a.time < b.time; });
    for (size_t i = 1; i < s.obs.size(); ++i)
      if (s.obs[i].time == s.obs[i - 1].time)
        throw std::invalid_argument("csv: duplicate timestamp in series " + std::to_string(id));
    ds.series.push_back(std::move(s));
  }
  ds.finalize();
  return ds;
}

inline std::vector<Observation> load_targets(const std::string& path) {
  CsvTable t = read_csv(path);
  const int ct = t.column("time"), cv = t.column("target");
  if (ct < 0 || cv < 0) throw std::invalid_argument("csv: " + path + " must have columns time,target");
  std::vector<Observation> out;
  size_t lineno = 1;
  for (const auto& row : t.rows) {
    ++lineno;
    const std::string ctx = path + " line " + std::to_string(lineno);
    out.push_back({parse_double(row[static_cast<size_t>(ct)], ctx),
                   parse_double(row[static_cast<size_t>(cv)], ctx)});
  }
  return out;
}

inline void write_dataset_csv(const std::string& path, const IstsDataset& ds) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : ds.series)
    for (const auto& o : s.obs) rows.push_back({static_cast<double>(s.id), o.time, o.value});
  write_csv(path, "series_id,time,value", rows);
}

}  // namespace teesn
