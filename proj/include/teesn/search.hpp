#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <vector>

#include "teesn/model.hpp"
#include "teesn/rng.hpp"

namespace teesn {

struct Candidate {
  double input_scale = 1.0;
  double sparsity = 0.1;
  double spectral_radius = 0.7;
  double leaky_rate = 0.8;
  double fusion_rate = 1.0;
  int long_skip = 6;
  double lambda = 1e-2;
};

struct SearchSpace {
  // continuous ranges; the open lower ends of (0,1] are represented by a
  // small positive floor
  double input_scale_lo = 1e-3, input_scale_hi = 1.0;
  double sparsity_lo = 1e-3, sparsity_hi = 1.0;
  double spectral_radius_lo = 1e-3, spectral_radius_hi = 1.0;
  double leaky_rate_lo = 0.0, leaky_rate_hi = 1.0;
  double fusion_rate_lo = 0.0, fusion_rate_hi = 1.0;
  std::vector<int> long_skip_choices = {2, 4, 6, 8, 10, 12};
  std::vector<double> lambda_choices = {1e-4, 1e-2, 1.0};

  void validate() const {
    auto range = [](double lo, double hi, const char* what) {
      if (!(lo > 0.0) || !(hi <= 1.0) || !(lo <= hi))
        throw std::invalid_argument(std::string("search: bad range for ") + what);
    };
    range(input_scale_lo, input_scale_hi, "input_scale");
    range(sparsity_lo, sparsity_hi, "sparsity");
    range(spectral_radius_lo, spectral_radius_hi, "spectral_radius");
    if (leaky_rate_lo < 0.0 || leaky_rate_hi > 1.0 || leaky_rate_lo > leaky_rate_hi)
      throw std::invalid_argument("search: bad range for leaky_rate");
    if (fusion_rate_lo < 0.0 || fusion_rate_hi > 1.0 || fusion_rate_lo > fusion_rate_hi)
      throw std::invalid_argument("search: bad range for fusion_rate");
    if (long_skip_choices.empty()) throw std::invalid_argument("search: empty long_skip set");
    for (int k : long_skip_choices)
      if (k < 1) throw std::invalid_argument("search: long_skip choices must be >= 1");
    if (lambda_choices.empty()) throw std::invalid_argument("search: empty lambda set");
    for (double l : lambda_choices)
      if (l < 0.0) throw std::invalid_argument("search: lambda choices must be >= 0");
  }
};

struct GaConfig {
  int population = 20;
  int generations = 30;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;  // per gene
  int elites = 2;
  int tournament = 3;
  uint64_t seed = 1;

  void validate() const {
    if (population < 2) throw std::invalid_argument("search: population must be >= 2");
    if (generations < 1) throw std::invalid_argument("search: generations must be >= 1");
    if (crossover_rate < 0.0 || crossover_rate > 1.0 || mutation_rate < 0.0 ||
        mutation_rate > 1.0)
      throw std::invalid_argument("search: rates must lie in [0,1]");
    if (elites < 0 || elites > population)
      throw std::invalid_argument("search: elites must lie in [0, population]");
    if (tournament < 1) throw std::invalid_argument("search: tournament must be >= 1");
  }
};

struct GenRecord {
  int generation;
  double best;
  double mean;
};

struct SearchResult {
  Candidate best;
  double best_fitness = 0.0;
  std::vector<GenRecord> trace;
};

using Objective = std::function<double(const Candidate&)>;

namespace detail {

constexpr int kGenes = 7;
constexpr double kWorstFitness = 1e300;

struct GeneRange {
  double lo, hi;
};

inline std::array<GeneRange, kGenes> gene_ranges(const SearchSpace& sp) {
  return {{{sp.input_scale_lo, sp.input_scale_hi},
           {sp.sparsity_lo, sp.sparsity_hi},
           {sp.spectral_radius_lo, sp.spectral_radius_hi},
           {sp.leaky_rate_lo, sp.leaky_rate_hi},
           {sp.fusion_rate_lo, sp.fusion_rate_hi},
           {0.0, static_cast<double>(sp.long_skip_choices.size())},
           {0.0, static_cast<double>(sp.lambda_choices.size())}}};
}

// Discrete genes live on [0, n) and decode by floor.
inline Candidate decode(const std::array<double, kGenes>& g, const SearchSpace& sp) {
  Candidate c;
  c.input_scale = g[0];
  c.sparsity = g[1];
  c.spectral_radius = g[2];
  c.leaky_rate = g[3];
  c.fusion_rate = g[4];
  const auto pick = [](double gene, size_t n) {
    const auto i = static_cast<size_t>(std::floor(gene));
    return std::min(i, n - 1);
  };
  c.long_skip = sp.long_skip_choices[pick(g[5], sp.long_skip_choices.size())];
  c.lambda = sp.lambda_choices[pick(g[6], sp.lambda_choices.size())];
  return c;
}

}  // namespace detail

inline SearchResult search(const SearchSpace& sp, const GaConfig& ga, const Objective& objective) {
  sp.validate();
  ga.validate();
  Rng rng(derive_seed(ga.seed, 7));
  const auto ranges = detail::gene_ranges(sp);

  using Genome = std::array<double, detail::kGenes>;
  struct Individual {
    Genome genes;
    double fitness;
  };

  const auto evaluate = [&](const Genome& g) {
    try {
      const double f = objective(detail::decode(g, sp));
      if (!std::isfinite(f)) throw numeric_error("search: non-finite fitness");
      return f;
    } catch (const std::exception& e) {
      std::cerr << "search: candidate failed (" << e.what() << "), assigning worst fitness\n";
      return detail::kWorstFitness;
    }
  };

  std::vector<Individual> pop(static_cast<size_t>(ga.population));
  for (auto& ind : pop) {
    for (int g = 0; g < detail::kGenes; ++g)
      ind.genes[static_cast<size_t>(g)] = rng.uniform(ranges[static_cast<size_t>(g)].lo,
                                                      ranges[static_cast<size_t>(g)].hi);
    ind.fitness = evaluate(ind.genes);
  }

  const auto by_fitness = [](const Individual& a, const Individual& b) {
    return a.fitness < b.fitness;
  };
  const auto tournament_pick = [&]() -> const Individual& {
    size_t best = static_cast<size_t>(rng.uniform_int(0, ga.population - 1));
    for (int t = 1; t < ga.tournament; ++t) {
      const size_t c = static_cast<size_t>(rng.uniform_int(0, ga.population - 1));
      if (pop[c].fitness < pop[best].fitness) best = c;
    }
    return pop[best];
  };
  const auto clamp_gene = [&](double v, int g) {
    const auto& r = ranges[static_cast<size_t>(g)];
    const double hi = (g >= 5) ? std::nextafter(r.hi, r.lo) : r.hi;  // keep floor in range
    return std::clamp(v, r.lo, hi);
  };

  SearchResult out;
  for (int gen = 0; gen < ga.generations; ++gen) {
    std::stable_sort(pop.begin(), pop.end(), by_fitness);
    double mean = 0.0;
    for (const auto& ind : pop) mean += ind.fitness;
    mean /= static_cast<double>(ga.population);
    out.trace.push_back({gen, pop.front().fitness, mean});

    std::vector<Individual> next(pop.begin(), pop.begin() + ga.elites);
    while (static_cast<int>(next.size()) < ga.population) {
      const Individual& pa = tournament_pick();
      const Individual& pb = tournament_pick();
      Genome child = pa.genes;
      if (rng.u01() < ga.crossover_rate)
        for (int g = 0; g < detail::kGenes; ++g)
          if (rng.u01() < 0.5) child[static_cast<size_t>(g)] = pb.genes[static_cast<size_t>(g)];
      for (int g = 0; g < detail::kGenes; ++g)
        if (rng.u01() < ga.mutation_rate) {
          const auto& r = ranges[static_cast<size_t>(g)];
          child[static_cast<size_t>(g)] = clamp_gene(
              child[static_cast<size_t>(g)] + rng.gaussian() * 0.1 * (r.hi - r.lo), g);
        }
      next.push_back({child, evaluate(child)});
    }
    pop = std::move(next);
  }
  std::stable_sort(pop.begin(), pop.end(), by_fitness);
  out.trace.push_back({ga.generations, pop.front().fitness, [&] {
                         double m = 0.0;
                         for (const auto& ind : pop) m += ind.fitness;
                         return m / static_cast<double>(ga.population);
                       }()});
  out.best = detail::decode(pop.front().genes, sp);
  out.best_fitness = pop.front().fitness;
  return out;
}

// Validation-MSE objective for one-step forecasting: the readout is fit on
// the first 80% of time-ordered samples and scored on the final 20%.
inline Objective make_forecast_objective(ModelConfig base, IstsDataset ds) {
  return [base, ds](const Candidate& c) {
    ModelConfig cfg = base;
    cfg.res.input_scale = c.input_scale;
    cfg.res.sparsity = c.sparsity;
    cfg.res.spectral_radius = c.spectral_radius;
    cfg.res.leaky_rate = c.leaky_rate;
    cfg.res.fusion_rate = c.fusion_rate;
    cfg.res.long_skip = c.long_skip;
    cfg.lambda = c.lambda;
    const TrainedModel m = assemble(cfg, ds);
    const SampleSet ss = build_samples(m, ds);
    const long s_count = static_cast<long>(ss.times.size());
    const long n_train = s_count * 4 / 5;
    if (n_train < 1 || n_train >= s_count)
      throw std::invalid_argument("search: too few samples for a validation split");
    DesignMatrices dm{ss.states.leftCols(n_train), ss.te_mat.leftCols(n_train),
                      ss.targets.leftCols(n_train)};
    const Readout ro = fit(dm, cfg.lambda);
    double acc = 0.0;
    for (long i = n_train; i < s_count; ++i) {
      const double e = decode(ro, ss.states.col(i), ss.te_mat.col(i))(0) - ss.targets(0, i);
      acc += e * e;
    }
    return acc / static_cast<double>(s_count - n_train);
  };
}

}  // namespace teesn
