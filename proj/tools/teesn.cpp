#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teesn/bench.hpp"
#include "teesn/csv.hpp"
#include "teesn/dataset.hpp"
#include "teesn/errors.hpp"
#include "teesn/metrics.hpp"
#include "teesn/model.hpp"
#include "teesn/search.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative output directories resolve under TEESN_OUT_ROOT when it is set.
fs::path out_dir(const std::string& out) {
  fs::path p(out);
  if (p.is_relative())
    if (const char* root = std::getenv("TEESN_OUT_ROOT")) p = fs::path(root) / p;
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw teesn::artifact_error("cli: cannot write " + path.string());
  f << text;
}

// Resolved run configuration: one key=value line per option value (defaults
// included), written next to the outputs so a run can be reproduced from the
// directory alone. Vector options repeat the key.
std::string serialize_config(CLI::App* cmd) {
  std::string out;
  for (const CLI::Option* opt : cmd->get_options({})) {
    const std::string name =
        opt->get_lnames().empty() ? opt->get_single_name() : opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::vector<std::string> vals;
    if (opt->count() > 0)
      vals = opt->results();
    else if (!opt->get_default_str().empty())
      vals = {opt->get_default_str()};
    for (const auto& v : vals) out += name + "=" + v + "\n";
  }
  return out;
}

void write_config(CLI::App* cmd, const fs::path& dir) {
  write_text(dir / "config.ini", serialize_config(cmd));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Config files hold key=value lines matching the subcommand's long options.
// Values are injected before the explicit command-line flags, which therefore
// take precedence; keys the user already passed are skipped entirely.
std::vector<std::string> config_tokens(CLI::App* cmd, const std::string& path,
                                       const std::set<std::string>& user_keys) {
  std::ifstream f(path);
  if (!f) throw teesn::artifact_error("cli: cannot open config " + path);
  std::vector<std::string> tokens;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("cli: " + path + " line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key == "config" || user_keys.count(key)) continue;
    if (cmd->get_option_no_throw("--" + key)) {
      tokens.push_back("--" + key);
      tokens.push_back(value);
    } else if (!cmd->get_option_no_throw(key)) {  // positional keys are informational
      throw std::invalid_argument("cli: " + path + " line " + std::to_string(lineno) +
                                  ": unknown option '" + key + "'");
    }
  }
  return tokens;
}

struct ModelFlags {
  int size = 100;
  double input_scale = 1.0;
  double sparsity = 0.1;
  double spectral_radius = 0.7;
  double leaky_rate = 0.8;
  double fusion_rate = 1.0;
  int long_skip = 6;
  int te_dim = 64;
  int te_freqs = 4;
  double lambda = 1e-2;
  int folds = 5;
  uint64_t seed = 1;
  std::string variant = "full";
  std::string ablate;

  void add_to(CLI::App* cmd, bool with_variant = true) {
    cmd->add_option("--size", size, "reservoir size N")->capture_default_str();
    cmd->add_option("--input-scale", input_scale, "input weight scale w_in")
        ->capture_default_str();
    cmd->add_option("--sparsity", sparsity, "recurrent nonzero fraction alpha")
        ->capture_default_str();
    cmd->add_option("--spectral-radius", spectral_radius, "recurrent spectral radius rho")
        ->capture_default_str();
    cmd->add_option("--leaky-rate", leaky_rate, "long-short mixing leaky rate")
        ->capture_default_str();
    cmd->add_option("--fusion-rate", fusion_rate, "neighbor fusion rate")->capture_default_str();
    cmd->add_option("--long-skip", long_skip, "long-term skip length k")->capture_default_str();
    cmd->add_option("--te-dim", te_dim, "time encoding dimension")->capture_default_str();
    cmd->add_option("--te-freqs", te_freqs, "number of magnitude bases")->capture_default_str();
    cmd->add_option("--lambda", lambda, "ridge regularization")->capture_default_str();
    cmd->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    cmd->add_option("--seed", seed, "global seed")->capture_default_str();
    if (with_variant) {
      cmd->add_option("--variant", variant, "full|no-te|no-ls|no-sf|esn|single-freq")
          ->capture_default_str();
      cmd->add_option("--ablate", ablate, "ablation alias: no-te|no-ls|no-sf")
          ->capture_default_str();
    }
  }

  teesn::ModelConfig config() const {
    teesn::ModelConfig cfg;
    cfg.res.size = size;
    cfg.res.input_scale = input_scale;
    cfg.res.sparsity = sparsity;
    cfg.res.spectral_radius = spectral_radius;
    cfg.res.leaky_rate = leaky_rate;
    cfg.res.fusion_rate = fusion_rate;
    cfg.res.long_skip = long_skip;
    cfg.te_dim = te_dim;
    cfg.te_freqs = te_freqs;
    cfg.lambda = lambda;
    cfg.folds = folds;
    cfg.seed = seed;
    cfg.variant = teesn::parse_variant(ablate.empty() ? variant : ablate);
    return cfg;
  }
};

std::string config_summary(const teesn::ModelConfig& cfg) {
  const auto& r = cfg.res;
  std::string s;
  for (double v : {static_cast<double>(r.size), r.input_scale, r.sparsity, r.spectral_radius,
                   r.leaky_rate, r.fusion_rate, static_cast<double>(r.long_skip),
                   static_cast<double>(cfg.te_dim), static_cast<double>(cfg.te_freqs), cfg.lambda,
                   static_cast<double>(cfg.folds)})
    s += teesn::fmt_double(v) + ",";
  s += teesn::variant_name(cfg.variant);
  return s;
}

void write_predictions(const fs::path& path, const std::vector<teesn::Prediction>& preds) {
  std::vector<std::vector<double>> rows;
  rows.reserve(preds.size());
  for (const auto& p : preds) rows.push_back({p.time, p.predicted, p.actual});
  teesn::write_csv(path.string(), "time,predicted,actual", rows);
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw teesn::artifact_error("cli: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw teesn::artifact_error("cli: bad JSON in " + path + ": " + e.what());
  }
  return j;
}

int cmd_generate(const std::string& kind, long length, long stride, double time_scale,
                 int gap_lo, int gap_hi, uint64_t seed, bool seed_given, CLI::App* cmd,
                 const std::string& out) {
  if (kind != "mg") throw std::invalid_argument("generate: unknown generator '" + kind + "'");
  if (!seed_given) {
    seed = std::random_device{}();
    // reflect the drawn seed in the recorded config
    cmd->get_option("--seed")->default_str(std::to_string(seed));
  }
  const fs::path dir = out_dir(out);

  teesn::MgParams mg;
  mg.length = length;
  teesn::IrregularSeries full = teesn::generate_mg(mg);
  teesn::IrregularSeries coarse = teesn::scale_time(teesn::decimate(full, stride), time_scale);
  teesn::IntervalDist gaps{teesn::IntervalDist::Kind::uniform, gap_lo, gap_hi};
  teesn::IrregularSeries sampled =
      teesn::irregular_subsample(coarse, gaps, teesn::derive_seed(seed, 1));

  teesn::IstsDataset ds;
  ds.series.push_back(sampled);
  ds.finalize();
  teesn::write_dataset_csv((dir / "mg.csv").string(), ds);

  json meta{{"generator", "mg"},
            {"seed", seed},
            {"length", length},
            {"stride", stride},
            {"time_scale", time_scale},
            {"gap_lo", gap_lo},
            {"gap_hi", gap_hi},
            {"observations", sampled.obs.size()},
            {"max_time", ds.max_time},
            {"sampling_rate", sampled.sampling_rate}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  write_config(cmd, dir);
  std::cout << "wrote " << (dir / "mg.csv").string() << " (" << sampled.obs.size()
            << " observations)\n";
  return 0;
}

int cmd_train(const ModelFlags& mf, CLI::App* cmd, const std::string& data,
              const std::string& out) {
  const fs::path dir = out_dir(out);
  const teesn::IstsDataset ds = teesn::load_csv_dataset(data);
  const teesn::ModelConfig cfg = mf.config();
  const teesn::TrainedModel model = teesn::train(cfg, ds);

  write_text(dir / "model.json", teesn::model_to_json(model).dump(2) + "\n");

  const auto preds = teesn::apply_model(model, ds);
  std::vector<double> yhat, y;
  for (const auto& p : preds) {
    const auto& nm = model.norms[p.series];
    yhat.push_back(teesn::normalize_value(p.predicted, nm));
    y.push_back(teesn::normalize_value(p.actual, nm));
  }
  teesn::EvalReport rep;
  rep.metric = "train_mse";
  rep.value = teesn::mse(yhat, y);
  rep.seeds = {cfg.seed};
  rep.params_hash = teesn::fnv1a_hex(config_summary(model.cfg));
  rep.extra = {{"scale", "normalized"},
               {"samples", preds.size()},
               {"variant", teesn::variant_name(model.cfg.variant)}};
  write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
  write_config(cmd, dir);
  std::cout << "train_mse " << teesn::fmt_double(rep.value) << "\n";
  return 0;
}

int cmd_predict(CLI::App* cmd, const std::string& model_path, const std::string& data,
                const std::string& out, double at, bool at_given) {
  const fs::path dir = out_dir(out);
  const teesn::TrainedModel model = teesn::model_from_json(load_json(model_path));
  const teesn::IstsDataset ds = teesn::load_csv_dataset(data);
  if (at_given) {
    const double score = teesn::early_predict(model, ds, at);
    json j{{"time", at}, {"score", score}};
    write_text(dir / "early.json", j.dump(2) + "\n");
    std::cout << "score " << teesn::fmt_double(score) << "\n";
  } else {
    write_predictions(dir / "predictions.csv", teesn::apply_model(model, ds));
    std::cout << "wrote " << (dir / "predictions.csv").string() << "\n";
  }
  write_config(cmd, dir);
  return 0;
}

int cmd_evaluate(const ModelFlags& mf, CLI::App* cmd, const std::string& model_path,
                 const std::string& data, const std::string& out) {
  const fs::path dir = out_dir(out);
  const teesn::IstsDataset ds = teesn::load_csv_dataset(data);
  teesn::EvalReport rep;
  std::vector<teesn::Prediction> preds;

  if (!model_path.empty()) {
    // apply a trained model as-is
    const teesn::TrainedModel model = teesn::model_from_json(load_json(model_path));
    preds = teesn::apply_model(model, ds);
    std::vector<double> yhat, y;
    for (const auto& p : preds) {
      const auto& nm = model.norms[p.series];
      yhat.push_back(teesn::normalize_value(p.predicted, nm));
      y.push_back(teesn::normalize_value(p.actual, nm));
    }
    rep.metric = "mse";
    rep.value = teesn::mse(yhat, y);
    rep.seeds = {model.cfg.seed};
    rep.params_hash = teesn::fnv1a_hex(config_summary(model.cfg));
    rep.extra = {{"scale", "normalized"},
                 {"samples", preds.size()},
                 {"mode", "apply"},
                 {"variant", teesn::variant_name(model.cfg.variant)}};
  } else {
    // refit the readout per contiguous fold
    const teesn::ModelConfig cfg = mf.config();
    const teesn::CvResult cv = teesn::evaluate_cv(cfg, ds);
    preds = cv.predictions;
    rep.metric = "mse";
    rep.value = cv.mean;
    rep.dispersion = cv.stdev;
    rep.seeds = {cfg.seed};
    rep.params_hash = teesn::fnv1a_hex(config_summary(teesn::resolve_variant(cfg)));
    rep.extra = {{"scale", "normalized"},
                 {"samples", preds.size()},
                 {"mode", "cv"},
                 {"folds", cv.fold_mse.size()},
                 {"fold_mse", cv.fold_mse},
                 {"variant", teesn::variant_name(teesn::resolve_variant(cfg).variant)}};
  }
  write_predictions(dir / "predictions.csv", preds);
  write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
  write_config(cmd, dir);
  std::cout << "mse " << teesn::fmt_double(rep.value) << " +/- "
            << teesn::fmt_double(rep.dispersion) << "\n";
  return 0;
}

int cmd_mc(const ModelFlags& mf, CLI::App* cmd, std::vector<std::string> variants, int k_max,
           const std::string& out) {
  if (variants.empty()) variants = {"te-esn", "no-te", "esn"};
  const fs::path dir = out_dir(out);
  std::string csv = "variant,delay,r2\n";
  json totals = json::object();
  for (const auto& vs : variants) {
    const teesn::Variant v = teesn::parse_variant(vs);
    if (v != teesn::Variant::full && v != teesn::Variant::no_te && v != teesn::Variant::plain)
      throw std::invalid_argument("mc: variant must be te-esn, no-te, or esn");
    teesn::ModelConfig cfg = mf.config();
    cfg.variant = v;
    cfg = teesn::resolve_variant(cfg);
    const teesn::McResult r = teesn::memory_capacity(cfg.res, teesn::variant_uses_te(v), k_max,
                                                     mf.seed);
    totals[teesn::variant_name(v)] = r.mc;
    for (size_t k = 0; k < r.per_delay.size(); ++k)
      csv += std::string(teesn::variant_name(v)) + "," + std::to_string(k) + "," +
             teesn::fmt_double(r.per_delay[k]) + "\n";
    std::cout << teesn::variant_name(v) << " mc " << teesn::fmt_double(r.mc) << "\n";
  }
  write_text(dir / "mc.csv", csv);
  json j{{"metric", "memory_capacity"}, {"k_max", k_max}, {"seed", mf.seed},
         {"size", mf.size}, {"values", totals}};
  write_text(dir / "mc.json", j.dump(2) + "\n");
  write_config(cmd, dir);
  return 0;
}

int cmd_search(const ModelFlags& mf, CLI::App* cmd, const std::string& task,
               const std::string& data, int population, int generations, int elites,
               int tournament, double crossover, double mutation, const std::string& out) {
  const fs::path dir = out_dir(out);
  teesn::IstsDataset ds;
  if (!data.empty()) {
    ds = teesn::load_csv_dataset(data);
  } else if (task == "mg") {
    teesn::MgParams mg;
    teesn::IrregularSeries full = teesn::generate_mg(mg);
    teesn::IrregularSeries coarse = teesn::scale_time(teesn::decimate(full, 10), 0.1);
    ds.series.push_back(teesn::irregular_subsample(
        coarse, {teesn::IntervalDist::Kind::uniform, 1, 6}, teesn::derive_seed(mf.seed, 1)));
    ds.finalize();
  } else {
    throw std::invalid_argument("search: need --data or --task mg");
  }

  teesn::GaConfig ga;
  ga.population = population;
  ga.generations = generations;
  ga.elites = elites;
  ga.tournament = tournament;
  ga.crossover_rate = crossover;
  ga.mutation_rate = mutation;
  ga.seed = mf.seed;

  const teesn::SearchResult res =
      teesn::search(teesn::SearchSpace{}, ga, teesn::make_forecast_objective(mf.config(), ds));

  std::vector<std::vector<double>> rows;
  for (const auto& g : res.trace)
    rows.push_back({static_cast<double>(g.generation), g.best, g.mean});
  teesn::write_csv((dir / "trace.csv").string(), "generation,best,mean", rows);

  const auto& b = res.best;
  std::string best_cfg;
  best_cfg += "size=" + std::to_string(mf.size) + "\n";
  best_cfg += "input-scale=" + teesn::fmt_double(b.input_scale) + "\n";
  best_cfg += "sparsity=" + teesn::fmt_double(b.sparsity) + "\n";
  best_cfg += "spectral-radius=" + teesn::fmt_double(b.spectral_radius) + "\n";
  best_cfg += "leaky-rate=" + teesn::fmt_double(b.leaky_rate) + "\n";
  best_cfg += "fusion-rate=" + teesn::fmt_double(b.fusion_rate) + "\n";
  best_cfg += "long-skip=" + std::to_string(b.long_skip) + "\n";
  best_cfg += "lambda=" + teesn::fmt_double(b.lambda) + "\n";
  best_cfg += "te-dim=" + std::to_string(mf.te_dim) + "\n";
  best_cfg += "te-freqs=" + std::to_string(mf.te_freqs) + "\n";
  best_cfg += "seed=" + std::to_string(mf.seed) + "\n";
  write_text(dir / "best_config.ini", best_cfg);

  teesn::EvalReport rep;
  rep.metric = "search_best_mse";
  rep.value = res.best_fitness;
  rep.seeds = {mf.seed};
  rep.params_hash = teesn::fnv1a_hex(best_cfg);
  rep.extra = {{"generations", generations}, {"population", population}};
  write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
  write_config(cmd, dir);
  std::cout << "best_mse " << teesn::fmt_double(res.best_fitness) << " long_skip "
            << b.long_skip << " lambda " << teesn::fmt_double(b.lambda) << "\n";
  return 0;
}

int cmd_curve(CLI::App* cmd, const std::vector<int>& ks, int dim, double max_time, double rate,
              double span, int points, const std::string& out) {
  const fs::path dir = out_dir(out);
  for (int k : ks) {
    teesn::TimeEncodingConfig cfg;
    cfg.dim = dim;
    cfg.num_freqs = k;
    cfg.max_time = max_time;
    const int shift = (k - 1) / 2;
    for (int i = 0; i < k; ++i)
      cfg.bases.push_back(max_time * std::pow(2.0, static_cast<double>(i - shift)));
    cfg.validate();
    std::vector<double> distances;
    for (int i = 0; i < points; ++i)
      distances.push_back(span * static_cast<double>(i) / static_cast<double>(points - 1));
    const auto curve = teesn::dot_product_curve(cfg, rate, distances);
    std::vector<std::vector<double>> rows;
    for (const auto& pd : curve) rows.push_back({pd.first, pd.second});
    const fs::path path = dir / ("curve_k" + std::to_string(k) + ".csv");
    teesn::write_csv(path.string(), "p,dot", rows);
    std::cout << "wrote " << path.string() << "\n";
  }
  write_config(cmd, dir);
  return 0;
}

int cmd_bench(int size, long steps, int reps, uint64_t seed) {
  const teesn::BenchResult r = teesn::bench_run(size, steps, reps, seed);
  std::cout << "size,steps,median_seconds\n"
            << r.size << "," << r.steps << "," << teesn::fmt_double(r.median_seconds) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-encoding echo state networks for irregular time series"};
  app.require_subcommand(1);

  // generate
  auto* g = app.add_subcommand("generate", "write a benchmark dataset");
  std::string g_kind = "mg", g_out = "out";
  long g_length = 10000, g_stride = 10;
  double g_scale = 0.1;
  int g_gap_lo = 1, g_gap_hi = 6;
  uint64_t g_seed = 1;
  g->add_option("kind", g_kind, "generator (mg)")->capture_default_str();
  g->add_option("--length", g_length, "raw euler steps")->capture_default_str();
  g->add_option("--stride", g_stride, "decimation stride")->capture_default_str();
  g->add_option("--time-scale", g_scale, "time relabel factor after decimation")
      ->capture_default_str();
  g->add_option("--gap-lo", g_gap_lo, "min sampling gap")->capture_default_str();
  g->add_option("--gap-hi", g_gap_hi, "max sampling gap")->capture_default_str();
  auto* g_seed_opt = g->add_option("--seed", g_seed, "sampling seed")->capture_default_str();
  g->add_option("--out", g_out, "output directory")->capture_default_str();
  std::string g_cfg;
  g->add_option("--config", g_cfg, "config file");

  // train
  auto* tr = app.add_subcommand("train", "fit a model on a dataset");
  ModelFlags tr_mf;
  std::string tr_data, tr_out = "out";
  tr->add_option("--data", tr_data, "dataset CSV")->required();
  tr->add_option("--out", tr_out, "output directory")->capture_default_str();
  tr_mf.add_to(tr);
  std::string tr_cfg;
  tr->add_option("--config", tr_cfg, "config file");

  // predict
  auto* pr = app.add_subcommand("predict", "decode predictions with a trained model");
  std::string pr_model, pr_data, pr_out = "out";
  double pr_at = 0.0;
  pr->add_option("--model", pr_model, "model artifact")->required();
  pr->add_option("--data", pr_data, "dataset CSV")->required();
  pr->add_option("--out", pr_out, "output directory")->capture_default_str();
  auto* pr_at_opt = pr->add_option("--at", pr_at, "early-prediction time");
  std::string pr_cfg;
  pr->add_option("--config", pr_cfg, "config file");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a model or run block cross-validation");
  ModelFlags ev_mf;
  std::string ev_model, ev_data, ev_out = "out";
  ev->add_option("--model", ev_model, "model artifact (omit for cross-validation)");
  ev->add_option("--data", ev_data, "dataset CSV")->required();
  ev->add_option("--out", ev_out, "output directory")->capture_default_str();
  ev_mf.add_to(ev);
  std::string ev_cfg;
  ev->add_option("--config", ev_cfg, "config file");

  // mc
  auto* mc = app.add_subcommand("mc", "memory capacity benchmark");
  ModelFlags mc_mf;
  std::vector<std::string> mc_variants;
  int mc_kmax = 100;
  std::string mc_out = "out";
  mc->add_option("--variant", mc_variants, "te-esn|no-te|esn (repeatable)");
  mc->add_option("--k-max", mc_kmax, "largest delay")->capture_default_str();
  mc->add_option("--out", mc_out, "output directory")->capture_default_str();
  mc_mf.add_to(mc, false);
  std::string mc_cfg;
  mc->add_option("--config", mc_cfg, "config file");

  // search
  auto* se = app.add_subcommand("search", "genetic hyperparameter search");
  ModelFlags se_mf;
  std::string se_task, se_data, se_out = "out";
  int se_pop = 20, se_gen = 30, se_elites = 2, se_tournament = 3;
  double se_cross = 0.9, se_mut = 0.2;
  se->add_option("--task", se_task, "built-in task (mg)");
  se->add_option("--data", se_data, "dataset CSV");
  se->add_option("--out", se_out, "output directory")->capture_default_str();
  se->add_option("--population", se_pop, "population size")->capture_default_str();
  se->add_option("--generations", se_gen, "generations")->capture_default_str();
  se->add_option("--elites", se_elites, "elitism count")->capture_default_str();
  se->add_option("--tournament", se_tournament, "tournament size")->capture_default_str();
  se->add_option("--crossover", se_cross, "crossover rate")->capture_default_str();
  se->add_option("--mutation", se_mut, "per-gene mutation rate")->capture_default_str();
  se_mf.add_to(se);
  std::string se_cfg;
  se->add_option("--config", se_cfg, "config file");

  // curve
  auto* cu = app.add_subcommand("curve", "dot-product-vs-distance curve data");
  std::vector<int> cu_ks;
  int cu_dim = 64, cu_points = 251;
  double cu_mt = 1000.0, cu_rate = 1.0, cu_span = 250.0;
  std::string cu_out = "out";
  cu->add_option("--k", cu_ks, "number of bases (repeatable)");
  cu->add_option("--dim", cu_dim, "encoding dimension")->capture_default_str();
  cu->add_option("--max-time", cu_mt, "base wavelength")->capture_default_str();
  cu->add_option("--rate", cu_rate, "sampling rate")->capture_default_str();
  cu->add_option("--span", cu_span, "largest distance")->capture_default_str();
  cu->add_option("--points", cu_points, "curve points")->capture_default_str();
  cu->add_option("--out", cu_out, "output directory")->capture_default_str();
  std::string cu_cfg;
  cu->add_option("--config", cu_cfg, "config file");

  // bench
  auto* be = app.add_subcommand("bench", "time the state-update loop");
  int be_size = 500, be_reps = 3;
  long be_steps = 2000;
  uint64_t be_seed = 1;
  be->add_option("--size", be_size, "reservoir size")->capture_default_str();
  be->add_option("--steps", be_steps, "update steps")->capture_default_str();
  be->add_option("--reps", be_reps, "repetitions (median reported)")->capture_default_str();
  be->add_option("--seed", be_seed, "seed")->capture_default_str();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty()) {
      if (CLI::App* cmd = app.get_subcommand_no_throw(args[0])) {
        std::string cfg_path;
        std::set<std::string> user_keys;
        for (size_t i = 1; i < args.size(); ++i) {
          const std::string& t = args[i];
          if (t.rfind("--", 0) != 0) continue;
          const auto eq = t.find('=');
          const std::string key =
              eq == std::string::npos ? t.substr(2) : t.substr(2, eq - 2);
          user_keys.insert(key);
          if (key == "config")
            cfg_path = eq == std::string::npos ? (i + 1 < args.size() ? args[i + 1] : "")
                                               : t.substr(eq + 1);
        }
        if (!cfg_path.empty()) {
          const auto injected = config_tokens(cmd, cfg_path, user_keys);
          args.insert(args.begin() + 1, injected.begin(), injected.end());
        }
      }
    }
    std::vector<const char*> cargv{argv[0]};
    for (const auto& a : args) cargv.push_back(a.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
    if (g->parsed())
      return cmd_generate(g_kind, g_length, g_stride, g_scale, g_gap_lo, g_gap_hi, g_seed,
                          g_seed_opt->count() > 0, g, g_out);
    if (tr->parsed()) return cmd_train(tr_mf, tr, tr_data, tr_out);
    if (pr->parsed())
      return cmd_predict(pr, pr_model, pr_data, pr_out, pr_at, pr_at_opt->count() > 0);
    if (ev->parsed()) return cmd_evaluate(ev_mf, ev, ev_model, ev_data, ev_out);
    if (mc->parsed()) return cmd_mc(mc_mf, mc, mc_variants, mc_kmax, mc_out);
    if (se->parsed())
      return cmd_search(se_mf, se, se_task, se_data, se_pop, se_gen, se_elites, se_tournament,
                        se_cross, se_mut, se_out);
    if (cu->parsed()) {
      if (cu_ks.empty()) cu_ks = {1, 4};
      return cmd_curve(cu, cu_ks, cu_dim, cu_mt, cu_rate, cu_span, cu_points, cu_out);
    }
    if (be->parsed()) return cmd_bench(be_size, be_steps, be_reps, be_seed);
    throw std::invalid_argument("cli: no subcommand");
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const teesn::artifact_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const teesn::numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
