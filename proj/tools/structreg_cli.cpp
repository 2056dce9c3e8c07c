// structreg: train, decode, evaluate and probe linear-chain taggers with
// structure regularization.
//
// Exit codes: 0 ok, 2 usage/config/I-O error, 3 data error, 4 numerical error.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "structreg/corpus.hpp"
#include "structreg/errors.hpp"
#include "structreg/evaluate.hpp"
#include "structreg/features.hpp"
#include "structreg/models.hpp"
#include "structreg/parallel.hpp"
#include "structreg/sweep.hpp"
#include "structreg/theory.hpp"
#include "structreg/train.hpp"

using namespace structreg;

namespace {

constexpr const char* kConfigHelp =
    "Flat key=value file; keys are long option names without dashes";

// ---------------------------------------------------------------- helpers

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    try {
      if (auto dots = tok.find(".."); dots != std::string::npos) {
        const auto lo = std::stoull(tok.substr(0, dots)), hi = std::stoull(tok.substr(dots + 2));
        if (hi < lo) throw ConfigError("seed range '" + tok + "' is empty");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        out.push_back(std::stoull(tok));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    if (tok == "inf") {
      out.push_back(INFINITY);
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError(std::string("bad ") + what + " value '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout for "" / "-".
template <class Fn>
void write_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  fn(out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

struct DataOptions {
  std::string format = "conll";
  int tag_column = -1;
  int word_column = 0;
  std::string templates;

  void add(CLI::App* app) {
    app->add_option("--format", format, "Input format")->check(CLI::IsMember({"conll"}));
    app->add_option("--tag-column", tag_column, "Tag column (negative counts from the end)");
    app->add_option("--word-column", word_column, "Word column");
    app->add_option("--templates", templates, "Feature template file (default: built-in set)");
  }
  ConllSchema schema(bool has_tags = true) const { return {tag_column, word_column, has_tags}; }
  TemplateSet template_set() const {
    return templates.empty() ? default_templates() : parse_templates(read_text(templates));
  }
};

struct TrainOptions {
  std::string model = "crf";
  double mini_size = 0.0;
  double lambda = 1.0;
  double eta0 = TrainConfig{}.eta0;
  double decay = TrainConfig{}.decay;
  std::optional<std::size_t> max_epochs;
  double threshold = 1e-4;
  std::uint64_t seed = 0;
  double perceptron_rate = 1.0;
  bool no_average = false;
  bool no_phase = false;
  bool no_refresh = false;

  void add(CLI::App* app, bool with_model_and_size) {
    if (with_model_and_size) {
      app->add_option("--model", model, "crf or perceptron")
          ->check(CLI::IsMember({"crf", "perceptron"}));
      app->add_option("--mini-size", mini_size, "Expected mini-sample length n' (0 = off)");
      app->add_option("--seed", seed, "Random seed");
    }
    app->add_option("--lambda", lambda, "L2 strength");
    app->add_option("--eta0", eta0, "Initial learning rate");
    app->add_option("--decay", decay, "Per-epoch learning rate decay");
    app->add_option("--max-epochs", max_epochs, "Epoch budget (CRF: 100, perceptron: 10)");
    app->add_option("--threshold", threshold, "Relative objective change for convergence");
    app->add_option("--perceptron-rate", perceptron_rate, "Perceptron step size");
    app->add_flag("--no-average", no_average, "Perceptron: keep the final weights");
    app->add_flag("--no-phase", no_phase, "Do not randomize the first segment length");
    app->add_flag("--no-refresh", no_refresh, "Reuse the epoch-0 decomposition every epoch");
  }

  TrainConfig config(Objective objective, const TemplateSet& templates) const {
    TrainConfig c = objective == Objective::Crf ? TrainConfig{} : perceptron_defaults();
    if (objective == Objective::Crf) c.lambda = lambda;
    c.mini_size = mini_size;
    c.eta0 = eta0;
    c.decay = decay;
    if (max_epochs) c.max_epochs = *max_epochs;
    c.convergence_threshold = threshold;
    c.seed = seed;
    c.perceptron_rate = perceptron_rate;
    c.average = !no_average;
    c.randomize_phase = !no_phase;
    c.refresh_each_epoch = !no_refresh;
    c.templates = templates;
    c.validate();
    return c;
  }
};

Dataset load_labeled(const std::string& path, const DataOptions& d, AlphabetPtr labels = nullptr) {
  return read_conll_file(path, d.schema(), std::move(labels));
}

// ---------------------------------------------------------------- commands

void cmd_train(const std::string& train_path, const std::string& dev_path, const std::string& out,
               const std::string& report, bool eval_each_epoch, const DataOptions& d,
               const TrainOptions& t) {
  const auto tpl = d.template_set();
  const auto cfg_check = t.config(parse_objective(t.model), tpl);
  const auto raw = load_labeled(train_path, d);
  const auto train_set = extract(raw, tpl, false);
  std::optional<Dataset> dev;
  if (!dev_path.empty())
    dev = extract_frozen(load_labeled(dev_path, d, train_set.labels), tpl, train_set.features);

  auto cfg = cfg_check;
  cfg.eval_each_epoch = eval_each_epoch;
  const auto run = train(train_set, dev ? &*dev : nullptr, cfg);
  save_model(run.model, out);
  if (!report.empty()) {
    write_output(report + ".jsonl", [&](std::ostream& o) { write_report_jsonl(o, run.report); });
    write_output(report + ".tsv", [&](std::ostream& o) { write_report_tsv(o, run.report); });
    write_output(report + ".timing.tsv",
                 [&](std::ostream& o) { write_report_timing_tsv(o, run.report); });
  }
  std::cerr << "trained " << objective_name(cfg.objective) << " on " << train_set.size()
            << " samples, " << run.report.epochs.size() << " epochs";
  if (run.report.converged_at) std::cerr << " (converged)";
  std::cerr << ", objective " << run.report.final_objective() << "\n";
}

void cmd_predict(const std::string& model_path, const std::string& input, const std::string& out,
                 bool no_tags, const DataOptions& d) {
  const auto model = load_model(model_path);
  const auto raw = read_conll_file(input, d.schema(!no_tags), model.labels);
  const auto ds = extract_frozen(raw, model.templates, model.features);
  const auto pred = predict(model, ds);
  write_output(out, [&](std::ostream& o) { write_conll(o, raw, &pred); });
}

// Gold in the second-to-last column, prediction in the last.
EvalResult score_prediction_file(const std::string& path) {
  ConllSchema gold_schema{-2, 0, true}, pred_schema{-1, 0, true};
  const auto gold = read_conll_file(path, gold_schema);
  const auto pred = read_conll_file(path, pred_schema);
  Alphabet labels(gold.labels->entries());
  std::vector<std::vector<LabelId>> g, p;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    g.push_back(gold.samples[i].gold);
    std::vector<LabelId> row;
    for (auto id : pred.samples[i].gold) row.push_back(*labels.intern(pred.labels->at(id)));
    p.push_back(std::move(row));
  }
  return score_predictions(labels, g, p);
}

void cmd_evaluate(const std::string& model_path, const std::string& input,
                  const std::string& predictions, const std::string& json_path,
                  const DataOptions& d) {
  EvalResult r;
  if (!predictions.empty()) {
    r = score_prediction_file(predictions);
  } else {
    if (model_path.empty() || input.empty())
      throw ConfigError("evaluate needs --model and --input, or --predictions");
    const auto model = load_model(model_path);
    const auto ds = extract_frozen(load_labeled(input, d, model.labels), model.templates,
                                   model.features);
    r = evaluate(model, ds);
  }
  print_eval_table(std::cout, r);
  const auto json = eval_to_json(r, false);
  if (json_path.empty()) std::cout << json << '\n';
  else write_output(json_path, [&](std::ostream& o) { o << json << '\n'; });
}

void cmd_sweep(const std::string& train_path, const std::string& dev_path,
               const std::string& test_path, const std::string& grid, const std::string& seeds,
               const std::string& models, std::size_t workers, const std::string& out,
               const DataOptions& d, const TrainOptions& t) {
  const auto tpl = d.template_set();
  SweepConfig sc;
  sc.grid = grid.empty() ? SweepConfig::default_grid() : parse_numbers(grid, "grid");
  for (double g : sc.grid)
    if (g < 0.0) throw ConfigError("grid values must be >= 0");
  sc.seeds = parse_seeds(seeds);
  sc.objectives.clear();
  std::stringstream ms(models);
  for (std::string m; std::getline(ms, m, ',');) sc.objectives.push_back(parse_objective(m));
  sc.crf = t.config(Objective::Crf, tpl);
  sc.perceptron = t.config(Objective::Perceptron, tpl);
  sc.workers = workers;

  const auto train_set = extract(load_labeled(train_path, d), tpl, false);
  std::optional<Dataset> dev;
  if (!dev_path.empty())
    dev = extract_frozen(load_labeled(dev_path, d, train_set.labels), tpl, train_set.features);
  const auto test = extract_frozen(load_labeled(test_path, d, train_set.labels), tpl,
                                   train_set.features);

  const auto r = run_sweep(train_set, dev ? &*dev : nullptr, test, sc);
  write_output(out, [&](std::ostream& o) { write_sweep_tsv(o, r); });
  if (!out.empty() && out != "-")
    write_output(out + ".timing.tsv", [&](std::ostream& o) { write_sweep_timing_tsv(o, r); });
  std::size_t failed = 0;
  for (const auto& row : r.rows) failed += row.status != "ok";
  if (failed) std::cerr << failed << " sweep rows failed; see the status column\n";
}

void cmd_stability(const std::string& train_path, const std::string& probe_path,
                   std::size_t removals, const std::string& alphas, const std::string& minis,
                   const std::string& seeds, std::size_t probe_points, std::size_t workers,
                   const std::string& out, const DataOptions& d, const TrainOptions& t) {
  if (!alphas.empty() && !minis.empty()) throw ConfigError("give --alphas or --mini-sizes, not both");
  const bool by_alpha = minis.empty();
  const auto values = parse_numbers(by_alpha ? (alphas.empty() ? "1,4" : alphas) : minis,
                                    by_alpha ? "alpha" : "mini size");
  const auto seed_list = parse_seeds(seeds);
  const auto tpl = d.template_set();
  const auto train_set = extract(load_labeled(train_path, d), tpl, false);
  const auto probe = extract_frozen(load_labeled(probe_path, d, train_set.labels), tpl,
                                    train_set.features);

  struct Row {
    double value;
    std::uint64_t seed;
    StabilityProbe p;
  };
  std::vector<Row> rows;
  for (double v : values)
    for (auto s : seed_list) rows.push_back({v, s, {}});
  // Fan out over settings; each probe runs its retrainings sequentially.
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    auto opts = t;
    opts.seed = rows[i].seed;
    // alpha 1 is the baseline; any other alpha value is the mini size n'.
    opts.mini_size = by_alpha ? (rows[i].value == 1.0 ? 0.0 : rows[i].value) : rows[i].value;
    auto cfg = opts.config(Objective::Crf, tpl);
    ProbeOptions po;
    po.num_removals = removals;
    po.probe_points = probe_points;
    po.seed = rows[i].seed;
    po.workers = 1;
    rows[i].p = probe_stability(train_set, probe, cfg, po);
  });
  write_output(out, [&](std::ostream& o) {
    o << (by_alpha ? "alpha" : "mini_size") << "\tseed\tdelta_hat_max\tdelta_hat_mean\n";
    o << std::setprecision(17);
    for (const auto& r : rows)
      o << r.value << '\t' << r.seed << '\t' << r.p.median_delta_max << '\t' << r.p.delta_mean
        << '\n';
  });
}

void cmd_bounds(const TheoryParams& p, double empirical_risk, const SgdTheoryParams& sgd,
                const std::string& out) {
  const auto b = stability_bounds(p);
  const auto g = generalization_bound(p, empirical_risk);
  std::optional<SgdIterations> it;
  std::string sgd_note;
  try {
    it = sgd_iterations(sgd, p.n, p.alpha);
  } catch (const ConfigError& e) {
    sgd_note = e.what();
  }
  write_output(out, [&](std::ostream& o) {
    o << std::setprecision(12);
    auto line = [&](const char* name, double v) { o << std::left << std::setw(20) << name << v << '\n'; };
    line("delta_fn", b.delta_fn);
    line("delta_loss", b.delta_loss);
    line("delta_sample", b.delta_sample);
    line("delta_fn_bar", b.delta_fn_bar);
    line("delta_loss_bar", b.delta_loss_bar);
    line("delta_sample_bar", b.delta_sample_bar);
    line("overfit_bound", g.overfit);
    line("generalization", g.bound);
    line("overfit_simplified", g.simplified_overfit);
    if (it) {
      line("sgd_eta", it->eta);
      line("sgd_t_min", it->t_min);
    } else {
      o << std::left << std::setw(20) << "sgd_t_min" << "NA (" << sgd_note << ")\n";
    }
  });
}

void cmd_synth(const SynthSpec& spec, std::uint64_t stream, const std::string& out) {
  spec.validate();
  const auto ds = stream == 0 ? generate_synthetic(spec) : generate_synthetic(spec, stream);
  write_output(out, [&](std::ostream& o) { write_conll(o, ds); });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Replaces each `--config FILE` with the file's `key = value` lines as
// `--key=value`, in place, so later command-line options still win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i], path;
    if (a == "--config") {
      if (i + 1 >= argc) throw ConfigError("--config needs a file");
      path = argv[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    } else {
      out.push_back(a);
      continue;
    }
    std::istringstream in(read_text(path));
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineno;
      line = trim(line);
      if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
      auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
          value.back() == value.front())
        value = value.substr(1, value.size() - 2);
      for (auto& c : key)
        if (c == '_') c = '-';
      out.push_back("--" + key + "=" + value);
    }
  }
  std::reverse(out.begin(), out.end());  // CLI11 takes the vector back to front
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear-chain CRF and perceptron taggers with structure regularization", "structreg"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_unused;  // expanded before parsing
  app.require_subcommand(1);
  app.set_version_flag("--version", "structreg 0.1.0");

  DataOptions data;
  TrainOptions topt;
  std::string train_path, dev_path, test_path, out, report, model_path, input, predictions, json;
  bool eval_each = false, no_tags = false;

  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", config_unused, kConfigHelp);
  train_cmd->add_option("--train", train_path, "Training data")->required();
  train_cmd->add_option("--dev", dev_path, "Development data");
  train_cmd->add_option("--out", out, "Model file to write")->required();
  train_cmd->add_option("--report", report, "Report prefix: writes .jsonl, .tsv, .timing.tsv");
  train_cmd->add_flag("--eval-each-epoch", eval_each, "Record train/dev accuracy per epoch");
  data.add(train_cmd);
  topt.add(train_cmd, true);

  auto* predict_cmd = app.add_subcommand("predict", "Tag data with a trained model");
  predict_cmd->add_option("--config", config_unused, kConfigHelp);
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  predict_cmd->add_option("--input", input, "Data to tag")->required();
  predict_cmd->add_option("--out", out, "Output CoNLL (default stdout)");
  predict_cmd->add_flag("--no-tags", no_tags, "Input has no gold tag column");
  data.add(predict_cmd);

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model or a prediction file");
  eval_cmd->add_option("--config", config_unused, kConfigHelp);
  eval_cmd->add_option("--model", model_path, "Model file");
  eval_cmd->add_option("--input", input, "Gold data");
  eval_cmd->add_option("--predictions", predictions,
                       "Predict output: gold second-to-last column, prediction last");
  eval_cmd->add_option("--json", json, "Write the JSON result here instead of stdout");
  data.add(eval_cmd);

  std::string grid, seeds = "0..9", models = "crf", alphas, minis;
  std::size_t workers = default_workers(), removals = 20, probe_points = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy and time over a mini-size grid");
  sweep_cmd->add_option("--config", config_unused, kConfigHelp);
  sweep_cmd->add_option("--train", train_path, "Training data")->required();
  sweep_cmd->add_option("--dev", dev_path, "Development data");
  sweep_cmd->add_option("--test", test_path, "Test data")->required();
  sweep_cmd->add_option("--grid", grid, "Mini sizes, comma separated; 0 = alpha 1 baseline");
  sweep_cmd->add_option("--seeds", seeds, "Seeds: list and/or ranges like 0..9");
  sweep_cmd->add_option("--models", models, "crf, perceptron or both");
  sweep_cmd->add_option("--workers", workers, "Concurrent training runs");
  sweep_cmd->add_option("--out", out, "Result TSV (default stdout); timings go to OUT.timing.tsv");
  data.add(sweep_cmd);
  topt.add(sweep_cmd, false);

  auto* stab_cmd = app.add_subcommand("stability", "Leave-one-out stability probe");
  stab_cmd->add_option("--config", config_unused, kConfigHelp);
  stab_cmd->add_option("--train", train_path, "Training data")->required();
  stab_cmd->add_option("--probe", test_path, "Held-out data for the probe")->required();
  stab_cmd->add_option("--removals", removals, "Samples removed, one per retraining");
  stab_cmd->add_option("--alphas", alphas, "1 = baseline, other values are mini sizes n'");
  stab_cmd->add_option("--mini-sizes", minis, "Mini sizes n', 0 = baseline");
  stab_cmd->add_option("--seeds", seeds, "Seeds: list and/or ranges like 0..9");
  stab_cmd->add_option("--probe-points", probe_points, "Held-out positions compared (0 = all)");
  stab_cmd->add_option("--workers", workers, "Concurrent probes");
  stab_cmd->add_option("--out", out, "Result TSV (default stdout)");
  data.add(stab_cmd);
  topt.add(stab_cmd, false);

  TheoryParams tp;
  SgdTheoryParams sp;
  double empirical_risk = 0.0;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the stability and convergence bounds");
  bounds_cmd->add_option("--config", config_unused, kConfigHelp);
  bounds_cmd->add_option("--d", tp.d, "Feature dimension");
  bounds_cmd->add_option("--tau", tp.tau, "Loss smoothness");
  bounds_cmd->add_option("--rho", tp.rho, "Admissibility constant");
  bounds_cmd->add_option("--v", tp.v, "Feature value bound");
  bounds_cmd->add_option("--n", tp.n, "Structure complexity");
  bounds_cmd->add_option("--m", tp.m, "Training set size");
  bounds_cmd->add_option("--lambda", tp.lambda, "L2 strength");
  bounds_cmd->add_option("--alpha", tp.alpha, "Structure regularization strength");
  bounds_cmd->add_option("--gamma", tp.gamma, "Loss bound");
  bounds_cmd->add_option("--delta", tp.delta, "Confidence");
  bounds_cmd->add_option("--empirical-risk", empirical_risk, "R_e for the generalization bound");
  bounds_cmd->add_option("--c", sp.c, "Strong convexity modulus");
  bounds_cmd->add_option("--q", sp.q, "Gradient Lipschitz constant");
  bounds_cmd->add_option("--kappa", sp.kappa, "Gradient norm bound per position");
  bounds_cmd->add_option("--epsilon", sp.epsilon, "Target tolerance");
  bounds_cmd->add_option("--beta", sp.beta, "Step fraction in (0,1]");
  bounds_cmd->add_option("--a0", sp.a0, "Initial squared distance to the optimum");
  bounds_cmd->add_option("--out", out, "Write the table here (default stdout)");

  SynthSpec synth;
  std::uint64_t stream = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a synthetic HMM corpus");
  synth_cmd->add_option("--config", config_unused, kConfigHelp);
  synth_cmd->add_option("--labels", synth.num_labels, "Number of labels");
  synth_cmd->add_option("--vocab", synth.vocab_size, "Vocabulary size");
  synth_cmd->add_option("--mean-length", synth.mean_length, "Mean sequence length");
  synth_cmd->add_option("--samples", synth.num_samples, "Number of sequences");
  synth_cmd->add_option("--transition-sharpness", synth.transition_sharpness, "Transition peakedness");
  synth_cmd->add_option("--emission-sharpness", synth.emission_sharpness, "Emission peakedness");
  synth_cmd->add_option("--noise", synth.noise_rate, "Label noise rate");
  synth_cmd->add_option("--seed", synth.seed, "Seed of the HMM and the sample stream");
  synth_cmd->add_option("--stream", stream, "Independent sample stream of the same HMM (0 = main)");
  synth_cmd->add_option("--out", out, "Output CoNLL (default stdout)");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) cmd_train(train_path, dev_path, out, report, eval_each, data, topt);
    else if (*predict_cmd) cmd_predict(model_path, input, out, no_tags, data);
    else if (*eval_cmd) cmd_evaluate(model_path, input, predictions, json, data);
    else if (*sweep_cmd)
      cmd_sweep(train_path, dev_path, test_path, grid, seeds, models, workers, out, data, topt);
    else if (*stab_cmd)
      cmd_stability(train_path, test_path, removals, alphas, minis, seeds, probe_points, workers,
                    out, data, topt);
    else if (*bounds_cmd) cmd_bounds(tp, empirical_risk, sp, out);
    else if (*synth_cmd) cmd_synth(synth, stream, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
