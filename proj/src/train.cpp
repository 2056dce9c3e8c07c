#include "structreg/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "structreg/errors.hpp"
#include "structreg/evaluate.hpp"

namespace structreg {

DecompositionPolicy TrainConfig::policy() const {
  DecompositionPolicy p;
  p.mini_size = mini_size;
  p.seed = seed;
  p.randomize_phase = randomize_phase;
  p.refresh_each_epoch = refresh_each_epoch;
  return p;
}

void TrainConfig::validate() const {
  policy().validate();
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(eta0 > 0.0)) throw ConfigError("eta0 must be > 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must be in (0,1]");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(convergence_threshold > 0.0)) throw ConfigError("convergence threshold must be > 0");
  if (!(perceptron_rate > 0.0)) throw ConfigError("perceptron rate must be > 0");
}

TrainConfig perceptron_defaults() {
  TrainConfig cfg;
  cfg.objective = Objective::Perceptron;
  cfg.max_epochs = 10;
  cfg.lambda = 0.0;
  return cfg;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

[[noreturn]] void diverged(std::size_t epoch, double eta) {
  std::ostringstream ss;
  ss << "training diverged at epoch " << epoch << " with learning rate " << eta;
  throw NumericalError(ss.str());
}

// CRF weights as scale * values with ||values||^2 tracked incrementally.
class ScaledWeights {
 public:
  explicit ScaledWeights(std::size_t n) : values_(n, 0.0) {}

  WeightsView view() const { return {values_, scale_}; }
  double squared_norm() const { return scale_ * scale_ * sqnorm_; }

  void shrink(double factor, bool lazy) {
    if (factor == 1.0) return;
    if (lazy) {
      scale_ *= factor;
      if (scale_ < 1e-9) fold();
    } else {
      for (auto& v : values_) v *= factor;
      recompute_norm();
    }
  }

  /// w_i += delta
  void add(std::size_t i, double delta) {
    const double old = values_[i];
    const double now = old + delta / scale_;
    values_[i] = now;
    sqnorm_ += now * now - old * old;
  }

  void recompute_norm() {
    sqnorm_ = 0.0;
    for (double v : values_) sqnorm_ += v * v;
  }

  std::vector<double> materialize() const {
    std::vector<double> w(values_);
    for (auto& x : w) x *= scale_;
    return w;
  }

 private:
  void fold() {
    for (auto& v : values_) v *= scale_;
    scale_ = 1.0;
    recompute_norm();
  }

  std::vector<double> values_;
  double scale_ = 1.0;
  double sqnorm_ = 0.0;
};

void merge_in_place(std::vector<std::pair<std::size_t, double>>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < entries.size(); ++r) {
    if (w > 0 && entries[w - 1].first == entries[r].first) entries[w - 1].second += entries[r].second;
    else entries[w++] = entries[r];
  }
  entries.resize(w);
}

void check_trainable(const Dataset& ds) {
  if (ds.empty() || ds.total_tokens() == 0) throw DataError("empty training set");
  for (const auto& s : ds.samples)
    if (s.features.size() != s.length() || s.gold.size() != s.length())
      throw DataError("training sample " + std::to_string(s.id) +
                      " lacks features or gold labels");
}

void evaluate_epoch(const Model& model, const Dataset& train_set, const Dataset* dev,
                    EpochRecord& rec) {
  rec.train_accuracy = token_accuracy(model, train_set);
  if (dev) rec.dev_accuracy = token_accuracy(model, *dev);
}

TrainOutcome train_crf(const Dataset& ds, const Dataset* dev, const TrainConfig& cfg) {
  TrainOutcome out;
  out.model = Model::zeros(ds.labels, ds.features, cfg.templates);
  const auto& layout = out.model.layout;
  const auto policy = cfg.policy();
  const double tokens = static_cast<double>(ds.total_tokens());

  // Epoch-end objectives are measured on one fixed decomposition so that
  // they change only when the weights do.
  const auto reference = decompose_epoch(ds, policy, 0);

  ScaledWeights w(layout.total());
  std::vector<std::pair<std::size_t, double>> grad;
  double elapsed = 0.0;
  double previous = 0.0;

  for (std::size_t e = 0; e < cfg.max_epochs; ++e) {
    const auto t0 = Clock::now();
    const double eta = cfg.eta0 * std::pow(cfg.decay, static_cast<double>(e));
    const auto stream = decompose_epoch(ds, policy, e);
    if (cfg.on_stream) cfg.on_stream(stream);
    w.recompute_norm();

    double nll = 0.0, reg = 0.0;
    for (const auto& span : stream.minis) {
      const auto z = view_of(ds, span);
      const double share = static_cast<double>(z.size()) / tokens;
      const double reg_share = cfg.lambda * share;
      const double sqnorm = w.squared_norm();

      grad.clear();
      const double loss = crf_loss_grad_into(
          layout, w.view(), z, [&](std::size_t i, double v) { grad.emplace_back(i, v); });
      nll += loss;
      reg += 0.5 * reg_share * sqnorm;

      if (cfg.record_gradients) {
        // ||g + reg_share * w||^2 = ||g||^2 + 2 reg_share <g,w> + reg_share^2 ||w||^2
        merge_in_place(grad);
        double gg = 0.0, gw = 0.0;
        const auto view = w.view();
        for (const auto& [i, g] : grad) {
          gg += g * g;
          gw += g * view[i];
        }
        const double norm2 = gg + 2.0 * reg_share * gw + reg_share * reg_share * sqnorm;
        out.report.gradients.push_back({std::sqrt(std::max(0.0, norm2)), z.size()});
      }

      const double factor = 1.0 - eta * reg_share;
      if (!(factor > 0.0)) diverged(e + 1, eta);
      w.shrink(factor, cfg.lazy_l2);
      for (const auto& [i, g] : grad) w.add(i, -eta * g);
      ++out.report.total_updates;
    }

    EpochRecord rec;
    rec.epoch = e + 1;
    rec.online_objective = (nll + reg) / tokens;
    w.recompute_norm();
    double end_nll = 0.0;
    for (const auto& span : reference.minis) end_nll += crf_loss(layout, w.view(), view_of(ds, span));
    rec.objective = (end_nll + 0.5 * cfg.lambda * w.squared_norm()) / tokens;
    elapsed += seconds_since(t0);
    rec.learning_rate = eta;
    rec.updates = stream.minis.size();
    rec.seconds = elapsed;
    if (!std::isfinite(rec.objective) || !std::isfinite(rec.online_objective)) diverged(e + 1, eta);
    if (cfg.eval_each_epoch) {
      out.model.weights = w.materialize();
      evaluate_epoch(out.model, ds, dev, rec);
    }
    out.report.epochs.push_back(rec);

    if (e > 0 && std::abs(rec.objective - previous) / std::abs(previous) <
                     cfg.convergence_threshold) {
      out.report.converged_at = e + 1;
      break;
    }
    previous = rec.objective;
  }
  out.model.weights = w.materialize();
  return out;
}

TrainOutcome train_perceptron(const Dataset& ds, const Dataset* dev, const TrainConfig& cfg) {
  TrainOutcome out;
  out.model = Model::zeros(ds.labels, ds.features, cfg.templates);
  const auto policy = cfg.policy();
  const double tokens = static_cast<double>(ds.total_tokens());
  WeightAverager averager(out.model.layout.total());
  double elapsed = 0.0;

  for (std::size_t e = 0; e < cfg.max_epochs; ++e) {
    const auto t0 = Clock::now();
    const auto stream = decompose_epoch(ds, policy, e);
    if (cfg.on_stream) cfg.on_stream(stream);
    std::size_t mistakes = 0;
    for (const auto& span : stream.minis) {
      mistakes += perceptron_update(out.model, view_of(ds, span), cfg.perceptron_rate, &averager);
      ++out.report.total_updates;
    }
    elapsed += seconds_since(t0);

    EpochRecord rec;
    rec.epoch = e + 1;
    rec.objective = static_cast<double>(mistakes) / tokens;
    rec.online_objective = rec.objective;
    rec.learning_rate = cfg.perceptron_rate;
    rec.updates = stream.minis.size();
    rec.seconds = elapsed;
    if (cfg.eval_each_epoch) {
      Model snapshot = out.model;
      if (cfg.average) snapshot.weights = averager.average(out.model.weights);
      evaluate_epoch(snapshot, ds, dev, rec);
    }
    out.report.epochs.push_back(rec);
  }
  out.final_weights = out.model.weights;
  if (cfg.average) out.model.weights = averager.average(out.model.weights);
  return out;
}

}  // namespace

TrainOutcome train(const Dataset& train_set, const Dataset* dev, const TrainConfig& cfg) {
  cfg.validate();
  check_trainable(train_set);
  if (dev && dev->features != train_set.features &&
      dev->features->entries() != train_set.features->entries())
    throw DataError("dev set was not extracted against the training feature alphabet");
  return cfg.objective == Objective::Crf ? train_crf(train_set, dev, cfg)
                                         : train_perceptron(train_set, dev, cfg);
}

double regularized_objective(const Model& model, const Dataset& ds,
                             const MiniBatchStream& stream, double lambda) {
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const auto& span : stream.minis) {
    nll += crf_loss(model.layout, view_of(model), view_of(ds, span));
    tokens += span.size();
  }
  double sq = 0.0;
  for (double x : model.weights) sq += x * x;
  return (nll + 0.5 * lambda * sq) / static_cast<double>(tokens);
}

EpochsToTolerance measure_epochs_to_tolerance(const Dataset& ds, const TrainConfig& cfg,
                                              double epsilon_rel) {
  const auto run = train(ds, nullptr, cfg);
  EpochsToTolerance r;
  if (!run.report.converged_at) return r;
  r.converged_at = *run.report.converged_at;
  r.reference = run.report.final_objective();
  r.seconds_to_convergence = run.report.total_seconds();
  for (const auto& rec : run.report.epochs) {
    if (std::abs(rec.objective - r.reference) <= epsilon_rel * std::abs(r.reference)) {
      r.epochs = rec.epoch;
      break;
    }
  }
  return r;
}

namespace {

nlohmann::ordered_json optional_number(double x) {
  return std::isnan(x) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(x);
}

std::string tsv_number(double x) {
  if (std::isnan(x)) return "NA";
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

}  // namespace

void write_report_jsonl(std::ostream& out, const TrainReport& report) {
  for (const auto& r : report.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["objective"] = r.objective;
    j["online_objective"] = r.online_objective;
    j["train_accuracy"] = optional_number(r.train_accuracy);
    j["dev_accuracy"] = optional_number(r.dev_accuracy);
    j["seconds"] = r.seconds;
    j["learning_rate"] = r.learning_rate;
    j["updates"] = r.updates;
    j["converged"] = report.converged_at && *report.converged_at == r.epoch;
    out << j.dump() << '\n';
  }
}

void write_report_tsv(std::ostream& out, const TrainReport& report) {
  out << "epoch\tobjective\tonline_objective\ttrain_accuracy\tdev_accuracy\tlearning_rate\tupdates\n";
  for (const auto& r : report.epochs)
    out << r.epoch << '\t' << tsv_number(r.objective) << '\t' << tsv_number(r.online_objective)
        << '\t' << tsv_number(r.train_accuracy)
        << '\t' << tsv_number(r.dev_accuracy) << '\t' << tsv_number(r.learning_rate) << '\t'
        << r.updates << '\n';
}

void write_report_timing_tsv(std::ostream& out, const TrainReport& report) {
  out << "epoch\tseconds\n";
  for (const auto& r : report.epochs) out << r.epoch << '\t' << tsv_number(r.seconds) << '\n';
}

}  // namespace structreg
