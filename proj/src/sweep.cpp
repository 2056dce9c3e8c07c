#include "structreg/sweep.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "structreg/errors.hpp"
#include "structreg/evaluate.hpp"
#include "structreg/parallel.hpp"

namespace structreg {

std::vector<double> SweepConfig::default_grid() {
  std::vector<double> g{0.0};
  g.insert(g.end(), kDefaultMiniGrid.begin(), kDefaultMiniGrid.end());
  return g;
}

std::string objective_name(Objective o) { return o == Objective::Crf ? "crf" : "perceptron"; }

Objective parse_objective(const std::string& s) {
  if (s == "crf") return Objective::Crf;
  if (s == "perceptron" || s == "perc") return Objective::Perceptron;
  throw ConfigError("unknown model '" + s + "' (expected crf or perceptron)");
}

std::vector<std::string> sweep_metrics(const Dataset& test, const Dataset* dev) {
  std::vector<std::string> m{"test_accuracy"};
  if (follows_bio(*test.labels)) m.emplace_back("test_f1");
  if (dev) m.emplace_back("dev_accuracy");
  m.emplace_back("epochs");
  return m;
}

SweepResult run_sweep(const Dataset& train_set, const Dataset* dev, const Dataset& test,
                      const SweepConfig& cfg) {
  struct Cell {
    Objective objective;
    double mini_size;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto o : cfg.objectives)
    for (double g : cfg.grid)
      for (auto s : cfg.seeds) cells.push_back({o, g, s});

  const auto metrics = sweep_metrics(test, dev);
  std::vector<std::vector<SweepRow>> per_cell(cells.size());

  parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
    const auto& c = cells[i];
    auto& rows = per_cell[i];
    auto row = [&](const std::string& metric, double value, double secs, std::string status) {
      rows.push_back({c.objective, c.mini_size, c.seed, metric, value, secs, std::move(status)});
    };
    try {
      TrainConfig tc = c.objective == Objective::Crf ? cfg.crf : cfg.perceptron;
      tc.objective = c.objective;
      tc.mini_size = c.mini_size;
      tc.seed = c.seed;
      const auto run = train(train_set, nullptr, tc);
      const double secs = run.report.total_seconds();
      const auto test_eval = evaluate(run.model, test);
      for (const auto& m : metrics) {
        double v = 0.0;
        if (m == "test_accuracy") v = test_eval.token_accuracy;
        else if (m == "test_f1") v = test_eval.chunks ? test_eval.chunks->f1 : 0.0;
        else if (m == "dev_accuracy") v = token_accuracy(run.model, *dev);
        else if (m == "epochs") v = static_cast<double>(run.report.epochs.size());
        row(m, v, secs, "ok");
      }
    } catch (const std::exception& e) {
      rows.clear();
      for (const auto& m : metrics)
        row(m, std::numeric_limits<double>::quiet_NaN(), 0.0, std::string("error: ") + e.what());
    }
  });

  SweepResult r;
  r.cells = cells.size();
  for (auto& rows : per_cell)
    for (auto& row : rows) r.rows.push_back(std::move(row));
  return r;
}

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "NA";
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

void write_sweep_tsv(std::ostream& out, const SweepResult& r) {
  out << "objective\tmini_size\tseed\tmetric\tvalue\tstatus\n";
  for (const auto& row : r.rows)
    out << objective_name(row.objective) << '\t' << num(row.mini_size) << '\t' << row.seed << '\t'
        << row.metric << '\t' << num(row.value) << '\t' << sanitize(row.status) << '\n';
}

void write_sweep_timing_tsv(std::ostream& out, const SweepResult& r) {
  out << "objective\tmini_size\tseed\ttrain_seconds\n";
  const SweepRow* last = nullptr;
  for (const auto& row : r.rows) {
    if (last && last->objective == row.objective && last->mini_size == row.mini_size &&
        last->seed == row.seed)
      continue;
    out << objective_name(row.objective) << '\t' << num(row.mini_size) << '\t' << row.seed << '\t'
        << num(row.train_seconds) << '\n';
    last = &row;
  }
}

}  // namespace structreg
