// Python bindings for the structreg library.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "structreg/corpus.hpp"
#include "structreg/decompose.hpp"
#include "structreg/errors.hpp"
#include "structreg/evaluate.hpp"
#include "structreg/features.hpp"
#include "structreg/models.hpp"
#include "structreg/sweep.hpp"
#include "structreg/theory.hpp"
#include "structreg/train.hpp"

namespace py = pybind11;
using namespace structreg;

namespace {

py::dict epoch_dict(const EpochRecord& e) {
  py::dict d;
  d["epoch"] = e.epoch;
  d["objective"] = e.objective;
  d["online_objective"] = e.online_objective;
  d["train_accuracy"] = e.train_accuracy;
  d["dev_accuracy"] = e.dev_accuracy;
  d["seconds"] = e.seconds;
  d["learning_rate"] = e.learning_rate;
  d["updates"] = e.updates;
  return d;
}

std::vector<std::vector<std::string>> tag_strings(const Alphabet& labels,
                                                  const std::vector<std::vector<LabelId>>& ids) {
  std::vector<std::vector<std::string>> out;
  out.reserve(ids.size());
  for (const auto& row : ids) {
    auto& tags = out.emplace_back();
    for (auto y : row) tags.push_back(labels.at(y));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_structreg, m) {
  m.doc() = "Linear-chain CRF and perceptron taggers with structure regularization";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto config = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", config.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", data.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("num_labels", &SynthSpec::num_labels)
      .def_readwrite("vocab_size", &SynthSpec::vocab_size)
      .def_readwrite("mean_length", &SynthSpec::mean_length)
      .def_readwrite("num_samples", &SynthSpec::num_samples)
      .def_readwrite("transition_sharpness", &SynthSpec::transition_sharpness)
      .def_readwrite("emission_sharpness", &SynthSpec::emission_sharpness)
      .def_readwrite("noise_rate", &SynthSpec::noise_rate)
      .def_readwrite("seed", &SynthSpec::seed);

  py::class_<TemplateSet>(m, "TemplateSet")
      .def("lines", &TemplateSet::lines)
      .def_readonly("use_rich_edge", &TemplateSet::use_rich_edge)
      .def("__repr__", [](const TemplateSet& t) {
        std::string s = "TemplateSet(";
        for (const auto& l : t.lines()) s += l + "; ";
        return s + ")";
      });
  m.def("parse_templates", [](const std::string& text) { return parse_templates(text); });
  m.def("default_templates", &default_templates);

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels->entries(); })
      .def_property_readonly("num_features", [](const Dataset& d) { return d.features->size(); })
      .def_property_readonly("extracted", [](const Dataset& d) {
        return !d.samples.empty() && !d.samples.front().features.empty();
      })
      .def("lengths",
           [](const Dataset& d) {
             std::vector<std::size_t> out;
             for (const auto& s : d.samples) out.push_back(s.length());
             return out;
           })
      .def("words",
           [](const Dataset& d) {
             std::vector<std::vector<std::string>> out;
             for (const auto& s : d.samples) {
               auto& row = out.emplace_back();
               for (const auto& t : s.tokens) row.push_back(t.surface);
             }
             return out;
           })
      .def("tags", [](const Dataset& d) {
        std::vector<std::vector<LabelId>> ids;
        for (const auto& s : d.samples) ids.push_back(s.gold);
        return tag_strings(*d.labels, ids);
      })
      .def("to_conll", [](const Dataset& d) {
        std::ostringstream out;
        write_conll(out, d);
        return out.str();
      });

  m.def("synth", [](const SynthSpec& spec, std::uint64_t stream) {
    spec.validate();
    return stream == 0 ? generate_synthetic(spec) : generate_synthetic(spec, stream);
  }, py::arg("spec"), py::arg("stream") = 0);
  auto alphabet = [](const std::optional<std::vector<std::string>>& labels) -> AlphabetPtr {
    return labels ? std::make_shared<Alphabet>(*labels) : nullptr;
  };
  m.def("read_conll", [alphabet](const std::string& path, int tag_column, int word_column,
                                 bool has_tags, std::optional<std::vector<std::string>> labels) {
    return read_conll_file(path, ConllSchema{tag_column, word_column, has_tags}, alphabet(labels));
  }, py::arg("path"), py::arg("tag_column") = -1, py::arg("word_column") = 0,
     py::arg("has_tags") = true, py::arg("labels") = py::none(),
     "With `labels`, tags are looked up in that fixed label set.");
  m.def("parse_conll", [alphabet](const std::string& text, int tag_column, int word_column,
                                  bool has_tags, std::optional<std::vector<std::string>> labels) {
    std::istringstream in(text);
    return read_conll(in, ConllSchema{tag_column, word_column, has_tags}, alphabet(labels));
  }, py::arg("text"), py::arg("tag_column") = -1, py::arg("word_column") = 0,
     py::arg("has_tags") = true, py::arg("labels") = py::none());
  m.def("extract", &extract, py::arg("dataset"), py::arg("templates"), py::arg("freeze") = false);
  m.def("extract_frozen", [](const Dataset& raw, const Dataset& reference, const TemplateSet& tpl) {
    return extract_frozen(raw, tpl, reference.features);
  }, py::arg("raw"), py::arg("reference"), py::arg("templates"),
     "Extracts with the feature set of an already extracted dataset.");
  m.def("extract_frozen", [](const Dataset& raw, const Model& model) {
    return extract_frozen(raw, model.templates, model.features);
  }, py::arg("raw"), py::arg("model"));

  m.def("segment_lengths", [](std::size_t n, double mini_size, std::uint64_t seed,
                              bool randomize_phase) {
    DecompositionPolicy p;
    p.mini_size = mini_size;
    p.seed = seed;
    p.randomize_phase = randomize_phase;
    p.validate();
    Rng rng(seed);
    return segment_lengths(n, p, rng);
  }, py::arg("n"), py::arg("mini_size"), py::arg("seed") = 0, py::arg("randomize_phase") = true);
  m.def("decompose", [](const Dataset& ds, double mini_size, std::uint64_t seed, std::size_t epoch) {
    DecompositionPolicy p;
    p.mini_size = mini_size;
    p.seed = seed;
    p.validate();
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
    for (const auto& s : decompose_epoch(ds, p, epoch).minis) out.emplace_back(s.parent, s.begin, s.end);
    return out;
  }, py::arg("dataset"), py::arg("mini_size"), py::arg("seed") = 0, py::arg("epoch") = 0,
     "Shuffled mini-samples of one epoch as (sample index, begin, end).");

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_static("perceptron", &perceptron_defaults)
      .def_property("objective",
                    [](const TrainConfig& c) { return objective_name(c.objective); },
                    [](TrainConfig& c, const std::string& s) {
                      auto d = s == "perceptron" ? perceptron_defaults() : TrainConfig{};
                      c.objective = parse_objective(s);
                      if (c.objective == Objective::Perceptron) c.max_epochs = d.max_epochs;
                    })
      .def_readwrite("mini_size", &TrainConfig::mini_size)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("eta0", &TrainConfig::eta0)
      .def_readwrite("decay", &TrainConfig::decay)
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("convergence_threshold", &TrainConfig::convergence_threshold)
      .def_readwrite("eval_each_epoch", &TrainConfig::eval_each_epoch)
      .def_readwrite("randomize_phase", &TrainConfig::randomize_phase)
      .def_readwrite("refresh_each_epoch", &TrainConfig::refresh_each_epoch)
      .def_readwrite("perceptron_rate", &TrainConfig::perceptron_rate)
      .def_readwrite("average", &TrainConfig::average)
      .def_readwrite("templates", &TrainConfig::templates)
      .def("validate", &TrainConfig::validate);

  py::class_<Model>(m, "Model")
      .def_property_readonly("labels", [](const Model& md) { return md.labels->entries(); })
      .def_property_readonly("num_features", [](const Model& md) { return md.features->size(); })
      .def_property_readonly("num_weights", [](const Model& md) { return md.weights.size(); })
      .def_readonly("templates", &Model::templates)
      .def_readonly("weights", &Model::weights)
      .def("save", [](const Model& md, const std::string& path) { save_model(md, path); })
      .def_static("load", &load_model)
      .def("to_bytes", [](const Model& md) { return py::bytes(serialize_model(md)); })
      .def_static("from_bytes", [](const py::bytes& b) { return deserialize_model(std::string(b)); })
      .def("predict", [](const Model& md, const Dataset& ds) {
        return tag_strings(*md.labels, predict(md, ds));
      })
      .def("viterbi", [](const Model& md, const Dataset& ds, std::size_t index) {
        const auto d = viterbi(md, ds.samples.at(index).features);
        std::vector<std::string> tags;
        for (auto y : d.labels) tags.push_back(md.labels->at(y));
        return py::make_tuple(tags, d.score);
      }, py::arg("dataset"), py::arg("index"));

  m.def("train", [](const Dataset& train_set, const TrainConfig& cfg, const Dataset* dev) {
    TrainOutcome run;
    {
      py::gil_scoped_release release;
      run = train(train_set, dev, cfg);
    }
    py::list epochs;
    for (const auto& e : run.report.epochs) epochs.append(epoch_dict(e));
    py::dict report;
    report["epochs"] = epochs;
    report["converged_at"] = run.report.converged_at;
    report["total_updates"] = run.report.total_updates;
    return py::make_tuple(std::move(run.model), report);
  }, py::arg("train"), py::arg("config") = TrainConfig{}, py::arg("dev") = nullptr,
     "Returns (model, report).");

  m.def("evaluate_json", [](const Model& md, const Dataset& ds) {
    return eval_to_json(evaluate(md, ds), false);
  });
  m.def("score_tags_json", [](const std::vector<std::vector<std::string>>& gold,
                              const std::vector<std::vector<std::string>>& pred) {
    if (gold.size() != pred.size()) throw DataError("gold and predicted counts differ");
    Alphabet labels;
    std::vector<std::vector<LabelId>> g, p;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i].size() != pred[i].size())
        throw DataError("sequence " + std::to_string(i) + " has mismatched lengths");
      auto& gr = g.emplace_back();
      auto& pr = p.emplace_back();
      for (const auto& t : gold[i]) gr.push_back(*labels.intern(t));
      for (const auto& t : pred[i]) pr.push_back(*labels.intern(t));
    }
    return eval_to_json(score_predictions(labels, g, p), false);
  });
  m.def("bio_chunks", [](const std::vector<std::string>& tags) {
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> out;
    for (const auto& c : bio_chunks(tags)) out.emplace_back(c.type, c.begin, c.last);
    return out;
  });

  py::class_<TheoryParams>(m, "TheoryParams")
      .def(py::init<>())
      .def_readwrite("d", &TheoryParams::d)
      .def_readwrite("tau", &TheoryParams::tau)
      .def_readwrite("rho", &TheoryParams::rho)
      .def_readwrite("v", &TheoryParams::v)
      .def_readwrite("n", &TheoryParams::n)
      .def_readwrite("m", &TheoryParams::m)
      .def_readwrite("lambda_", &TheoryParams::lambda)
      .def_readwrite("alpha", &TheoryParams::alpha)
      .def_readwrite("gamma", &TheoryParams::gamma)
      .def_readwrite("delta", &TheoryParams::delta);

  m.def("bounds", [](const TheoryParams& p, double empirical_risk) {
    const auto b = stability_bounds(p);
    const auto g = generalization_bound(p, empirical_risk);
    py::dict d;
    d["delta_fn"] = b.delta_fn;
    d["delta_loss"] = b.delta_loss;
    d["delta_sample"] = b.delta_sample;
    d["delta_fn_bar"] = b.delta_fn_bar;
    d["delta_loss_bar"] = b.delta_loss_bar;
    d["delta_sample_bar"] = b.delta_sample_bar;
    d["generalization"] = g.bound;
    d["overfit_bound"] = g.overfit;
    d["overfit_simplified"] = g.simplified_overfit;
    return d;
  }, py::arg("params"), py::arg("empirical_risk") = 0.0);

  m.def("sgd_iterations", [](double c, double q, double kappa, double epsilon, double beta,
                             double a0, double n, double alpha) {
    SgdTheoryParams p{c, q, kappa, epsilon, beta, a0};
    const auto it = sgd_iterations(p, n, alpha);
    return py::make_tuple(it.eta, it.t_min);
  }, py::arg("c") = 1.0, py::arg("q") = 1.0, py::arg("kappa") = 1.0, py::arg("epsilon") = 0.1,
     py::arg("beta") = 1.0, py::arg("a0") = 1.0, py::arg("n") = 1.0, py::arg("alpha") = 1.0,
     "Returns (eta, t_min).");
}
