#include <sstream>

#include "doctest.h"
#include "structreg/corpus.hpp"
#include "structreg/errors.hpp"
#include "structreg/evaluate.hpp"
#include "structreg/features.hpp"
#include "structreg/train.hpp"

using namespace structreg;

namespace {

Dataset parse(const std::string& text, const ConllSchema& schema = {}) {
  std::istringstream in(text);
  return read_conll(in, schema);
}

const char* kTwoBlocks =
    "the\tDT\tB-NP\n"
    "cat\tNN\tI-NP\n"
    "sat\tVB\tO\n"
    "\n"
    "a\tDT\tB-NP\n"
    "dog\tNN\tI-NP\n";

}  // namespace

TEST_CASE("conll blocks") {
  const auto ds = parse(kTwoBlocks);
  REQUIRE(ds.size() == 2);
  CHECK(ds.samples[0].length() == 3);
  CHECK(ds.samples[1].length() == 2);
  CHECK(ds.samples[0].tokens[1].surface == "cat");
  CHECK(ds.samples[0].tokens[1].attributes == std::vector<std::string>{"NN"});
  CHECK(ds.labels->entries() == std::vector<std::string>{"B-NP", "I-NP", "O"});
  CHECK(ds.samples[1].gold == std::vector<LabelId>{0, 1});
}

TEST_CASE("ragged line is reported by number") {
  try {
    parse("a\tX\nb\n");
    FAIL("no exception");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("reading twice assigns identical ids") {
  const auto a = parse(kTwoBlocks), b = parse(kTwoBlocks);
  CHECK(serialize_dataset(a) == serialize_dataset(b));
}

TEST_CASE("unknown label against a frozen alphabet") {
  auto labels = std::make_shared<Alphabet>(std::vector<std::string>{"B-NP", "I-NP"});
  labels->freeze();
  std::istringstream in(kTwoBlocks);
  CHECK_THROWS_AS(read_conll(in, {}, labels), FormatError);
}

TEST_CASE("missing file") { CHECK_THROWS_AS(read_conll_file("/nonexistent/x.conll"), IoError); }

TEST_CASE("write then read is the identity") {
  const auto ds = parse(kTwoBlocks);
  std::ostringstream out;
  write_conll(out, ds);
  const auto back = parse(out.str());
  CHECK(serialize_dataset(back) == serialize_dataset(ds));
}

TEST_CASE("synthetic generator") {
  SynthSpec spec;
  spec.num_samples = 0;
  CHECK(generate_synthetic(spec).empty());

  spec.num_samples = 50;
  CHECK(serialize_dataset(generate_synthetic(spec)) == serialize_dataset(generate_synthetic(spec)));
  CHECK(serialize_dataset(generate_synthetic(spec, 1)) !=
        serialize_dataset(generate_synthetic(spec)));

  SynthSpec bad;
  bad.num_labels = 1;
  CHECK_THROWS_AS(generate_synthetic(bad), ConfigError);

  spec.num_samples = 400;
  const auto ds = generate_synthetic(spec);
  CHECK(ds.mean_length() == doctest::Approx(40.0).epsilon(0.05));
  CHECK(ds.labels->size() == 5);
}

TEST_CASE("synthetic data is learnable when sharp and clean") {
  SynthSpec spec;
  spec.transition_sharpness = 6.0;
  spec.emission_sharpness = 6.0;
  spec.mean_length = 20;
  const auto tpl = parse_templates("U:w[0]\nU:w[-1]\n");
  const auto tr = extract(generate_synthetic(spec), tpl, false);
  const auto te = extract_frozen(generate_synthetic(spec, 1), tpl, tr.features);
  TrainConfig cfg;
  cfg.templates = tpl;
  const auto run = train(tr, nullptr, cfg);
  CHECK(token_accuracy(run.model, te) > 0.9);
}

TEST_CASE("split") {
  SynthSpec spec;
  spec.num_samples = 10;
  const auto ds = generate_synthetic(spec);
  auto [a, b] = split_dataset(ds, 0.5, 3);
  CHECK(a.size() == 5);
  CHECK(b.size() == 5);
  auto [c, d] = split_dataset(ds, 0.99, 3);
  CHECK(c.size() == 9);
  CHECK(d.size() == 1);

  auto ids = [](const Dataset& x) {
    std::vector<std::uint64_t> v;
    for (const auto& s : x.samples) v.push_back(s.id);
    return v;
  };
  auto [a2, b2] = split_dataset(ds, 0.5, 3);
  CHECK(ids(a) == ids(a2));
  CHECK(ids(b) == ids(b2));
  CHECK_THROWS_AS(split_dataset(ds, 0.01, 3), ConfigError);
}

TEST_CASE("without_sample keeps ids") {
  SynthSpec spec;
  spec.num_samples = 5;
  const auto ds = generate_synthetic(spec);
  const auto r = without_sample(ds, 2);
  REQUIRE(r.size() == 4);
  CHECK(r.samples[2].id == ds.samples[3].id);
  CHECK(r.samples[2] == ds.samples[3]);
}

TEST_CASE("dataset cache round trip") {
  SynthSpec spec;
  spec.num_samples = 20;
  const auto ds = extract(generate_synthetic(spec), default_templates(), false);
  const auto bytes = serialize_dataset(ds);
  const auto back = deserialize_dataset(bytes);
  CHECK(back.samples == ds.samples);
  CHECK(back.features->entries() == ds.features->entries());
  CHECK(serialize_dataset(back) == bytes);
  CHECK_THROWS_AS(deserialize_dataset(bytes.substr(0, 10)), DataError);
}
