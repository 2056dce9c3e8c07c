#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "structreg/corpus.hpp"
#include "structreg/models.hpp"

namespace structreg {

struct Chunk {
  std::string type;
  std::size_t begin = 0;  // inclusive
  std::size_t last = 0;   // inclusive
  auto operator<=>(const Chunk&) const = default;
};

/// BIO chunks: a chunk starts at B-T and runs over the following I- tags;
/// its type comes from the B tag. Stray I- tags start nothing.
std::vector<Chunk> bio_chunks(const std::vector<std::string>& tags);

/// True when every label is "O" or starts with "B-"/"I-", and some label starts with "B-".
bool follows_bio(const Alphabet& labels);

struct ChunkScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold_chunks = 0, predicted_chunks = 0, correct_chunks = 0;
};

struct EvalResult {
  std::size_t tokens = 0;
  std::size_t correct = 0;
  double token_accuracy = 0.0;
  std::optional<ChunkScores> chunks;
  /// confusion[gold label][predicted label] = count
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  double decode_seconds = 0.0;
};

EvalResult score_predictions(const Alphabet& labels,
                             const std::vector<std::vector<LabelId>>& gold,
                             const std::vector<std::vector<LabelId>>& predicted);

std::vector<std::vector<LabelId>> predict(const Model& model, const Dataset& extracted);

/// Decodes `extracted` (features against the model's alphabet) and scores it.
EvalResult evaluate(const Model& model, const Dataset& extracted);

double token_accuracy(const Model& model, const Dataset& extracted);

/// `with_timing` adds decode_seconds, which makes the text run-dependent.
std::string eval_to_json(const EvalResult& r, bool with_timing = true);
void print_eval_table(std::ostream& out, const EvalResult& r);

}  // namespace structreg
