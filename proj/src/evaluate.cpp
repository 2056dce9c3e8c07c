#include "structreg/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <set>

#include "json.hpp"

#include "structreg/errors.hpp"

namespace structreg {

std::vector<Chunk> bio_chunks(const std::vector<std::string>& tags) {
  std::vector<Chunk> out;
  std::optional<Chunk> open;
  auto close = [&] {
    if (open) out.push_back(*open);
    open.reset();
  };
  for (std::size_t k = 0; k < tags.size(); ++k) {
    const auto& t = tags[k];
    if (t.starts_with("B-")) {
      close();
      open = Chunk{t.substr(2), k, k};
    } else if (t.starts_with("I-") && open) {
      open->last = k;
    } else {
      close();
    }
  }
  close();
  return out;
}

bool follows_bio(const Alphabet& labels) {
  bool any_b = false;
  for (const auto& l : labels.entries()) {
    if (l.starts_with("B-")) any_b = true;
    else if (l != "O" && !l.starts_with("I-")) return false;
  }
  return any_b;
}

EvalResult score_predictions(const Alphabet& labels,
                             const std::vector<std::vector<LabelId>>& gold,
                             const std::vector<std::vector<LabelId>>& predicted) {
  if (gold.size() != predicted.size()) throw DataError("prediction count does not match gold");
  EvalResult r;
  const bool bio = follows_bio(labels);
  ChunkScores cs;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != predicted[i].size())
      throw DataError("prediction length mismatch in sequence " + std::to_string(i));
    std::vector<std::string> gs, ps;
    for (std::size_t k = 0; k < gold[i].size(); ++k) {
      const auto& g = labels.at(gold[i][k]);
      const auto& p = labels.at(predicted[i][k]);
      ++r.tokens;
      r.correct += gold[i][k] == predicted[i][k];
      ++r.confusion[g][p];
      gs.push_back(g);
      ps.push_back(p);
    }
    if (bio) {
      const auto gc = bio_chunks(gs);
      const auto pc = bio_chunks(ps);
      const std::set<Chunk> gset(gc.begin(), gc.end());
      cs.gold_chunks += gc.size();
      cs.predicted_chunks += pc.size();
      for (const auto& c : pc) cs.correct_chunks += gset.count(c);
    }
  }
  r.token_accuracy = r.tokens ? static_cast<double>(r.correct) / static_cast<double>(r.tokens) : 0.0;
  if (bio) {
    cs.precision = cs.predicted_chunks
                       ? static_cast<double>(cs.correct_chunks) / static_cast<double>(cs.predicted_chunks)
                       : 0.0;
    cs.recall = cs.gold_chunks
                    ? static_cast<double>(cs.correct_chunks) / static_cast<double>(cs.gold_chunks)
                    : 0.0;
    cs.f1 = cs.precision + cs.recall > 0.0
                ? 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall)
                : 0.0;
    r.chunks = cs;
  }
  return r;
}

std::vector<std::vector<LabelId>> predict(const Model& model, const Dataset& extracted) {
  std::vector<std::vector<LabelId>> out;
  out.reserve(extracted.size());
  for (const auto& s : extracted.samples) out.push_back(viterbi(model, s.features).labels);
  return out;
}

EvalResult evaluate(const Model& model, const Dataset& extracted) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pred = predict(model, extracted);
  const auto t1 = std::chrono::steady_clock::now();
  std::vector<std::vector<LabelId>> gold;
  gold.reserve(extracted.size());
  for (const auto& s : extracted.samples) gold.push_back(s.gold);
  auto r = score_predictions(*model.labels, gold, pred);
  r.decode_seconds = std::chrono::duration<double>(t1 - t0).count();
  return r;
}

double token_accuracy(const Model& model, const Dataset& extracted) {
  std::size_t total = 0, correct = 0;
  for (const auto& s : extracted.samples) {
    const auto pred = viterbi(model, s.features).labels;
    for (std::size_t k = 0; k < s.gold.size(); ++k) correct += pred[k] == s.gold[k];
    total += s.gold.size();
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

std::string eval_to_json(const EvalResult& r, bool with_timing) {
  nlohmann::ordered_json j;
  j["tokens"] = r.tokens;
  j["correct"] = r.correct;
  j["token_accuracy"] = r.token_accuracy;
  if (r.chunks) {
    j["chunk_precision"] = r.chunks->precision;
    j["chunk_recall"] = r.chunks->recall;
    j["chunk_f1"] = r.chunks->f1;
    j["gold_chunks"] = r.chunks->gold_chunks;
    j["predicted_chunks"] = r.chunks->predicted_chunks;
    j["correct_chunks"] = r.chunks->correct_chunks;
  }
  j["confusion"] = r.confusion;
  if (with_timing) j["decode_seconds"] = r.decode_seconds;
  return j.dump();
}

void print_eval_table(std::ostream& out, const EvalResult& r) {
  out << std::fixed << std::setprecision(4);
  out << "tokens          " << r.tokens << '\n';
  out << "token_accuracy  " << r.token_accuracy << '\n';
  if (r.chunks) {
    out << "chunk_precision " << r.chunks->precision << '\n';
    out << "chunk_recall    " << r.chunks->recall << '\n';
    out << "chunk_f1        " << r.chunks->f1 << '\n';
  }
  out << "decode_seconds  " << r.decode_seconds << '\n';
  out << "confusion (gold -> predicted: count)\n";
  for (const auto& [g, row] : r.confusion)
    for (const auto& [p, c] : row) out << "  " << g << " -> " << p << ": " << c << '\n';
  out.unsetf(std::ios::floatfield);
}

}  // namespace structreg
