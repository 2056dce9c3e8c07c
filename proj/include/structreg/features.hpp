#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "structreg/corpus.hpp"

namespace structreg {

/// One observation atom of a template: which column, which relative
/// position, and an optional transform of the string found there.
struct TemplateAtom {
  enum class Source { Word, Attribute };
  enum class Transform { Identity, Prefix, Suffix, Shape };

  Source source = Source::Word;
  std::size_t attribute = 0;
  int offset = 0;
  Transform transform = Transform::Identity;
  std::size_t length = 0;  // for Prefix/Suffix
};

struct NodeTemplate {
  enum class Kind { Conjunction, Bias, Numeric };
  Kind kind = Kind::Conjunction;
  std::vector<TemplateAtom> atoms;  // Numeric uses atoms[0]
  std::string name;                 // canonical text, e.g. "U:w[-1]|w[0]"
};

/// Parsed template configuration. Text form, one per line:
///   U:w[-1]   U:w[0]|w[1]   U:prefix3[0]   U:suffix2[0]   U:shape[0]
///   U:a0[0]   U:bias        N:a1[0]        E:rich
/// `#` starts a comment. `a<k>` is the k-th attribute column; `N:` reads the
/// column as a real value instead of conjoining strings.
struct TemplateSet {
  std::vector<NodeTemplate> node_templates;
  bool use_rich_edge = false;

  /// Largest |offset| over all atoms (the window radius).
  int window_radius() const noexcept;
  /// Canonical lines, parseable by parse_templates.
  std::vector<std::string> lines() const;
};

TemplateSet parse_templates(std::string_view text);
TemplateSet parse_template_lines(const std::vector<std::string>& lines);

/// w[-2..2] unigrams, adjacent bigrams, prefix/suffix up to 3, rich edges on.
TemplateSet default_templates();

/// Fills Sample::features for every sample. With freeze=false the feature
/// alphabet of ds (copied) grows in first-occurrence order; with freeze=true
/// it is used read-only and unseen feature strings are dropped.
Dataset extract(const Dataset& ds, const TemplateSet& templates, bool freeze);

/// Frozen extraction against an explicit feature alphabet (dev/test data).
Dataset extract_frozen(const Dataset& ds, const TemplateSet& templates,
                       AlphabetPtr features);

/// Feature strings for one position, before alphabet lookup.
std::vector<std::pair<std::string, double>> position_features(
    const std::vector<Token>& tokens, std::size_t k, const TemplateSet& templates);

/// Parameter index layout shared by both models:
///   [ node: d x |Y| | transition: |Y| x |Y| | edge: d x |Y| x |Y| (rich only) ]
/// node(f,y) = f|Y| + y;  trans(p,y) = d|Y| + p|Y| + y;
/// edge(f,p,y) = d|Y| + |Y|^2 + (f|Y| + p)|Y| + y.
class ParamLayout {
 public:
  enum class Block { Node, Transition, Edge };
  struct Coords {
    Block block;
    std::size_t feature;  // unused for Transition
    std::size_t prev;     // unused for Node
    std::size_t label;
    bool operator==(const Coords&) const = default;
  };

  ParamLayout() = default;
  /// Throws LayoutError when the total overflows std::size_t.
  ParamLayout(std::size_t num_features, std::size_t num_labels, bool rich_edges);

  std::size_t num_features() const noexcept { return d_; }
  std::size_t num_labels() const noexcept { return y_; }
  bool rich_edges() const noexcept { return rich_; }
  std::size_t total() const noexcept { return total_; }

  std::size_t node(std::size_t f, std::size_t y) const noexcept { return f * y_ + y; }
  std::size_t trans(std::size_t p, std::size_t y) const noexcept {
    return trans_base_ + p * y_ + y;
  }
  std::size_t edge(std::size_t f, std::size_t p, std::size_t y) const noexcept {
    return edge_base_ + (f * y_ + p) * y_ + y;
  }
  std::size_t edge_row(std::size_t f) const noexcept { return edge_base_ + f * y_ * y_; }

  Coords decode(std::size_t index) const;
  std::size_t encode(const Coords& c) const;

  bool operator==(const ParamLayout&) const = default;

 private:
  std::size_t d_ = 0, y_ = 0;
  bool rich_ = false;
  std::size_t trans_base_ = 0, edge_base_ = 0, total_ = 0;
};

}  // namespace structreg
