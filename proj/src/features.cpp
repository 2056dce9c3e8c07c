#include "structreg/features.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

#include "structreg/errors.hpp"

namespace structreg {

namespace {

constexpr std::string_view kBos = "<BOS>";
constexpr std::string_view kEos = "<EOS>";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_size(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

TemplateAtom parse_atom(std::string_view text, std::string_view line) {
  auto fail = [&](const std::string& why) -> TemplateAtom {
    throw ConfigError("bad template '" + std::string(line) + "': " + why);
  };
  const auto open = text.find('[');
  if (open == std::string_view::npos || text.back() != ']') return fail("expected name[offset]");
  const auto head = text.substr(0, open);
  const auto off = text.substr(open + 1, text.size() - open - 2);
  TemplateAtom atom;
  {
    int v = 0;
    auto [p, ec] = std::from_chars(off.data(), off.data() + off.size(), v);
    if (ec != std::errc{} || p != off.data() + off.size() || off.empty())
      return fail("offset is not an integer");
    atom.offset = v;
  }
  std::size_t n = 0;
  if (head == "w") {
  } else if (head == "shape") {
    atom.transform = TemplateAtom::Transform::Shape;
  } else if (head.starts_with("prefix") && parse_size(head.substr(6), n) && n > 0) {
    atom.transform = TemplateAtom::Transform::Prefix;
    atom.length = n;
  } else if (head.starts_with("suffix") && parse_size(head.substr(6), n) && n > 0) {
    atom.transform = TemplateAtom::Transform::Suffix;
    atom.length = n;
  } else if (head.starts_with("a") && parse_size(head.substr(1), n)) {
    atom.source = TemplateAtom::Source::Attribute;
    atom.attribute = n;
  } else {
    return fail("unknown atom '" + std::string(head) + "'");
  }
  return atom;
}

// Byte offsets of UTF-8 code point starts.
std::vector<std::size_t> codepoint_starts(std::string_view s) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < s.size(); ++i)
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) starts.push_back(i);
  return starts;
}

std::string apply_transform(const TemplateAtom& atom, std::string_view s) {
  using T = TemplateAtom::Transform;
  switch (atom.transform) {
    case T::Identity:
      return std::string(s);
    case T::Prefix: {
      const auto starts = codepoint_starts(s);
      if (starts.size() <= atom.length) return std::string(s);
      return std::string(s.substr(0, starts[atom.length]));
    }
    case T::Suffix: {
      const auto starts = codepoint_starts(s);
      if (starts.size() <= atom.length) return std::string(s);
      return std::string(s.substr(starts[starts.size() - atom.length]));
    }
    case T::Shape: {
      std::string out;
      for (char c : s) {
        char m = c;
        if (c >= 'A' && c <= 'Z') m = 'A';
        else if (c >= 'a' && c <= 'z') m = 'a';
        else if (c >= '0' && c <= '9') m = '0';
        if (out.empty() || out.back() != m) out.push_back(m);
      }
      return out;
    }
  }
  return std::string(s);
}

// Observation for one atom; nullopt when the attribute column is missing.
std::optional<std::string> observe(const std::vector<Token>& tokens, std::size_t k,
                                   const TemplateAtom& atom) {
  const long pos = static_cast<long>(k) + atom.offset;
  if (pos < 0) return std::string(kBos);
  if (pos >= static_cast<long>(tokens.size())) return std::string(kEos);
  const auto& tok = tokens[static_cast<std::size_t>(pos)];
  if (atom.source == TemplateAtom::Source::Word) return apply_transform(atom, tok.surface);
  if (atom.attribute >= tok.attributes.size()) return std::nullopt;
  return apply_transform(atom, tok.attributes[atom.attribute]);
}

}  // namespace

int TemplateSet::window_radius() const noexcept {
  int r = 0;
  for (const auto& t : node_templates)
    for (const auto& a : t.atoms) r = std::max(r, std::abs(a.offset));
  return r;
}

std::vector<std::string> TemplateSet::lines() const {
  std::vector<std::string> out;
  for (const auto& t : node_templates) out.push_back(t.name);
  if (use_rich_edge) out.emplace_back("E:rich");
  return out;
}

TemplateSet parse_template_lines(const std::vector<std::string>& lines) {
  TemplateSet ts;
  std::set<std::string> seen;
  for (const auto& raw : lines) {
    auto line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    if (body == "E:rich") {
      ts.use_rich_edge = true;
      continue;
    }
    NodeTemplate t;
    t.name = std::string(body);
    if (!seen.insert(t.name).second) throw ConfigError("duplicate template '" + t.name + "'");
    if (body == "U:bias") {
      t.kind = NodeTemplate::Kind::Bias;
    } else if (body.starts_with("U:")) {
      auto rest = body.substr(2);
      while (true) {
        const auto bar = rest.find('|');
        t.atoms.push_back(parse_atom(trim(rest.substr(0, bar)), body));
        if (bar == std::string_view::npos) break;
        rest = rest.substr(bar + 1);
      }
    } else if (body.starts_with("N:")) {
      t.kind = NodeTemplate::Kind::Numeric;
      t.atoms.push_back(parse_atom(trim(body.substr(2)), body));
      if (t.atoms[0].transform != TemplateAtom::Transform::Identity)
        throw ConfigError("numeric template '" + t.name + "' cannot use a transform");
    } else {
      throw ConfigError("bad template '" + t.name + "': expected U:, N: or E:rich");
    }
    ts.node_templates.push_back(std::move(t));
  }
  return ts;
}

TemplateSet parse_templates(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return parse_template_lines(lines);
}

TemplateSet default_templates() {
  return parse_template_lines({
      "U:w[-2]", "U:w[-1]", "U:w[0]", "U:w[1]", "U:w[2]",
      "U:w[-1]|w[0]", "U:w[0]|w[1]",
      "U:prefix1[0]", "U:prefix2[0]", "U:prefix3[0]",
      "U:suffix1[0]", "U:suffix2[0]", "U:suffix3[0]",
      "E:rich",
  });
}

std::vector<std::pair<std::string, double>> position_features(
    const std::vector<Token>& tokens, std::size_t k, const TemplateSet& templates) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(templates.node_templates.size());
  for (const auto& t : templates.node_templates) {
    switch (t.kind) {
      case NodeTemplate::Kind::Bias:
        out.emplace_back(t.name, 1.0);
        break;
      case NodeTemplate::Kind::Numeric: {
        const auto v = observe(tokens, k, t.atoms[0]);
        if (!v || *v == kBos || *v == kEos) break;
        char* end = nullptr;
        const double x = std::strtod(v->c_str(), &end);
        if (end == v->c_str() || *end != '\0')
          throw DataError("template " + t.name + ": '" + *v + "' is not a number");
        if (x != 0.0) out.emplace_back(t.name, x);
        break;
      }
      case NodeTemplate::Kind::Conjunction: {
        std::string key = t.name;
        key.push_back('=');
        bool ok = true;
        for (std::size_t i = 0; i < t.atoms.size() && ok; ++i) {
          const auto v = observe(tokens, k, t.atoms[i]);
          if (!v) {
            ok = false;
            break;
          }
          if (i > 0) key.push_back(' ');
          key += *v;
        }
        if (ok) out.emplace_back(std::move(key), 1.0);
        break;
      }
    }
  }
  return out;
}

namespace {

template <class Lookup>
void fill_features(Dataset& out, const TemplateSet& templates, Lookup&& lookup) {
  for (auto& s : out.samples) {
    s.features.assign(s.tokens.size(), {});
    for (std::size_t k = 0; k < s.tokens.size(); ++k) {
      auto& fv = s.features[k];
      for (auto& [key, value] : position_features(s.tokens, k, templates))
        if (auto id = lookup(key)) fv.push_back(Feature{*id, value});
      std::sort(fv.begin(), fv.end(),
                [](const Feature& a, const Feature& b) { return a.id < b.id; });
      std::size_t w = 0;
      for (std::size_t r = 0; r < fv.size(); ++r) {
        if (w > 0 && fv[w - 1].id == fv[r].id) fv[w - 1].value += fv[r].value;
        else fv[w++] = fv[r];
      }
      fv.resize(w);
    }
  }
}

}  // namespace

Dataset extract(const Dataset& ds, const TemplateSet& templates, bool freeze) {
  if (freeze) return extract_frozen(ds, templates, ds.features);
  Dataset out = ds;
  auto alphabet = std::make_shared<Alphabet>(ds.features->entries());
  fill_features(out, templates, [&](const std::string& key) { return alphabet->intern(key); });
  out.features = alphabet;
  return out;
}

Dataset extract_frozen(const Dataset& ds, const TemplateSet& templates,
                       AlphabetPtr features) {
  Dataset out = ds;
  if (!features->frozen()) {
    auto copy = std::make_shared<Alphabet>(*features);
    copy->freeze();
    features = copy;
  }
  fill_features(out, templates, [&](const std::string& key) { return features->find(key); });
  out.features = std::move(features);
  return out;
}

ParamLayout::ParamLayout(std::size_t num_features, std::size_t num_labels, bool rich_edges)
    : d_(num_features), y_(num_labels), rich_(rich_edges) {
  std::size_t node = 0, trans = 0, edge = 0;
  bool overflow = __builtin_mul_overflow(d_, y_, &node) ||
                  __builtin_mul_overflow(y_, y_, &trans);
  if (!overflow && rich_) overflow = __builtin_mul_overflow(node, y_, &edge);
  if (!overflow) overflow = __builtin_add_overflow(node, trans, &edge_base_);
  if (!overflow) overflow = __builtin_add_overflow(edge_base_, edge, &total_);
  if (overflow)
    throw LayoutError("parameter layout overflows: d=" + std::to_string(d_) +
                      " labels=" + std::to_string(y_));
  trans_base_ = node;
}

ParamLayout::Coords ParamLayout::decode(std::size_t index) const {
  if (index >= total_) throw LayoutError("parameter index out of range");
  if (index < trans_base_) return {Block::Node, index / y_, 0, index % y_};
  if (index < edge_base_) {
    const auto r = index - trans_base_;
    return {Block::Transition, 0, r / y_, r % y_};
  }
  const auto r = index - edge_base_;
  return {Block::Edge, r / (y_ * y_), (r / y_) % y_, r % y_};
}

std::size_t ParamLayout::encode(const Coords& c) const {
  if (c.label >= y_) throw LayoutError("label out of range");
  switch (c.block) {
    case Block::Node:
      if (c.feature >= d_) throw LayoutError("feature out of range");
      return node(c.feature, c.label);
    case Block::Transition:
      if (c.prev >= y_) throw LayoutError("label out of range");
      return trans(c.prev, c.label);
    case Block::Edge:
      if (!rich_) throw LayoutError("layout has no edge block");
      if (c.feature >= d_ || c.prev >= y_) throw LayoutError("coordinate out of range");
      return edge(c.feature, c.prev, c.label);
  }
  throw LayoutError("bad block");
}

}  // namespace structreg
