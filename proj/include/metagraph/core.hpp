#pragma once

// Core domain types for directed metagraphs / hypergraphs: interned elements,
// canonical element sets, set-to-set edges, and metapath predicates.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metagraph {

using ElementId = std::uint32_t;
using EdgeId = std::uint32_t;

enum class Errc {
  element_not_in_generating_set,
  duplicate_element,
  duplicate_edge,
  invalid_edge_id,
  unknown_element,
  unknown_combined_edge,
  empty_path,
  subset_not_in_generating_set,
  budget_exceeded,
  invalid_n,
  invalid_params,
  syntax_error,
  semantic_error,
  version_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::element_not_in_generating_set: return "ElementNotInGeneratingSet";
    case Errc::duplicate_element: return "DuplicateElement";
    case Errc::duplicate_edge: return "DuplicateEdge";
    case Errc::invalid_edge_id: return "InvalidEdgeId";
    case Errc::unknown_element: return "UnknownElement";
    case Errc::unknown_combined_edge: return "UnknownCombinedEdge";
    case Errc::empty_path: return "EmptyPath";
    case Errc::subset_not_in_generating_set: return "SubsetNotInGeneratingSet";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::invalid_n: return "InvalidN";
    case Errc::invalid_params: return "InvalidParams";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::semantic_error: return "SemanticError";
    case Errc::version_error: return "VersionError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

/// Canonically ordered set of interned element handles. The order is the
/// interning order of the owning Metagraph, so equal sets compare and
/// serialize identically.
class ElementSet {
 public:
  ElementSet() = default;
  explicit ElementSet(std::vector<ElementId> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }
  ElementSet(std::initializer_list<ElementId> members)
      : ElementSet(std::vector<ElementId>(members)) {}

  bool contains(ElementId x) const {
    return std::binary_search(members_.begin(), members_.end(), x);
  }
  bool subset_of(const ElementSet& other) const {
    return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                         members_.end());
  }
  bool intersects(const ElementSet& other) const {
    auto a = members_.begin();
    auto b = other.members_.begin();
    while (a != members_.end() && b != other.members_.end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        return true;
      }
    }
    return false;
  }

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<ElementId>& members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const ElementSet&, const ElementSet&) = default;
  friend auto operator<=>(const ElementSet& a, const ElementSet& b) {
    return a.members_ <=> b.members_;
  }

 private:
  std::vector<ElementId> members_;
};

inline ElementSet set_union(const ElementSet& a, const ElementSet& b) {
  std::vector<ElementId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return ElementSet(std::move(out));
}

inline ElementSet set_difference(const ElementSet& a, const ElementSet& b) {
  std::vector<ElementId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return ElementSet(std::move(out));
}

inline ElementSet set_intersection(const ElementSet& a, const ElementSet& b) {
  std::vector<ElementId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return ElementSet(std::move(out));
}

/// Directed set-to-set mapping. Either side may be empty.
struct Edge {
  ElementSet invertex;
  ElementSet outvertex;
  EdgeId id = 0;
};

namespace detail {

// Fixed-width bitset over the element universe of one Metagraph. Used by the
// search and oracle code where unions and subset tests dominate the runtime.
class ElementBits {
 public:
  ElementBits() = default;
  explicit ElementBits(std::size_t universe) : words_((universe + 63) / 64, 0) {}

  static ElementBits of(const ElementSet& s, std::size_t universe) {
    ElementBits b(universe);
    for (ElementId x : s) b.set(x);
    return b;
  }

  void set(ElementId x) { words_[x >> 6] |= std::uint64_t{1} << (x & 63); }
  bool test(ElementId x) const {
    return (words_[x >> 6] >> (x & 63)) & 1;
  }

  ElementBits& operator|=(const ElementBits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  ElementBits& subtract(const ElementBits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }

  bool subset_of(const ElementBits& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }
  bool intersects(const ElementBits& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }
  bool none() const {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  friend ElementBits operator|(ElementBits a, const ElementBits& b) { return a |= b; }
  friend ElementBits operator&(const ElementBits& a, const ElementBits& b) {
    ElementBits r = a;
    for (std::size_t i = 0; i < r.words_.size(); ++i) r.words_[i] &= b.words_[i];
    return r;
  }
  friend bool operator==(const ElementBits&, const ElementBits&) = default;

  std::vector<ElementId> to_vector() const {
    std::vector<ElementId> v;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        unsigned bit = static_cast<unsigned>(std::countr_zero(w));
        v.push_back(static_cast<ElementId>(i * 64 + bit));
        w &= w - 1;
      }
    }
    return v;
  }
  ElementSet to_element_set() const { return ElementSet(to_vector()); }

 private:
  std::vector<std::uint64_t> words_;
};

}  // namespace detail

/// Immutable metagraph: a generating set of interned elements plus an indexed
/// edge list. Edge ids are 0..|E|-1 and stable; every core type is safe to
/// share across threads after construction.
class Metagraph {
 public:
  using NamedEdge = std::pair<std::vector<std::string>, std::vector<std::string>>;

  static Metagraph create(const std::vector<std::string>& elements,
                          const std::vector<NamedEdge>& edges,
                          std::vector<std::string> edge_labels = {}) {
    Metagraph g;
    for (const auto& name : elements) {
      auto [it, inserted] = g.index_.emplace(name, static_cast<ElementId>(g.names_.size()));
      if (!inserted) fail(Errc::duplicate_element, "'" + name + "' declared twice");
      g.names_.push_back(name);
    }
    std::vector<ElementId> all(g.names_.size());
    for (ElementId i = 0; i < all.size(); ++i) all[i] = i;
    g.generating_set_ = ElementSet(std::move(all));

    if (!edge_labels.empty() && edge_labels.size() != edges.size())
      fail(Errc::invalid_params, "edge label count does not match edge count");
    std::map<std::pair<ElementSet, ElementSet>, std::size_t> seen;
    std::map<std::string, std::size_t> seen_labels;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      Edge e;
      e.invertex = g.elements(edges[i].first);
      e.outvertex = g.elements(edges[i].second);
      e.id = static_cast<EdgeId>(i);
      if (!seen.emplace(std::make_pair(e.invertex, e.outvertex), i).second)
        fail(Errc::duplicate_edge, "edge " + std::to_string(i) + " repeats an earlier edge");
      std::string label =
          edge_labels.empty() ? "e" + std::to_string(i + 1) : std::move(edge_labels[i]);
      if (!seen_labels.emplace(label, i).second)
        fail(Errc::duplicate_edge, "edge label '" + label + "' used twice");
      g.labels_.push_back(std::move(label));
      g.edges_.push_back(std::move(e));
    }
    return g;
  }

  std::size_t element_count() const { return names_.size(); }
  const std::vector<std::string>& element_names() const { return names_; }

  ElementId element(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail(Errc::unknown_element, "'" + std::string(name) + "'");
    return it->second;
  }
  bool has_element(std::string_view name) const { return index_.find(name) != index_.end(); }
  const std::string& name(ElementId id) const {
    if (id >= names_.size()) fail(Errc::unknown_element, "handle " + std::to_string(id));
    return names_[id];
  }

  ElementSet elements(const std::vector<std::string>& names) const {
    std::vector<ElementId> ids;
    ids.reserve(names.size());
    for (const auto& n : names) {
      auto it = index_.find(n);
      if (it == index_.end())
        fail(Errc::element_not_in_generating_set, "'" + n + "' is not in the generating set");
      ids.push_back(it->second);
    }
    return ElementSet(std::move(ids));
  }
  std::vector<std::string> names_of(const ElementSet& s) const {
    std::vector<std::string> out;
    out.reserve(s.size());
    for (ElementId x : s) out.push_back(name(x));
    return out;
  }

  const ElementSet& generating_set() const { return generating_set_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const Edge& edge(EdgeId id) const {
    if (id >= edges_.size()) fail(Errc::invalid_edge_id, std::to_string(id));
    return edges_[id];
  }
  const std::string& edge_label(EdgeId id) const {
    if (id >= labels_.size()) fail(Errc::invalid_edge_id, std::to_string(id));
    return labels_[id];
  }
  const std::vector<std::string>& edge_labels() const { return labels_; }
  EdgeId edge_by_label(std::string_view label) const {
    for (EdgeId i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return i;
    fail(Errc::invalid_edge_id, "no edge labelled '" + std::string(label) + "'");
  }

  friend bool operator==(const Metagraph& a, const Metagraph& b) {
    if (a.names_ != b.names_ || a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t i = 0; i < a.edges_.size(); ++i) {
      if (a.edges_[i].invertex != b.edges_[i].invertex ||
          a.edges_[i].outvertex != b.edges_[i].outvertex || a.labels_[i] != b.labels_[i])
        return false;
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::map<std::string, ElementId, std::less<>> index_;
  ElementSet generating_set_;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
};

/// An (unordered) set of edge indices with its source and target context.
struct Metapath {
  std::vector<EdgeId> edge_ids;  // sorted ascending
  ElementSet source;
  ElementSet target;

  friend bool operator==(const Metapath&, const Metapath&) = default;
  friend auto operator<=>(const Metapath& a, const Metapath& b) {
    if (auto c = a.source <=> b.source; c != 0) return c;
    if (auto c = a.edge_ids <=> b.edge_ids; c != 0) return c;
    return a.target <=> b.target;
  }
};

inline void validate_edge_ids(const Metagraph& mg, std::span<const EdgeId> edge_ids) {
  for (EdgeId id : edge_ids)
    if (id >= mg.edge_count()) fail(Errc::invalid_edge_id, std::to_string(id));
}

struct MetapathAccounting {
  ElementSet all_inputs;
  ElementSet all_outputs;
  ElementSet pure_inputs;
  ElementSet pure_outputs;
};

inline MetapathAccounting metapath_accounting(const Metagraph& mg,
                                              std::span<const EdgeId> edge_ids) {
  validate_edge_ids(mg, edge_ids);
  MetapathAccounting acc;
  for (EdgeId id : edge_ids) {
    acc.all_inputs = set_union(acc.all_inputs, mg.edge(id).invertex);
    acc.all_outputs = set_union(acc.all_outputs, mg.edge(id).outvertex);
  }
  acc.pure_inputs = set_difference(acc.all_inputs, acc.all_outputs);
  acc.pure_outputs = set_difference(acc.all_outputs, acc.all_inputs);
  return acc;
}

/// Metapath test per the set-based definition: the pure inputs of the edge set
/// lie within the source and the target lies within the union of outvertices.
/// The simple-path clause is deliberately not part of this predicate.
inline bool is_metapath(const Metagraph& mg, std::span<const EdgeId> edge_ids,
                        const ElementSet& source, const ElementSet& target) {
  auto acc = metapath_accounting(mg, edge_ids);
  return acc.pure_inputs.subset_of(source) && target.subset_of(acc.all_outputs);
}

}  // namespace metagraph
