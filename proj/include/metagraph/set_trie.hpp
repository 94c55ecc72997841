#pragma once

// Set-trie and set-trie multimap over canonically ordered element handles,
// supporting subset and superset queries. This is the index that directs
// every metapath search and the dominance filters in the projections.
//
// Keys are traversed in the global interned-handle order, the same order
// ElementSet canonicalization uses. Edge-id sets reuse the structure as-is
// since they are also sorted integer sets. There is no delete operation;
// every algorithm here inserts and then queries.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "metagraph/core.hpp"

namespace metagraph {

template <typename Value>
class SetTrieMultiMap {
 public:
  using Key = std::vector<ElementId>;

  /// Appends `value` to the list stored under `key`. Values for one key
  /// preserve assignment order.
  void assign(std::span<const ElementId> key, Value value) {
    Node* n = descend(key);
    if (!n->terminal) {
      n->terminal = true;
      ++key_count_;
    }
    n->values.push_back(std::move(value));
  }
  void assign(const ElementSet& key, Value value) {
    assign(std::span<const ElementId>(key.members()), std::move(value));
  }

  /// Marks `key` present without attaching a value. Idempotent.
  void insert_key(std::span<const ElementId> key) {
    Node* n = descend(key);
    if (!n->terminal) {
      n->terminal = true;
      ++key_count_;
    }
  }

  bool contains(std::span<const ElementId> key) const {
    const Node* n = find(key);
    return n && n->terminal;
  }
  const std::vector<Value>* values(std::span<const ElementId> key) const {
    const Node* n = find(key);
    return n && n->terminal ? &n->values : nullptr;
  }

  std::size_t key_count() const { return key_count_; }

  /// Invokes fn(key, values) for every stored key that is a subset of
  /// `query`, in canonical (lexicographic) key order.
  template <typename Fn>
  void for_each_subset_of(std::span<const ElementId> query, Fn&& fn) const {
    Key prefix;
    walk_subsets(root_, query, 0, prefix, fn);
  }

  template <typename Fn>
  void for_each_superset_of(std::span<const ElementId> query, Fn&& fn) const {
    Key prefix;
    walk_supersets(root_, query, 0, prefix, fn);
  }

  std::vector<Key> subsets_of(std::span<const ElementId> query) const {
    std::vector<Key> out;
    for_each_subset_of(query, [&](const Key& k, const std::vector<Value>&) { out.push_back(k); });
    return out;
  }
  std::vector<Key> subsets_of(const ElementSet& query) const {
    return subsets_of(std::span<const ElementId>(query.members()));
  }

  std::vector<Key> supersets_of(std::span<const ElementId> query) const {
    std::vector<Key> out;
    for_each_superset_of(query, [&](const Key& k, const std::vector<Value>&) { out.push_back(k); });
    return out;
  }
  std::vector<Key> supersets_of(const ElementSet& query) const {
    return supersets_of(std::span<const ElementId>(query.members()));
  }

  /// All values attached to subset keys of `query`, grouped by key in
  /// canonical key order.
  std::vector<Value> values_for_subsets_of(std::span<const ElementId> query) const {
    std::vector<Value> out;
    for_each_subset_of(query, [&](const Key&, const std::vector<Value>& vs) {
      out.insert(out.end(), vs.begin(), vs.end());
    });
    return out;
  }
  std::vector<Value> values_for_subsets_of(const ElementSet& query) const {
    return values_for_subsets_of(std::span<const ElementId>(query.members()));
  }

  /// True iff some stored key k satisfies k ⊆ query.
  bool exists_subset_of(std::span<const ElementId> query) const {
    return probe_subset(root_, query, 0, false);
  }
  /// True iff some stored key k satisfies k ⊆ query and k ≠ query.
  bool exists_proper_subset_of(std::span<const ElementId> query) const {
    return probe_subset(root_, query, 0, true);
  }
  bool exists_subset_of(const ElementSet& q) const {
    return exists_subset_of(std::span<const ElementId>(q.members()));
  }
  bool exists_proper_subset_of(const ElementSet& q) const {
    return exists_proper_subset_of(std::span<const ElementId>(q.members()));
  }

 private:
  struct Node {
    std::map<ElementId, std::unique_ptr<Node>> children;  // strictly increasing handles
    bool terminal = false;
    std::vector<Value> values;
  };

  Node* descend(std::span<const ElementId> key) {
    Node* n = &root_;
    for (ElementId x : key) {
      auto& child = n->children[x];
      if (!child) child = std::make_unique<Node>();
      n = child.get();
    }
    return n;
  }
  const Node* find(std::span<const ElementId> key) const {
    const Node* n = &root_;
    for (ElementId x : key) {
      auto it = n->children.find(x);
      if (it == n->children.end()) return nullptr;
      n = it->second.get();
    }
    return n;
  }

  template <typename Fn>
  static void walk_subsets(const Node& n, std::span<const ElementId> query, std::size_t i,
                           Key& prefix, Fn& fn) {
    if (n.terminal) fn(prefix, n.values);
    if (i >= query.size()) return;
    // Children keyed by any remaining query element continue a subset.
    auto it = n.children.lower_bound(query[i]);
    std::size_t j = i;
    for (; it != n.children.end(); ++it) {
      while (j < query.size() && query[j] < it->first) ++j;
      if (j >= query.size()) break;
      if (query[j] != it->first) continue;
      prefix.push_back(it->first);
      walk_subsets(*it->second, query, j + 1, prefix, fn);
      prefix.pop_back();
    }
  }

  // A stored subset with fewer elements than the query is necessarily proper;
  // an equal-length subset can only be the query itself.
  static bool probe_subset(const Node& n, std::span<const ElementId> query, std::size_t i,
                           bool proper) {
    return probe_subset_impl(n, query, i, proper, 0);
  }
  static bool probe_subset_impl(const Node& n, std::span<const ElementId> query, std::size_t i,
                                bool proper, std::size_t depth) {
    if (n.terminal && (!proper || depth < query.size())) return true;
    if (i >= query.size()) return false;
    auto it = n.children.lower_bound(query[i]);
    std::size_t j = i;
    for (; it != n.children.end(); ++it) {
      while (j < query.size() && query[j] < it->first) ++j;
      if (j >= query.size()) break;
      if (query[j] != it->first) continue;
      if (probe_subset_impl(*it->second, query, j + 1, proper, depth + 1)) return true;
    }
    return false;
  }

  template <typename Fn>
  static void walk_supersets(const Node& n, std::span<const ElementId> query, std::size_t i,
                             Key& prefix, Fn& fn) {
    if (i >= query.size()) {
      // Everything below is a superset; report all terminals.
      if (n.terminal) fn(prefix, n.values);
      for (const auto& [x, child] : n.children) {
        prefix.push_back(x);
        walk_supersets(*child, query, i, prefix, fn);
        prefix.pop_back();
      }
      return;
    }
    // Children below the next needed element may appear freely; the child
    // equal to it consumes it.
    for (const auto& [x, child] : n.children) {
      if (x > query[i]) break;
      prefix.push_back(x);
      walk_supersets(*child, query, x == query[i] ? i + 1 : i, prefix, fn);
      prefix.pop_back();
    }
  }

  Node root_;
  std::size_t key_count_ = 0;
};

/// Key-only set-trie.
class SetTrie {
 public:
  void insert(std::span<const ElementId> key) { impl_.insert_key(key); }
  void insert(const ElementSet& key) { impl_.insert_key(std::span<const ElementId>(key.members())); }
  void insert(const std::vector<ElementId>& key) {
    impl_.insert_key(std::span<const ElementId>(key));
  }

  bool contains(std::span<const ElementId> key) const { return impl_.contains(key); }
  bool contains(const ElementSet& key) const {
    return impl_.contains(std::span<const ElementId>(key.members()));
  }

  std::size_t size() const { return impl_.key_count(); }

  std::vector<std::vector<ElementId>> subsets_of(std::span<const ElementId> q) const {
    return impl_.subsets_of(q);
  }
  std::vector<std::vector<ElementId>> subsets_of(const ElementSet& q) const {
    return impl_.subsets_of(q);
  }
  std::vector<std::vector<ElementId>> supersets_of(std::span<const ElementId> q) const {
    return impl_.supersets_of(q);
  }
  std::vector<std::vector<ElementId>> supersets_of(const ElementSet& q) const {
    return impl_.supersets_of(q);
  }

  bool exists_subset_of(std::span<const ElementId> q) const { return impl_.exists_subset_of(q); }
  bool exists_subset_of(const ElementSet& q) const { return impl_.exists_subset_of(q); }
  bool exists_subset_of(const std::vector<ElementId>& q) const {
    return impl_.exists_subset_of(std::span<const ElementId>(q));
  }
  bool exists_proper_subset_of(std::span<const ElementId> q) const {
    return impl_.exists_proper_subset_of(q);
  }
  bool exists_proper_subset_of(const ElementSet& q) const {
    return impl_.exists_proper_subset_of(q);
  }

 private:
  struct Unit {};
  SetTrieMultiMap<Unit> impl_;
};

}  // namespace metagraph
