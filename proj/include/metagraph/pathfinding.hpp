#pragma once

// Metapath search over a frozen Metagraph: single-path lookup, superpath
// search-space reduction, breadth-first enumeration of inclusion-minimal
// metapaths with edge combining, and combined-edge expansion.
//
// Enumeration semantics: a yielded edge set S satisfies is_metapath(S, source,
// target) and no proper subset of S does. Target elements that also appear in
// the source still have to be produced by some edge; only the degenerate case
// target ⊆ source is treated as trivially connected and yields nothing.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "metagraph/core.hpp"
#include "metagraph/set_trie.hpp"

namespace metagraph {

struct PathSearchOptions {
  bool combine_edges = true;
};

struct SingleMetapathResult {
  std::vector<EdgeId> edges;         // execution order where one exists
  bool trivially_connected = false;  // target ⊆ source, no edges required
  bool found() const { return trivially_connected || !edges.empty(); }
};

namespace detail {

inline void require_subset_of_generating_set(const Metagraph& mg, const ElementSet& s) {
  if (!s.subset_of(mg.generating_set()))
    fail(Errc::unknown_element, "set contains handles outside the generating set");
}

// Elements whose production can matter for a (source, target) query: target
// elements always, plus everything outside the source. An edge whose entire
// outvertex misses this universe cannot occur in any inclusion-minimal
// metapath, because removing it keeps the remainder valid.
inline ElementBits useful_universe(const Metagraph& mg, const ElementBits& source_bits,
                                   const ElementBits& target_bits) {
  ElementBits u(mg.element_count());
  for (ElementId x : mg.generating_set())
    if (!source_bits.test(x)) u.set(x);
  return u | target_bits;
}

// True iff the element digraph (z -> w when some pool edge consumes z and
// produces w) has a cycle. Self-sustaining edge groups exist only then, so
// the various closed-group fallbacks can be skipped on acyclic graphs.
inline bool has_supply_cycle(const Metagraph& mg, std::span<const EdgeId> pool) {
  const std::size_t n = mg.element_count();
  std::vector<std::vector<ElementId>> adj(n);
  for (EdgeId i : pool) {
    const Edge& e = mg.edge(i);
    for (ElementId z : e.invertex) {
      if (e.outvertex.contains(z)) return true;
      for (ElementId w : e.outvertex) adj[z].push_back(w);
    }
  }
  // Iterative three-color DFS.
  std::vector<char> color(n, 0);
  std::vector<std::pair<ElementId, std::size_t>> stack;
  for (ElementId start = 0; start < n; ++start) {
    if (color[start]) continue;
    stack.emplace_back(start, 0);
    color[start] = 1;
    while (!stack.empty()) {
      auto& [v, idx] = stack.back();
      if (idx < adj[v].size()) {
        ElementId w = adj[v][idx++];
        if (color[w] == 1) return true;
        if (color[w] == 0) {
          color[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

}  // namespace detail

/// Finds one metapath from `source` to `target`, or reports that none exists.
/// Forward pass: greedily activate edges whose invertices are covered by the
/// source plus previously produced elements, falling back to closed groups of
/// mutually sustaining edges when simple activation stalls. Backward pass:
/// walk the accumulated path in reverse, keeping edges whose outvertices are
/// still required, then drop any remaining single-edge redundancy.
inline SingleMetapathResult get_single_metapath(const Metagraph& mg, const ElementSet& source,
                                                const ElementSet& target) {
  detail::require_subset_of_generating_set(mg, source);
  detail::require_subset_of_generating_set(mg, target);
  if (target.subset_of(source)) return {.edges = {}, .trivially_connected = true};

  const std::size_t n = mg.element_count();
  const std::size_t m = mg.edge_count();
  auto source_bits = detail::ElementBits::of(source, n);
  auto target_bits = detail::ElementBits::of(target, n);
  auto useful = detail::useful_universe(mg, source_bits, target_bits);

  std::vector<detail::ElementBits> inv(m), out(m);
  for (EdgeId i = 0; i < m; ++i) {
    inv[i] = detail::ElementBits::of(mg.edge(i).invertex, n);
    out[i] = detail::ElementBits::of(mg.edge(i).outvertex, n);
  }

  SetTrieMultiMap<EdgeId> index;
  for (EdgeId i = 0; i < m; ++i) index.assign(mg.edge(i).invertex, i);

  std::vector<EdgeId> path;
  std::vector<char> in_path(m, 0);
  detail::ElementBits value = source_bits;
  detail::ElementBits covered(n);

  auto try_round = [&]() {
    bool updated = false;
    for (EdgeId i : index.values_for_subsets_of(value.to_element_set())) {
      if (in_path[i]) continue;
      if ((out[i] & useful).subset_of(covered)) continue;  // adds nothing useful
      in_path[i] = 1;
      path.push_back(i);
      value |= out[i];
      covered |= out[i];
      updated = true;
      if (target_bits.subset_of(covered)) return updated;
    }
    return updated;
  };

  while (!target_bits.subset_of(covered)) {
    if (try_round()) continue;
    // Stalled: admit a maximal group of edges that sustain each other's
    // inputs given the current value (covers cyclic support).
    std::vector<EdgeId> group;
    for (EdgeId i = 0; i < m; ++i)
      if (!in_path[i] && !(out[i] & useful).subset_of(covered)) group.push_back(i);
    for (bool shrunk = true; shrunk;) {
      shrunk = false;
      detail::ElementBits avail = value;
      for (EdgeId i : group) avail |= out[i];
      std::vector<EdgeId> kept;
      for (EdgeId i : group) {
        if (inv[i].subset_of(avail))
          kept.push_back(i);
        else
          shrunk = true;
      }
      group.swap(kept);
    }
    if (group.empty()) break;
    for (EdgeId i : group) {
      in_path[i] = 1;
      path.push_back(i);
      value |= out[i];
      covered |= out[i];
    }
  }
  if (!target_bits.subset_of(covered)) return {};

  // Single reverse sweep per the basic scheme.
  auto backward_once = [&]() {
    std::vector<EdgeId> kept;
    detail::ElementBits required = target_bits;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      EdgeId i = *it;
      if (out[i].intersects(required)) {
        kept.push_back(i);
        required.subtract(out[i]);
        required |= inv[i];
      }
    }
    std::reverse(kept.begin(), kept.end());
    return kept;
  };
  // Fixpoint variant for paths with cyclic support, where one sweep can
  // discard a producer that is only demanded later in the scan.
  auto backward_fixpoint = [&]() {
    std::vector<EdgeId> kept;
    std::vector<char> in_kept(m, 0);
    detail::ElementBits required = target_bits;
    for (bool updated = true; updated;) {
      updated = false;
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        EdgeId i = *it;
        if (in_kept[i]) continue;
        if (out[i].intersects(required)) {
          in_kept[i] = 1;
          kept.push_back(i);
          required |= inv[i];
          updated = true;
        }
      }
    }
    std::sort(kept.begin(), kept.end());
    return kept;
  };

  std::vector<EdgeId> result = backward_once();
  if (!is_metapath(mg, result, source, target)) result = backward_fixpoint();
  if (!is_metapath(mg, result, source, target)) result = path;

  // Drop single-edge redundancy; the basic reverse sweep can retain an edge
  // that a different scan order would have skipped.
  for (bool removed = true; removed;) {
    removed = false;
    for (std::size_t k = result.size(); k-- > 0;) {
      std::vector<EdgeId> without = result;
      without.erase(without.begin() + static_cast<std::ptrdiff_t>(k));
      if (is_metapath(mg, without, source, target)) {
        result = std::move(without);
        removed = true;
        break;
      }
    }
  }

  // Best-effort constructive reorder (always succeeds without cyclic support).
  std::vector<EdgeId> ordered;
  {
    std::vector<char> used(m, 0);
    detail::ElementBits bag = source_bits;
    for (bool updated = true; updated && ordered.size() < result.size();) {
      updated = false;
      for (EdgeId i : result) {
        if (used[i] || !inv[i].subset_of(bag)) continue;
        used[i] = 1;
        ordered.push_back(i);
        bag |= out[i];
        updated = true;
      }
    }
    if (ordered.size() < result.size())
      for (EdgeId i : result)
        if (!used[i]) ordered.push_back(i);
  }
  return {.edges = std::move(ordered), .trivially_connected = false};
}

/// All edges that can lie on some metapath between `source` and `target`.
/// Forward: the greatest set of edges whose invertices are self-consistently
/// covered by the source and the set's own outputs, restricted to edges that
/// produce something useful. Backward: fixpoint of "outvertex intersects the
/// growing required set" seeded from the target. Result is sorted ascending.
inline std::vector<EdgeId> get_superpath(const Metagraph& mg, const ElementSet& source,
                                         const ElementSet& target) {
  detail::require_subset_of_generating_set(mg, source);
  detail::require_subset_of_generating_set(mg, target);

  const std::size_t n = mg.element_count();
  const std::size_t m = mg.edge_count();
  auto source_bits = detail::ElementBits::of(source, n);
  auto target_bits = detail::ElementBits::of(target, n);
  auto useful = detail::useful_universe(mg, source_bits, target_bits);

  // Candidates: edges producing something useful.
  std::vector<EdgeId> candidates;
  for (EdgeId i = 0; i < m; ++i)
    if (detail::ElementBits::of(mg.edge(i).outvertex, n).intersects(useful))
      candidates.push_back(i);

  // Forward pass: activation worklist over invertex coverage; on a stall,
  // admit the greatest mutually sustaining group (cyclic pools only).
  std::vector<std::vector<std::size_t>> consumers(n);
  std::vector<int> missing(candidates.size(), 0);
  std::vector<char> have(n, 0), active(candidates.size(), 0);
  for (ElementId z : source) have[z] = 1;
  std::vector<std::size_t> work;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    for (ElementId z : mg.edge(candidates[k]).invertex) {
      if (!have[z]) {
        ++missing[k];
        consumers[z].push_back(k);
      }
    }
    if (missing[k] == 0) work.push_back(k);
  }
  const bool cyclic = detail::has_supply_cycle(mg, candidates);
  auto produce = [&](std::size_t k) {
    active[k] = 1;
    for (ElementId z : mg.edge(candidates[k]).outvertex) {
      if (have[z]) continue;
      have[z] = 1;
      for (std::size_t c : consumers[z])
        if (!active[c] && --missing[c] == 0) work.push_back(c);
    }
  };
  while (true) {
    while (!work.empty()) {
      std::size_t k = work.back();
      work.pop_back();
      if (!active[k]) produce(k);
    }
    if (!cyclic) break;
    std::vector<std::size_t> group;
    for (std::size_t k = 0; k < candidates.size(); ++k)
      if (!active[k]) group.push_back(k);
    for (bool shrunk = true; shrunk && !group.empty();) {
      shrunk = false;
      std::vector<char> avail = have;
      for (std::size_t k : group)
        for (ElementId z : mg.edge(candidates[k]).outvertex) avail[z] = 1;
      std::vector<std::size_t> keep;
      for (std::size_t k : group) {
        bool ok = true;
        for (ElementId z : mg.edge(candidates[k]).invertex)
          if (!avail[z]) {
            ok = false;
            break;
          }
        if (ok)
          keep.push_back(k);
        else
          shrunk = true;
      }
      group.swap(keep);
    }
    if (group.empty()) break;
    for (std::size_t k : group) produce(k);
  }

  std::vector<EdgeId> forward;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (active[k]) forward.push_back(candidates[k]);

  // Backward pass: keep edges whose outvertex intersects the growing
  // required set, seeded from the target; requirement propagation by
  // element worklist.
  std::vector<std::vector<EdgeId>> producers(n);
  for (EdgeId i : forward)
    for (ElementId z : mg.edge(i).outvertex) producers[z].push_back(i);
  std::vector<char> required(n, 0), in_kept(m, 0);
  std::vector<ElementId> elem_work;
  for (ElementId z : target) {
    required[z] = 1;
    elem_work.push_back(z);
  }
  std::vector<EdgeId> kept;
  while (!elem_work.empty()) {
    ElementId z = elem_work.back();
    elem_work.pop_back();
    for (EdgeId i : producers[z]) {
      if (in_kept[i]) continue;
      in_kept[i] = 1;
      kept.push_back(i);
      for (ElementId w : mg.edge(i).invertex) {
        if (!required[w]) {
          required[w] = 1;
          elem_work.push_back(w);
        }
      }
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Search plan over an extended edge list: original edges plus synthetic
/// edges combining same-invertex groups whose outputs all have a single
/// incoming edge. Synthetic ids start at `original_count`.
struct CombinedEdgePlan {
  std::vector<Edge> extended_edges;                      // E0 copy + synthetic edges
  std::vector<EdgeId> search_edges;                      // indexed (searchable) ids, ascending
  SetTrieMultiMap<EdgeId> index;                         // invertex -> searchable edge id
  std::map<EdgeId, std::vector<EdgeId>> replacement_map; // synthetic id -> replaced ids
  std::size_t original_count = 0;
};

/// Builds the combined-edge plan for the given (already reduced) search
/// edges. Only edges sharing an invertex are combined, and only when every
/// element of their outvertices has exactly one incoming edge in the whole
/// graph, so no path through the originals becomes unreachable.
inline CombinedEdgePlan build_combined_edge_plan(const Metagraph& mg,
                                                 std::span<const EdgeId> superpath_edges,
                                                 bool combine = true) {
  validate_edge_ids(mg, superpath_edges);
  CombinedEdgePlan plan;
  plan.extended_edges = mg.edges();
  plan.original_count = mg.edge_count();

  // Elements with more than one incoming edge anywhere in the graph.
  std::map<ElementId, int> incoming;
  for (const Edge& e : mg.edges())
    for (ElementId x : e.outvertex) ++incoming[x];
  auto multiply_fed = [&](const ElementSet& s) {
    for (ElementId x : s)
      if (incoming[x] > 1) return true;
    return false;
  };

  std::map<ElementSet, std::vector<EdgeId>> groups;
  for (EdgeId i : superpath_edges) groups[mg.edge(i).invertex].push_back(i);

  auto add_searchable = [&](const ElementSet& invertex, EdgeId id) {
    plan.index.assign(invertex, id);
    plan.search_edges.push_back(id);
  };

  for (auto& [invertex, members] : groups) {
    std::sort(members.begin(), members.end());
    std::vector<EdgeId> eligible, rest;
    for (EdgeId i : members)
      (combine && !multiply_fed(mg.edge(i).outvertex) ? eligible : rest).push_back(i);
    if (members.size() < 2 || eligible.size() < 2) {
      for (EdgeId i : members) add_searchable(invertex, i);
      continue;
    }
    for (EdgeId i : rest) add_searchable(invertex, i);
    ElementSet merged;
    for (EdgeId i : eligible) merged = set_union(merged, mg.edge(i).outvertex);
    EdgeId synthetic = static_cast<EdgeId>(plan.extended_edges.size());
    plan.extended_edges.push_back(Edge{invertex, merged, synthetic});
    plan.replacement_map.emplace(synthetic, eligible);
    add_searchable(invertex, synthetic);
  }
  std::sort(plan.search_edges.begin(), plan.search_edges.end());
  return plan;
}

/// Replaces synthetic ids in `path` by the subset of their replaced edges
/// whose outvertex intersects the path's invertices or the target; original
/// ids pass through. Result is sorted ascending over original edge ids.
inline std::vector<EdgeId> expand_metapath(const CombinedEdgePlan& plan,
                                           std::span<const EdgeId> path,
                                           const ElementSet& target) {
  ElementSet inputs;
  for (EdgeId i : path) {
    if (i >= plan.extended_edges.size())
      fail(Errc::unknown_combined_edge, std::to_string(i));
    inputs = set_union(inputs, plan.extended_edges[i].invertex);
  }
  ElementSet wanted = set_union(inputs, target);

  std::vector<EdgeId> result;
  for (EdgeId i : path) {
    if (i < plan.original_count) {
      result.push_back(i);
      continue;
    }
    auto it = plan.replacement_map.find(i);
    if (it == plan.replacement_map.end())
      fail(Errc::unknown_combined_edge, std::to_string(i));
    for (EdgeId j : it->second)
      if (plan.extended_edges[j].outvertex.intersects(wanted)) result.push_back(j);
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

/// Lazy breadth-first enumeration of the inclusion-minimal metapaths from
/// `source` to `target`, expanded to original edge ids. The first yield has
/// the least possible number of edges, levels are explored in ascending edge
/// count, and within a level paths are visited in lexicographic order of
/// their canonical edge-id tuples. Only the current frontier and the tries of
/// already-yielded sets are retained, so consumers may stop early.
class MetapathStream {
 public:
  MetapathStream(const Metagraph& mg, ElementSet source, ElementSet target,
                 PathSearchOptions options = {})
      : mg_(&mg), source_(std::move(source)), target_(std::move(target)) {
    detail::require_subset_of_generating_set(mg, source_);
    detail::require_subset_of_generating_set(mg, target_);
    if (target_.subset_of(source_)) {
      trivial_ = true;
      done_ = true;
      return;
    }
    const std::size_t n = mg.element_count();
    source_bits_ = detail::ElementBits::of(source_, n);
    target_bits_ = detail::ElementBits::of(target_, n);
    useful_ = detail::useful_universe(mg, source_bits_, target_bits_);

    auto superpath = get_superpath(mg, source_, target_);
    plan_ = build_combined_edge_plan(mg, superpath, options.combine_edges);
    for (const Edge& e : plan_.extended_edges) {
      inv_.push_back(detail::ElementBits::of(e.invertex, n));
      out_.push_back(detail::ElementBits::of(e.outvertex, n));
    }
    detect_cyclic_support();
    levels_[0][{}] = detail::ElementBits(n);
  }

  bool trivially_connected() const { return trivial_; }

  /// Next minimal metapath (over original edge ids), or nullopt when the
  /// search space is exhausted.
  std::optional<std::vector<EdgeId>> next() {
    while (!done_) {
      auto lvl = levels_.begin();
      if (lvl == levels_.end()) {
        done_ = true;
        break;
      }
      if (lvl->second.empty()) {
        levels_.erase(lvl);
        continue;
      }
      auto entry = lvl->second.begin();
      std::vector<EdgeId> path = entry->first;
      detail::ElementBits covered = entry->second;
      lvl->second.erase(entry);

      if (target_bits_.subset_of(covered)) {
        if (found_.exists_subset_of(path)) continue;
        found_.insert(path);
        auto expanded = expand_for_yield(path);
        if (found_expanded_.exists_subset_of(expanded)) continue;
        found_expanded_.insert(expanded);
        return expanded;
      }
      extend(path, covered);
    }
    return std::nullopt;
  }

  /// Collects up to `limit` yields (0 = no limit).
  std::vector<std::vector<EdgeId>> collect(std::size_t limit = 0) {
    std::vector<std::vector<EdgeId>> out;
    while (auto p = next()) {
      out.push_back(std::move(*p));
      if (limit && out.size() == limit) break;
    }
    return out;
  }

 private:
  void extend(const std::vector<EdgeId>& path, const detail::ElementBits& covered) {
    detail::ElementBits value = source_bits_ | covered;
    auto schedule = [&](std::vector<EdgeId> next_path, detail::ElementBits next_covered) {
      if (found_.exists_subset_of(next_path)) return;  // can only repeat a yield
      std::size_t level = next_path.size();
      levels_[level].emplace(std::move(next_path), std::move(next_covered));
    };

    for (EdgeId i : plan_.index.values_for_subsets_of(value.to_element_set())) {
      if (std::binary_search(path.begin(), path.end(), i)) continue;
      if ((out_[i] & useful_).subset_of(covered)) continue;  // no new useful output
      std::vector<EdgeId> q = path;
      q.insert(std::upper_bound(q.begin(), q.end(), i), i);
      schedule(std::move(q), covered | out_[i]);
    }

    if (!cycle_ids_.empty()) {
      for (const auto& group : minimal_closed_groups(path, value)) {
        detail::ElementBits produced = covered;
        std::vector<EdgeId> q = path;
        for (EdgeId i : group) {
          q.insert(std::upper_bound(q.begin(), q.end(), i), i);
          produced |= out_[i];
        }
        if ((produced & useful_).subset_of(covered)) continue;
        schedule(std::move(q), std::move(produced));
      }
    }
  }

  // Self-sustaining groups: non-activatable searchable edges lying on a cycle
  // of the supply digraph, admitted as a whole once their combined outputs
  // cover their own residual demands. Minimal groups only, so breadth-first
  // level order still yields subsets before supersets.
  void detect_cyclic_support() {
    {
      // Synthetic edges merge same-invertex originals, so cycles through them
      // exist iff the underlying originals already form one.
      std::vector<EdgeId> originals;
      for (EdgeId i : plan_.search_edges)
        if (i < plan_.original_count) originals.push_back(i);
      for (const auto& [synthetic, members] : plan_.replacement_map)
        originals.insert(originals.end(), members.begin(), members.end());
      if (!detail::has_supply_cycle(*mg_, originals)) return;
    }
    const auto& ids = plan_.search_edges;
    std::map<EdgeId, std::size_t> pos;
    for (std::size_t k = 0; k < ids.size(); ++k) pos[ids[k]] = k;
    std::vector<std::vector<std::size_t>> adj(ids.size());
    std::vector<char> cyclic(ids.size(), 0);
    for (std::size_t a = 0; a < ids.size(); ++a) {
      detail::ElementBits need = inv_[ids[a]];
      need.subtract(source_bits_);
      for (std::size_t b = 0; b < ids.size(); ++b) {
        if (!need.intersects(out_[ids[b]])) continue;
        if (a == b)
          cyclic[a] = 1;
        else
          adj[a].push_back(b);
      }
    }
    // Iteratively strip nodes with no in- or out-neighbours among survivors;
    // whatever remains lies on a cycle.
    std::vector<char> alive(ids.size(), 1);
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<int> indeg(ids.size(), 0), outdeg(ids.size(), 0);
      for (std::size_t a = 0; a < ids.size(); ++a) {
        if (!alive[a]) continue;
        for (std::size_t b : adj[a])
          if (alive[b]) {
            ++outdeg[a];
            ++indeg[b];
          }
      }
      for (std::size_t a = 0; a < ids.size(); ++a) {
        if (alive[a] && !cyclic[a] && (indeg[a] == 0 || outdeg[a] == 0)) {
          alive[a] = 0;
          changed = true;
        }
      }
    }
    for (std::size_t a = 0; a < ids.size(); ++a)
      if (alive[a] || cyclic[a]) cycle_ids_.push_back(ids[a]);
  }

  std::vector<std::vector<EdgeId>> minimal_closed_groups(const std::vector<EdgeId>& path,
                                                         const detail::ElementBits& value) const {
    std::vector<EdgeId> cand;
    for (EdgeId i : cycle_ids_) {
      if (std::binary_search(path.begin(), path.end(), i)) continue;
      if (inv_[i].subset_of(value)) continue;  // reachable as a single step
      cand.push_back(i);
    }
    // Greatest closed subset given the current value.
    for (bool shrunk = true; shrunk && !cand.empty();) {
      shrunk = false;
      detail::ElementBits avail = value;
      for (EdgeId i : cand) avail |= out_[i];
      std::vector<EdgeId> kept;
      for (EdgeId i : cand) {
        if (inv_[i].subset_of(avail))
          kept.push_back(i);
        else
          shrunk = true;
      }
      cand.swap(kept);
    }
    std::vector<std::vector<EdgeId>> groups;
    if (cand.empty()) return groups;
    if (cand.size() > kMaxClosedGroupEnum) {
      groups.push_back(cand);  // exhaustive enumeration is off the table
      return groups;
    }
    auto closed = [&](std::uint32_t mask) {
      detail::ElementBits avail = value;
      for (std::size_t k = 0; k < cand.size(); ++k)
        if (mask & (1u << k)) avail |= out_[cand[k]];
      for (std::size_t k = 0; k < cand.size(); ++k)
        if ((mask & (1u << k)) && !inv_[cand[k]].subset_of(avail)) return false;
      return true;
    };
    std::vector<std::uint32_t> kept_masks;
    std::vector<std::uint32_t> order;
    for (std::uint32_t mask = 1; mask < (1u << cand.size()); ++mask) order.push_back(mask);
    std::sort(order.begin(), order.end(), [](std::uint32_t a, std::uint32_t b) {
      auto pa = std::popcount(a), pb = std::popcount(b);
      return pa != pb ? pa < pb : a < b;
    });
    for (std::uint32_t mask : order) {
      bool dominated = false;
      for (std::uint32_t k : kept_masks)
        if ((k & mask) == k) {
          dominated = true;
          break;
        }
      if (dominated || !closed(mask)) continue;
      kept_masks.push_back(mask);
      std::vector<EdgeId> group;
      for (std::size_t k = 0; k < cand.size(); ++k)
        if (mask & (1u << k)) group.push_back(cand[k]);
      groups.push_back(std::move(group));
    }
    return groups;
  }

  // Expansion used for yields: like expand_metapath, but an original edge is
  // kept only when it feeds an input that the source cannot already satisfy
  // or produces a target element. Keeps expanded sets inclusion-minimal.
  std::vector<EdgeId> expand_for_yield(const std::vector<EdgeId>& path) const {
    const std::size_t n = mg_->element_count();
    detail::ElementBits inputs(n);
    for (EdgeId i : path) inputs |= inv_[i];
    detail::ElementBits wanted = (inputs | target_bits_) & useful_;

    std::vector<EdgeId> result;
    for (EdgeId i : path) {
      if (i < plan_.original_count) {
        result.push_back(i);
        continue;
      }
      for (EdgeId j : plan_.replacement_map.at(i))
        if (out_[j].intersects(wanted)) result.push_back(j);
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
  }

  static constexpr std::size_t kMaxClosedGroupEnum = 18;

  const Metagraph* mg_;
  ElementSet source_, target_;
  detail::ElementBits source_bits_, target_bits_, useful_;
  CombinedEdgePlan plan_;
  std::vector<detail::ElementBits> inv_, out_;
  std::vector<EdgeId> cycle_ids_;

  bool trivial_ = false;
  bool done_ = false;
  std::map<std::size_t, std::map<std::vector<EdgeId>, detail::ElementBits>> levels_;
  SetTrie found_;
  SetTrie found_expanded_;
};

/// Eager convenience wrapper around MetapathStream.
inline std::vector<std::vector<EdgeId>> get_all_metapaths(const Metagraph& mg,
                                                          const ElementSet& source,
                                                          const ElementSet& target,
                                                          PathSearchOptions options = {},
                                                          std::size_t limit = 0) {
  MetapathStream stream(mg, source, target, options);
  return stream.collect(limit);
}

}  // namespace metagraph
