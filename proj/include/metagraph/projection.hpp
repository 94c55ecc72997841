#pragma once

// Projections over a subset of the generating set: the transitivity
// preserving projection, a brute-force projection oracle that realizes the
// original definition directly, and the dominance / irreducibility /
// factorization machinery used to cross-check the fast path.
//
// The fast projection works per target x': compute every minimal source V
// admitting a metapath M(V,{x'}) (antichain propagation over producer
// edges), enumerate the minimal metapaths from each V — exactly the dominant
// metapaths — and keep the irreducible ones. Grouping survivors by invertex
// yields the projection. Searching from the minimal sources rather than from
// X'\{x'} is what makes dominant paths that produce source elements
// internally (cyclic support, chained fragments) come out right.

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "metagraph/core.hpp"
#include "metagraph/pathfinding.hpp"
#include "metagraph/set_trie.hpp"

namespace metagraph {

enum class ProjectionKind { tpp, bbp };

/// Projected metagraph plus the reverse map C(e'): for projected edge i,
/// reverse_map[i] lists the originating metapaths of the source graph (edge
/// ids, source and target all refer to the original graph). No two projected
/// edges share an invertex.
struct ProjectionResult {
  Metagraph projected;
  std::vector<std::vector<Metapath>> reverse_map;
  ProjectionKind kind = ProjectionKind::tpp;
  std::vector<std::string> original_edge_labels;
};

struct ProjectionOptions {
  unsigned threads = 1;
};

struct OracleBudget {
  std::size_t max_edges = 14;   // power-set enumeration bound
  std::size_t max_subset = 10;  // projection-set bound for the BBP oracle
};

/// Simplifies a metapath into a projected edge. The outvertex is the path's
/// pure outputs restricted to the generating subset. The invertex is the
/// minimal subset of `source` the path actually requires: the path is first
/// ordered so each edge's invertex is covered by the source plus preceding
/// outvertices, then traversed in reverse accumulating required inputs.
inline Edge projection_edge(const Metagraph& mg, std::span<const EdgeId> path,
                            const ElementSet& source, const ElementSet& generating_subset) {
  if (path.empty()) fail(Errc::empty_path, "projection edge of an empty path");
  validate_edge_ids(mg, path);

  ElementSet outputs, inputs;
  for (EdgeId i : path) {
    outputs = set_union(outputs, mg.edge(i).outvertex);
    inputs = set_union(inputs, mg.edge(i).invertex);
  }
  ElementSet outvertex = set_intersection(set_difference(outputs, inputs), generating_subset);

  // Order the path forward from the source.
  std::vector<EdgeId> ordered;
  {
    ElementSet bag = source;
    std::vector<char> used(mg.edge_count(), 0);
    for (bool updated = true; updated;) {
      updated = false;
      for (EdgeId i : path) {
        if (used[i] || !mg.edge(i).invertex.subset_of(bag)) continue;
        used[i] = 1;
        ordered.push_back(i);
        bag = set_union(bag, mg.edge(i).outvertex);
        updated = true;
      }
    }
    for (EdgeId i : path)  // cyclic leftovers keep canonical order
      if (!used[i]) {
        used[i] = 1;
        ordered.push_back(i);
      }
  }

  // Reverse traversal: accumulate required inputs, discharging everything the
  // path itself produces.
  ElementSet required = outvertex;
  ElementSet produced;
  for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) {
    required = set_union(required, mg.edge(*it).invertex);
    produced = set_union(produced, mg.edge(*it).outvertex);
    required = set_difference(required, produced);
  }
  return Edge{required, outvertex, 0};
}

namespace detail {

// Minimal-source computation: for every element reachable toward the
// target, maintain the antichain of inclusion-minimal source sets (subsets
// of sigma0) from which the element can be produced. Antichains propagate
// through producer edges by cross-union; mutually sustaining edge groups
// (strongly connected components of the supply digraph) are admitted as
// composite producers so cyclic support is derivable too.
class MinimalSourceSolver {
 public:
  // Requires target ∉ sigma0: a source never hands the target over directly,
  // it has to be produced.
  MinimalSourceSolver(const Metagraph& mg, ElementId target, const ElementSet& sigma0)
      : universe_(mg.element_count()) {
    if (sigma0.contains(target))
      fail(Errc::invalid_params, "source set must not contain the target");
    const std::size_t m = mg.edge_count();
    // Candidate pool: backward closure from the target.
    std::vector<EdgeId> pool;
    {
      std::vector<char> required(universe_, 0), kept(m, 0);
      required[target] = 1;
      for (bool updated = true; updated;) {
        updated = false;
        for (EdgeId i = 0; i < m; ++i) {
          if (kept[i]) continue;
          bool hit = false;
          for (ElementId z : mg.edge(i).outvertex)
            if (required[z]) {
              hit = true;
              break;
            }
          if (!hit) continue;
          kept[i] = 1;
          for (ElementId z : mg.edge(i).invertex) required[z] = 1;
          updated = true;
        }
      }
      for (EdgeId i = 0; i < m; ++i)
        if (kept[i]) pool.push_back(i);
    }

    for (EdgeId i : pool) producers_.push_back({mg.edge(i).invertex, mg.edge(i).outvertex});
    if (detail::has_supply_cycle(mg, pool)) synthesize_kernels(mg, pool);

    src_.resize(universe_);
    tries_.resize(universe_);
    std::vector<std::vector<std::size_t>> consumers(universe_);
    for (std::size_t f = 0; f < producers_.size(); ++f)
      for (ElementId z : producers_[f].first) consumers[z].push_back(f);

    // Uniform-cost propagation: candidates commit in nondecreasing set size,
    // so a committed source is never dominated later and the per-element
    // antichains stay clean. Each input tuple of a producer is combined
    // exactly once, when its last component commits. Candidates pack into a
    // single 128-bit key while ids fit 13 bits and sizes stay at most 8,
    // which covers every practical instance; otherwise a generic ordered
    // pair does the same job.
    bool done = false;
    if (universe_ < (1u << 13)) done = propagate(PackedCodec{}, sigma0, consumers);
    if (!done) {
      src_.clear();
      src_.resize(universe_);
      tries_.clear();
      tries_.resize(universe_);
      propagate(GenericCodec{}, sigma0, consumers);
    }
    result_ = src_[target];
    std::sort(result_.begin(), result_.end());
  }

  struct PackedCodec {
    using Key = unsigned __int128;
    static constexpr std::size_t kMaxIds = 8;
    static bool fits(std::size_t count) { return count <= kMaxIds; }
    static Key encode(ElementId z, std::span<const ElementId> ids) {
      Key key = (Key(ids.size()) << 120) | (Key(z) << 104);
      int shift = 104 - 13;
      for (ElementId v : ids) {
        key |= Key(v + 1) << shift;  // +1 keeps a used slot distinct from padding
        shift -= 13;
      }
      return key;
    }
    static std::pair<ElementId, std::vector<ElementId>> decode(Key key) {
      std::size_t count = static_cast<std::size_t>(key >> 120);
      ElementId z = static_cast<ElementId>((key >> 104) & 0xFFFF);
      std::vector<ElementId> ids;
      int shift = 104 - 13;
      for (std::size_t i = 0; i < count; ++i) {
        ids.push_back(static_cast<ElementId>((key >> shift) & 0x1FFF) - 1);
        shift -= 13;
      }
      return {z, std::move(ids)};
    }
  };

  struct GenericCodec {
    struct Key {
      ElementId z;
      std::vector<ElementId> ids;
      friend bool operator<(const Key& a, const Key& b) {
        if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
        if (a.z != b.z) return a.z < b.z;
        return a.ids < b.ids;
      }
    };
    static constexpr std::size_t kMaxIds = SIZE_MAX;
    static bool fits(std::size_t) { return true; }
    static Key encode(ElementId z, std::span<const ElementId> ids) {
      return Key{z, {ids.begin(), ids.end()}};
    }
    static std::pair<ElementId, std::vector<ElementId>> decode(Key key) {
      return {key.z, std::move(key.ids)};
    }
  };

  // Returns false when a candidate exceeds the codec capacity; the caller
  // then reruns with the generic codec.
  template <typename Codec>
  bool propagate(Codec, const ElementSet& sigma0,
                 const std::vector<std::vector<std::size_t>>& consumers) {
    std::set<typename Codec::Key> queue;
    std::vector<char> seeded(universe_, 0);
    for (const auto& prod : producers_)
      for (ElementId z : prod.first)
        if (sigma0.contains(z) && !seeded[z]) {
          seeded[z] = 1;
          queue.insert(Codec::encode(z, std::span<const ElementId>(&z, 1)));
        }
    for (const auto& prod : producers_)
      if (prod.first.empty())
        for (ElementId w : prod.second) queue.insert(Codec::encode(w, {}));

    std::vector<ElementId> merged, tmp;
    while (!queue.empty()) {
      auto [z, ids] = Codec::decode(*queue.begin());
      queue.erase(queue.begin());
      if (tries_[z].exists_subset_of(std::span<const ElementId>(ids))) continue;
      tries_[z].insert(std::span<const ElementId>(ids));
      src_[z].push_back(ElementSet(std::move(ids)));
      const ElementSet& committed = src_[z].back();

      for (std::size_t f : consumers[z]) {
        const auto& inputs = producers_[f].first.members();
        const ElementSet& outputs = producers_[f].second;
        // Cross the new entry with the committed antichains of the other
        // inputs (odometer over their current lists).
        std::vector<std::size_t> sizes, idx;
        bool empty = false;
        for (ElementId d : inputs) {
          if (d == z) continue;
          if (src_[d].empty()) {
            empty = true;
            break;
          }
          sizes.push_back(src_[d].size());
        }
        if (empty) continue;
        idx.assign(sizes.size(), 0);
        while (true) {
          merged.assign(committed.begin(), committed.end());
          std::size_t slot = 0;
          for (ElementId d : inputs) {
            if (d == z) continue;
            const auto& other = src_[d][idx[slot++]].members();
            tmp.clear();
            std::set_union(merged.begin(), merged.end(), other.begin(), other.end(),
                           std::back_inserter(tmp));
            merged.swap(tmp);
          }
          if (!Codec::fits(merged.size())) return false;
          for (ElementId w : outputs)
            if (!tries_[w].exists_subset_of(std::span<const ElementId>(merged)))
              queue.insert(Codec::encode(w, merged));
          std::size_t i = 0;
          for (; i < idx.size(); ++i) {
            if (++idx[i] < sizes[i]) break;
            idx[i] = 0;
          }
          if (i == idx.size() || idx.empty()) break;
        }
      }
    }
    return true;
  }

  const std::vector<ElementSet>& sources() const { return result_; }

 private:
  using Producer = std::pair<ElementSet, ElementSet>;  // (inputs, outputs)

  // Strongly connected groups of the pool's supply digraph become composite
  // producers (pure inputs -> combined outputs). Enumerated per SCC; very
  // large components fall back to the whole-component composite only.
  void synthesize_kernels(const Metagraph& mg, const std::vector<EdgeId>& pool) {
    const std::size_t k = pool.size();
    std::vector<std::vector<std::size_t>> supplies(k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        if (a != b && mg.edge(pool[a]).invertex.intersects(mg.edge(pool[b]).outvertex))
          supplies[a].push_back(b);  // b supplies a

    // SCCs by double DFS (Kosaraju).
    std::vector<std::size_t> order;
    std::vector<char> seen(k, 0);
    for (std::size_t s = 0; s < k; ++s) {
      if (seen[s]) continue;
      std::vector<std::pair<std::size_t, std::size_t>> st{{s, 0}};
      seen[s] = 1;
      while (!st.empty()) {
        auto& [v, idx] = st.back();
        if (idx < supplies[v].size()) {
          std::size_t w = supplies[v][idx++];
          if (!seen[w]) {
            seen[w] = 1;
            st.emplace_back(w, 0);
          }
        } else {
          order.push_back(v);
          st.pop_back();
        }
      }
    }
    std::vector<std::vector<std::size_t>> rev(k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b : supplies[a]) rev[b].push_back(a);
    std::vector<int> comp(k, -1);
    int ncomp = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (comp[*it] >= 0) continue;
      std::vector<std::size_t> st{*it};
      comp[*it] = ncomp;
      while (!st.empty()) {
        std::size_t v = st.back();
        st.pop_back();
        for (std::size_t w : rev[v])
          if (comp[w] < 0) {
            comp[w] = ncomp;
            st.push_back(w);
          }
      }
      ++ncomp;
    }
    std::vector<std::vector<std::size_t>> members(ncomp);
    for (std::size_t a = 0; a < k; ++a) members[comp[a]].push_back(a);

    std::set<Producer> dedupe;
    auto add_kernel = [&](const std::vector<std::size_t>& group) {
      ElementSet inv, out;
      for (std::size_t a : group) {
        inv = set_union(inv, mg.edge(pool[a]).invertex);
        out = set_union(out, mg.edge(pool[a]).outvertex);
      }
      Producer kernel{set_difference(inv, out), out};
      if (kernel.first == inv) return;  // nothing self-sustained
      if (dedupe.insert(kernel).second) producers_.push_back(std::move(kernel));
    };

    constexpr std::size_t kMaxKernelEnum = 16;
    for (const auto& scc : members) {
      bool self_loop = scc.size() == 1 &&
                       mg.edge(pool[scc[0]]).invertex.intersects(mg.edge(pool[scc[0]]).outvertex);
      if (scc.size() < 2 && !self_loop) continue;
      if (scc.size() > kMaxKernelEnum) {
        add_kernel(scc);  // exhaustive sub-group enumeration is off the table
        continue;
      }
      for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << scc.size()); ++mask) {
        std::vector<std::size_t> group;
        for (std::size_t b = 0; b < scc.size(); ++b)
          if (mask & (std::uint32_t{1} << b)) group.push_back(scc[b]);
        if (group.size() == 1) {
          const Edge& e = mg.edge(pool[group[0]]);
          if (e.invertex.intersects(e.outvertex)) add_kernel(group);
          continue;
        }
        if (strongly_connected(group, mg, pool)) add_kernel(group);
      }
    }
  }

  static bool strongly_connected(const std::vector<std::size_t>& group, const Metagraph& mg,
                                 const std::vector<EdgeId>& pool) {
    const std::size_t k = group.size();
    auto reach = [&](bool forward) {
      std::vector<char> seen(k, 0);
      std::vector<std::size_t> st{0};
      seen[0] = 1;
      std::size_t count = 1;
      while (!st.empty()) {
        std::size_t v = st.back();
        st.pop_back();
        for (std::size_t w = 0; w < k; ++w) {
          if (seen[w]) continue;
          const Edge& ev = mg.edge(pool[group[v]]);
          const Edge& ew = mg.edge(pool[group[w]]);
          bool arc = forward ? ev.invertex.intersects(ew.outvertex)
                             : ew.invertex.intersects(ev.outvertex);
          if (arc) {
            seen[w] = 1;
            st.push_back(w);
            ++count;
          }
        }
      }
      return count == k;
    };
    return reach(true) && reach(false);
  }

  std::size_t universe_;
  std::vector<Producer> producers_;
  std::vector<std::vector<ElementSet>> src_;
  std::vector<SetTrie> tries_;
  std::vector<ElementSet> result_;
};

// All inclusion-minimal V ⊆ sigma0 admitting a metapath M(V, {x}).
inline std::vector<ElementSet> minimal_sources(const Metagraph& mg, ElementId x,
                                               const ElementSet& sigma0) {
  return MinimalSourceSolver(mg, x, sigma0).sources();
}

struct DominantPath {
  ElementSet source;          // = pure inputs of the edge set
  std::vector<EdgeId> ids;    // sorted
};

// Shared per-target search state: the backward-closure pool from the target
// plus adjacency and bit tables, built once and reused by every per-source
// enumeration for that target.
struct TargetContext {
  const Metagraph* mg = nullptr;
  ElementId target = 0;
  std::size_t universe = 0;
  std::vector<EdgeId> pool;                        // ascending edge ids
  std::vector<ElementBits> inv_bits, out_bits;     // pool-indexed
  std::vector<std::vector<std::size_t>> consumers; // element -> pool index
  std::vector<std::vector<std::size_t>> producers; // element -> pool index
  bool cyclic = false;

  static TargetContext build(const Metagraph& mg, ElementId target) {
    TargetContext ctx;
    ctx.mg = &mg;
    ctx.target = target;
    ctx.universe = mg.element_count();
    const std::size_t m = mg.edge_count();
    std::vector<char> required(ctx.universe, 0), kept(m, 0);
    required[target] = 1;
    for (bool updated = true; updated;) {
      updated = false;
      for (EdgeId i = 0; i < m; ++i) {
        if (kept[i]) continue;
        bool hit = false;
        for (ElementId z : mg.edge(i).outvertex)
          if (required[z]) {
            hit = true;
            break;
          }
        if (!hit) continue;
        kept[i] = 1;
        for (ElementId z : mg.edge(i).invertex) required[z] = 1;
        updated = true;
      }
    }
    for (EdgeId i = 0; i < m; ++i)
      if (kept[i]) ctx.pool.push_back(i);
    ctx.consumers.resize(ctx.universe);
    ctx.producers.resize(ctx.universe);
    for (std::size_t k = 0; k < ctx.pool.size(); ++k) {
      const Edge& e = mg.edge(ctx.pool[k]);
      ctx.inv_bits.push_back(ElementBits::of(e.invertex, ctx.universe));
      ctx.out_bits.push_back(ElementBits::of(e.outvertex, ctx.universe));
      for (ElementId z : e.invertex) ctx.consumers[z].push_back(k);
      for (ElementId z : e.outvertex) ctx.producers[z].push_back(k);
    }
    ctx.cyclic = has_supply_cycle(mg, ctx.pool);
    return ctx;
  }
};

// Minimal metapaths from `source` to the context target, restricted to the
// context pool. For a minimal source P every yield is a dominant metapath
// with pure inputs exactly P.
//
// Enumeration is demand-driven: starting from the target, the smallest
// outstanding demand is either taken from the source or resolved by one of
// its producers in the forward cone. Canonical demand order collapses the
// interleavings of independent branches, and cyclic support resolves itself
// once a group's combined outputs cover its residual demands.
inline std::vector<std::vector<EdgeId>> minimal_paths_from(const TargetContext& ctx,
                                                           const ElementSet& source) {
  const Metagraph& mg = *ctx.mg;
  const std::size_t n = ctx.universe;
  const std::size_t pk = ctx.pool.size();
  auto source_bits = ElementBits::of(source, n);

  // Forward activation cone from the source (closed-group fallback when the
  // pool has supply cycles), so dead-end producers never enter the search.
  std::vector<char> active(pk, 0);
  {
    std::vector<int> missing(pk, 0);
    std::vector<char> have(n, 0);
    for (ElementId z : source) have[z] = 1;
    std::vector<std::size_t> work;
    for (std::size_t k = 0; k < pk; ++k) {
      for (ElementId z : mg.edge(ctx.pool[k]).invertex)
        if (!have[z]) ++missing[k];
      if (missing[k] == 0) work.push_back(k);
    }
    auto produce = [&](std::size_t k) {
      active[k] = 1;
      for (ElementId z : mg.edge(ctx.pool[k]).outvertex) {
        if (have[z]) continue;
        have[z] = 1;
        for (std::size_t c : ctx.consumers[z])
          if (!active[c] && --missing[c] == 0) work.push_back(c);
      }
    };
    while (true) {
      while (!work.empty()) {
        std::size_t k = work.back();
        work.pop_back();
        if (!active[k]) produce(k);
      }
      if (!ctx.cyclic) break;
      std::vector<std::size_t> group;
      for (std::size_t k = 0; k < pk; ++k)
        if (!active[k]) group.push_back(k);
      for (bool shrunk = true; shrunk && !group.empty();) {
        shrunk = false;
        std::vector<char> avail = have;
        for (std::size_t k : group)
          for (ElementId z : mg.edge(ctx.pool[k]).outvertex) avail[z] = 1;
        std::vector<std::size_t> keep;
        for (std::size_t k : group) {
          bool ok = true;
          for (ElementId z : mg.edge(ctx.pool[k]).invertex)
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
  }

  struct State {
    std::vector<std::size_t> edges;  // pool indices, sorted
    std::vector<ElementId> stops;    // source elements taken as inputs, sorted
  };
  auto demands_of = [&](const State& st) {
    ElementBits need(n), got(n);
    need.set(ctx.target);
    for (std::size_t k : st.edges) {
      need |= ctx.inv_bits[k];
      got |= ctx.out_bits[k];
    }
    for (ElementId z : st.stops) got.set(z);
    need.subtract(got);
    return need;
  };

  std::set<std::pair<std::vector<std::size_t>, std::vector<ElementId>>> seen;
  std::vector<std::vector<EdgeId>> emissions;
  std::vector<State> stack{State{}};
  while (!stack.empty()) {
    State st = std::move(stack.back());
    stack.pop_back();
    if (!seen.emplace(st.edges, st.stops).second) continue;
    ElementBits need = demands_of(st);
    if (need.none()) {
      std::vector<EdgeId> ids;
      for (std::size_t k : st.edges) ids.push_back(ctx.pool[k]);
      emissions.push_back(std::move(ids));
      continue;
    }
    ElementId d = need.to_vector().front();
    if (source_bits.test(d)) {
      State next = st;
      next.stops.insert(std::upper_bound(next.stops.begin(), next.stops.end(), d), d);
      stack.push_back(std::move(next));
    }
    for (std::size_t k : ctx.producers[d]) {
      if (!active[k]) continue;
      if (std::binary_search(st.edges.begin(), st.edges.end(), k)) continue;
      State next = st;
      next.edges.insert(std::upper_bound(next.edges.begin(), next.edges.end(), k), k);
      stack.push_back(std::move(next));
    }
  }

  // Keep the inclusion-minimal emissions.
  std::sort(emissions.begin(), emissions.end(),
            [](const std::vector<EdgeId>& a, const std::vector<EdgeId>& b) {
              return a.size() != b.size() ? a.size() < b.size() : a < b;
            });
  std::vector<std::vector<EdgeId>> yields;
  SetTrie kept;
  for (auto& ids : emissions) {
    if (kept.exists_subset_of(std::span<const EdgeId>(ids))) continue;
    kept.insert(std::span<const EdgeId>(ids));
    yields.push_back(std::move(ids));
  }
  std::sort(yields.begin(), yields.end());
  return yields;
}

// Every dominant metapath M(V, {x}) with V ⊆ sigma0: the minimal metapaths
// from each minimal source are exactly the dominant paths for that source.
inline std::vector<DominantPath> dominant_paths_for_target(const Metagraph& mg, ElementId x,
                                                           const ElementSet& sigma0) {
  TargetContext ctx = TargetContext::build(mg, x);
  std::vector<DominantPath> result;
  for (const ElementSet& p : minimal_sources(mg, x, sigma0))
    for (auto& ids : minimal_paths_from(ctx, p)) result.push_back(DominantPath{p, std::move(ids)});
  std::sort(result.begin(), result.end(), [](const DominantPath& a, const DominantPath& b) {
    if (a.source != b.source) return a.source < b.source;
    return a.ids < b.ids;
  });
  return result;
}

// Split test shared by the fast projection and the irreducibility oracle: a
// dominant path factors through Z when a dominant head produces the target
// from Z inside the subset and the remaining edges deliver Z from the
// source. `heads` are the dominant paths available as head candidates.
inline bool reducible_over(const Metagraph& mg, const DominantPath& path,
                           const std::vector<DominantPath>& heads,
                           std::span<const std::size_t> heads_by_size,
                           const SetTrieMultiMap<std::size_t>& head_index,
                           std::span<const ElementBits> edge_inv,
                           std::span<const ElementBits> edge_out) {
  const std::size_t n = mg.element_count();
  auto source_bits = ElementBits::of(path.source, n);
  std::vector<EdgeId> tail;
  auto splits_via = [&](std::size_t idx) {
    const auto& head_ids = heads[idx].ids;
    tail.clear();
    std::set_difference(path.ids.begin(), path.ids.end(), head_ids.begin(), head_ids.end(),
                        std::back_inserter(tail));
    ElementBits tail_inv(n), tail_out(n);
    for (EdgeId i : tail) {
      tail_inv |= edge_inv[i];
      tail_out |= edge_out[i];
    }
    ElementBits tail_pure = tail_inv;
    tail_pure.subtract(tail_out);
    if (!tail_pure.subset_of(source_bits)) return false;
    return ElementBits::of(heads[idx].source, n).subset_of(source_bits | tail_out);
  };

  // Fast path: most reducible paths split off one of the globally smallest
  // dominant paths, so scan those with direct subset tests first.
  constexpr std::size_t kFastProbes = 48;
  std::size_t probed = 0;
  for (std::size_t idx : heads_by_size) {
    if (probed >= kFastProbes) break;
    const auto& hid = heads[idx].ids;
    if (hid.size() >= path.ids.size()) break;  // size-sorted: nothing proper left
    ++probed;
    if (!std::includes(path.ids.begin(), path.ids.end(), hid.begin(), hid.end())) continue;
    if (splits_via(idx)) return true;
  }

  std::vector<std::size_t> candidates;
  head_index.for_each_subset_of(
      std::span<const EdgeId>(path.ids),
      [&](const std::vector<EdgeId>& head_ids, const std::vector<std::size_t>& idxs) {
        if (head_ids.size() == path.ids.size()) return;
        candidates.insert(candidates.end(), idxs.begin(), idxs.end());
      });
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return heads[a].ids.size() < heads[b].ids.size();
  });
  for (std::size_t idx : candidates)
    if (splits_via(idx)) return true;
  return false;
}

struct ProjectionCandidate {
  ElementSet invertex;
  ElementId target;
  std::vector<EdgeId> path;
};

// Candidates for one projection target: the dominant metapaths from
// subset \ {target} that are irreducible over the subset.
inline std::vector<ProjectionCandidate> tpp_candidates_for_target(const Metagraph& mg,
                                                                  const ElementSet& subset,
                                                                  ElementId target) {
  ElementSet sigma0 = set_difference(subset, ElementSet{target});
  auto dominant = dominant_paths_for_target(mg, target, sigma0);

  SetTrieMultiMap<std::size_t> by_edges;
  std::vector<std::size_t> by_size(dominant.size());
  for (std::size_t i = 0; i < dominant.size(); ++i) {
    by_edges.assign(std::span<const EdgeId>(dominant[i].ids), i);
    by_size[i] = i;
  }
  std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
    return dominant[a].ids.size() < dominant[b].ids.size();
  });
  const std::size_t n = mg.element_count();
  std::vector<ElementBits> edge_inv, edge_out;
  for (const Edge& e : mg.edges()) {
    edge_inv.push_back(ElementBits::of(e.invertex, n));
    edge_out.push_back(ElementBits::of(e.outvertex, n));
  }

  std::vector<ProjectionCandidate> kept;
  for (const auto& d : dominant) {
    if (reducible_over(mg, d, dominant, by_size, by_edges, edge_inv, edge_out)) continue;
    kept.push_back(ProjectionCandidate{d.source, target, d.ids});
  }
  return kept;
}

struct MergedProjection {
  std::vector<std::pair<ElementSet, ElementSet>> edges;  // (invertex, outvertex) ascending
  std::vector<std::vector<Metapath>> reverse_map;
};

// Merge candidates sharing an invertex: the outvertex collects each
// candidate's target, the reverse map each candidate's metapath.
inline MergedProjection merge_candidates(std::vector<std::vector<ProjectionCandidate>> per_target) {
  std::map<ElementSet, std::pair<ElementSet, std::vector<Metapath>>> grouped;
  for (auto& candidates : per_target) {
    for (auto& c : candidates) {
      auto& slot = grouped[c.invertex];
      slot.first = set_union(slot.first, ElementSet{c.target});
      slot.second.push_back(Metapath{std::move(c.path), c.invertex, ElementSet{c.target}});
    }
  }
  MergedProjection merged;
  for (auto& [invertex, slot] : grouped) {
    merged.edges.emplace_back(invertex, std::move(slot.first));
    merged.reverse_map.push_back(std::move(slot.second));
  }
  return merged;
}

inline ProjectionResult assemble_projection(const Metagraph& mg, const ElementSet& subset,
                                            MergedProjection merged, ProjectionKind kind) {
  std::vector<std::string> elements = mg.names_of(subset);
  std::vector<Metagraph::NamedEdge> edges;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < merged.edges.size(); ++i) {
    edges.push_back({mg.names_of(merged.edges[i].first), mg.names_of(merged.edges[i].second)});
    labels.push_back("ep" + std::to_string(i + 1));
  }
  ProjectionResult result;
  result.projected = Metagraph::create(elements, edges, std::move(labels));
  result.reverse_map = std::move(merged.reverse_map);
  result.kind = kind;
  result.original_edge_labels = mg.edge_labels();
  return result;
}

}  // namespace detail

/// Transitivity preserving projection of `mg` over `generating_subset`.
///
/// For each x' in the subset, enumerates the dominant metapaths from
/// subset \ {x'} to {x'}, keeps the irreducible ones, and merges edges
/// sharing an invertex by unioning targets. Per-target searches are
/// independent and may fan out across threads; the merge is a deterministic
/// sequential reduction sorted by invertex.
inline ProjectionResult tpp(const Metagraph& mg, const ElementSet& generating_subset,
                            ProjectionOptions options = {}) {
  if (!generating_subset.subset_of(mg.generating_set()))
    fail(Errc::subset_not_in_generating_set, "projection subset exceeds the generating set");

  const auto& targets = generating_subset.members();
  std::vector<std::vector<detail::ProjectionCandidate>> per_target(targets.size());

  unsigned threads = std::max(1u, options.threads);
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(1, targets.size())));
  if (threads <= 1) {
    for (std::size_t t = 0; t < targets.size(); ++t)
      per_target[t] = detail::tpp_candidates_for_target(mg, generating_subset, targets[t]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < targets.size(); t = next.fetch_add(1))
          per_target[t] = detail::tpp_candidates_for_target(mg, generating_subset, targets[t]);
      });
    }
    for (auto& th : pool) th.join();
  }

  return detail::assemble_projection(mg, generating_subset,
                                     detail::merge_candidates(std::move(per_target)),
                                     ProjectionKind::tpp);
}

namespace detail {

// Union tables over the edge power set: table[mask] = OR of per-edge sets.
inline std::vector<std::uint64_t> power_set_unions(std::size_t m, std::size_t words,
                                                   const Metagraph& mg, bool invert_side) {
  std::vector<std::uint64_t> table((std::size_t{1} << m) * words, 0);
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << m); ++mask) {
    std::uint32_t low = mask & (~mask + 1);
    std::uint32_t rest = mask ^ low;
    unsigned idx = static_cast<unsigned>(std::countr_zero(low));
    const ElementSet& s = invert_side ? mg.edge(idx).invertex : mg.edge(idx).outvertex;
    std::uint64_t* dst = table.data() + std::size_t{mask} * words;
    const std::uint64_t* src = table.data() + std::size_t{rest} * words;
    for (std::size_t w = 0; w < words; ++w) dst[w] = src[w];
    for (ElementId e : s) dst[e >> 6] |= std::uint64_t{1} << (e & 63);
  }
  return table;
}

struct PowerSetTables {
  std::size_t words = 0;
  std::vector<std::uint64_t> inv, out, pure;  // indexed by mask * words

  static PowerSetTables build(const Metagraph& mg) {
    PowerSetTables t;
    const std::size_t m = mg.edge_count();
    t.words = (mg.element_count() + 63) / 64;
    t.inv = power_set_unions(m, t.words, mg, true);
    t.out = power_set_unions(m, t.words, mg, false);
    t.pure.resize(t.inv.size());
    for (std::size_t i = 0; i < t.inv.size(); ++i) t.pure[i] = t.inv[i] & ~t.out[i];
    return t;
  }

  const std::uint64_t* out_of(std::uint32_t mask) const {
    return out.data() + std::size_t{mask} * words;
  }
  const std::uint64_t* pure_of(std::uint32_t mask) const {
    return pure.data() + std::size_t{mask} * words;
  }
};

inline bool words_subset(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  for (std::size_t w = 0; w < words; ++w)
    if (a[w] & ~b[w]) return false;
  return true;
}

inline bool words_equal(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  for (std::size_t w = 0; w < words; ++w)
    if (a[w] != b[w]) return false;
  return true;
}

inline std::vector<EdgeId> mask_to_ids(std::uint32_t mask) {
  std::vector<EdgeId> ids;
  while (mask) {
    ids.push_back(static_cast<EdgeId>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return ids;
}

// Exact dominant-metapath enumeration over precomputed power-set tables.
inline std::vector<Metapath> dominant_from_tables(const Metagraph& mg, const PowerSetTables& t,
                                                  const ElementSet& source,
                                                  const ElementSet& target) {
  const std::size_t m = mg.edge_count();
  const std::size_t words = t.words;
  std::vector<std::uint64_t> source_w(words, 0), target_w(words, 0);
  for (ElementId e : source) source_w[e >> 6] |= std::uint64_t{1} << (e & 63);
  for (ElementId e : target) target_w[e >> 6] |= std::uint64_t{1} << (e & 63);

  // Valid candidates: target covered by outputs, pure inputs within source.
  std::vector<std::uint32_t> valid;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << m); ++mask) {
    if (!words_subset(target_w.data(), t.out_of(mask), words)) continue;
    if (!words_subset(t.pure_of(mask), source_w.data(), words)) continue;
    valid.push_back(mask);
  }

  std::vector<Metapath> result;
  for (std::uint32_t mask : valid) {
    bool dominated = false;
    for (std::uint32_t other : valid) {
      bool pure_sub = words_subset(t.pure_of(other), t.pure_of(mask), words);
      if (!pure_sub) continue;
      bool pure_eq = words_equal(t.pure_of(other), t.pure_of(mask), words);
      if (!pure_eq) {
        dominated = true;  // input-dominance fails
        break;
      }
      if (other != mask && (other & mask) == other) {
        dominated = true;  // edge-dominance fails
        break;
      }
    }
    if (dominated) continue;
    ElementBits pure(mg.element_count());
    for (ElementId e : mg.generating_set())
      if ((t.pure_of(mask)[e >> 6] >> (e & 63)) & 1) pure.set(e);
    result.push_back(Metapath{mask_to_ids(mask), pure.to_element_set(), target});
  }
  std::sort(result.begin(), result.end());
  return result;
}

// Hard ceiling independent of the caller's budget: the power-set tables take
// 3 * 2^m words, which stops being reasonable well before mask arithmetic
// overflows.
inline constexpr std::size_t kOracleHardEdgeCap = 24;

inline void check_oracle_edges(const Metagraph& mg, const OracleBudget& budget) {
  if (mg.edge_count() > budget.max_edges || mg.edge_count() > kOracleHardEdgeCap)
    fail(Errc::budget_exceeded, "edge count " + std::to_string(mg.edge_count()) +
                                    " exceeds the power-set budget of " +
                                    std::to_string(std::min(budget.max_edges,
                                                            kOracleHardEdgeCap)));
}

}  // namespace detail

/// Exhaustive enumeration of the dominant metapaths M(V, target) over all
/// V ⊆ source: edge-dominant (no proper edge subset forms a metapath for the
/// same pair) and input-dominant (no metapath from a smaller source). Every
/// dominant metapath's source equals its edge set's pure inputs.
inline std::vector<Metapath> enumerate_dominant_metapaths_oracle(const Metagraph& mg,
                                                                 const ElementSet& source,
                                                                 const ElementSet& target,
                                                                 OracleBudget budget = {}) {
  detail::require_subset_of_generating_set(mg, source);
  detail::require_subset_of_generating_set(mg, target);
  detail::check_oracle_edges(mg, budget);
  auto tables = detail::PowerSetTables::build(mg);
  return detail::dominant_from_tables(mg, tables, source, target);
}

/// Brute-force projection per the original definition: for every x' in the
/// subset and every candidate source within subset \ {x'}, find the dominant
/// metapaths, group them by source, and union the targets.
inline ProjectionResult bbp_oracle(const Metagraph& mg, const ElementSet& generating_subset,
                                   OracleBudget budget = {}) {
  if (!generating_subset.subset_of(mg.generating_set()))
    fail(Errc::subset_not_in_generating_set, "projection subset exceeds the generating set");
  detail::check_oracle_edges(mg, budget);
  if (generating_subset.size() > budget.max_subset)
    fail(Errc::budget_exceeded,
         "subset size " + std::to_string(generating_subset.size()) +
             " exceeds the projection budget of " + std::to_string(budget.max_subset));

  auto tables = detail::PowerSetTables::build(mg);
  std::vector<std::vector<detail::ProjectionCandidate>> per_target;
  for (ElementId x : generating_subset) {
    ElementSet source = set_difference(generating_subset, ElementSet{x});
    std::vector<detail::ProjectionCandidate> candidates;
    for (auto& m : detail::dominant_from_tables(mg, tables, source, ElementSet{x}))
      candidates.push_back(detail::ProjectionCandidate{m.source, x, m.edge_ids});
    per_target.push_back(std::move(candidates));
  }
  return detail::assemble_projection(mg, generating_subset,
                                     detail::merge_candidates(std::move(per_target)),
                                     ProjectionKind::bbp);
}

namespace detail {

struct Bipartition {
  ElementSet z;
  std::vector<EdgeId> head;
  std::vector<EdgeId> tail;
};

// All valid factorization splits M(A,{x}) = M(A,Z) ∘ M(Z,{x}) of `path` with
// Z inside the generating subset: the head is a dominant metapath producing x
// from Z = its pure inputs, and the tail delivers Z from A (producing an
// element or passing it through from the source).
inline std::vector<Bipartition> factorization_splits(const Metagraph& mg, const Metapath& path,
                                                     const ElementSet& subset,
                                                     const PowerSetTables& tables) {
  std::vector<Bipartition> splits;
  const auto& ids = path.edge_ids;
  if (ids.size() < 2 || path.target.size() != 1) return splits;
  const std::size_t k = ids.size();
  const std::size_t n = mg.element_count();
  const std::size_t m = mg.edge_count();
  const std::size_t words = tables.words;
  ElementId x = path.target.members().front();

  // Minimal pure-input sets over all edge sets producing x, for the head
  // input-dominance test.
  std::vector<const std::uint64_t*> pure_minima;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << m); ++mask) {
    if (!((tables.out_of(mask)[x >> 6] >> (x & 63)) & 1)) continue;
    const std::uint64_t* p = tables.pure_of(mask);
    bool dominated = false;
    for (const std::uint64_t* q : pure_minima)
      if (words_subset(q, p, words)) {
        dominated = true;
        break;
      }
    if (dominated) continue;
    std::erase_if(pure_minima,
                  [&](const std::uint64_t* q) { return words_subset(p, q, words); });
    pure_minima.push_back(p);
  }

  auto subset_bits = ElementBits::of(subset, n);
  auto a_bits = ElementBits::of(path.source, n);
  std::vector<ElementBits> inv(k), out(k);
  std::vector<std::uint32_t> global_bit(k);
  for (std::size_t i = 0; i < k; ++i) {
    inv[i] = ElementBits::of(mg.edge(ids[i]).invertex, n);
    out[i] = ElementBits::of(mg.edge(ids[i]).outvertex, n);
    global_bit[i] = std::uint32_t{1} << ids[i];
  }

  const std::uint32_t full = (std::uint32_t{1} << k) - 1;
  for (std::uint32_t h = (full - 1) & full; h; h = (h - 1) & full) {
    ElementBits head_inv(n), head_out(n), tail_inv(n), tail_out(n);
    std::uint32_t head_global = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (h & (std::uint32_t{1} << i)) {
        head_inv |= inv[i];
        head_out |= out[i];
        head_global |= global_bit[i];
      } else {
        tail_inv |= inv[i];
        tail_out |= out[i];
      }
    }
    if (!head_out.test(x)) continue;
    ElementBits z = head_inv;
    z.subtract(head_out);
    if (!z.subset_of(subset_bits)) continue;
    ElementBits tail_pure = tail_inv;
    tail_pure.subtract(tail_out);
    if (!tail_pure.subset_of(a_bits)) continue;
    if (!z.subset_of(a_bits | tail_out)) continue;

    // Head must itself be dominant: no sub-path of it reaches x from within
    // Z, and no metapath anywhere reaches x from a proper subset of Z.
    std::vector<std::uint64_t> z_words(words, 0);
    for (ElementId e : z.to_vector()) z_words[e >> 6] |= std::uint64_t{1} << (e & 63);
    bool head_dominant = true;
    for (std::uint32_t sub = (head_global - 1) & head_global; sub;
         sub = (sub - 1) & head_global) {
      if (((tables.out_of(sub)[x >> 6] >> (x & 63)) & 1) &&
          words_subset(tables.pure_of(sub), z_words.data(), words)) {
        head_dominant = false;
        break;
      }
    }
    if (head_dominant) {
      for (const std::uint64_t* p : pure_minima) {
        if (words_subset(p, z_words.data(), words) && !words_equal(p, z_words.data(), words)) {
          head_dominant = false;
          break;
        }
      }
    }
    if (!head_dominant) continue;

    Bipartition b;
    b.z = z.to_element_set();
    for (std::size_t i = 0; i < k; ++i)
      ((h & (std::uint32_t{1} << i)) ? b.head : b.tail).push_back(ids[i]);
    splits.push_back(std::move(b));
  }
  return splits;
}

}  // namespace detail

/// True iff no Z within the generating subset factors `path` into two
/// nonempty, disjoint edge sets M(A,Z) ∘ M(Z,{x}) whose head is a dominant
/// metapath.
inline bool is_irreducible(const Metagraph& mg, const Metapath& path,
                           const ElementSet& generating_subset, OracleBudget budget = {}) {
  validate_edge_ids(mg, path.edge_ids);
  if (path.target.size() != 1)
    fail(Errc::invalid_params, "irreducibility is defined for single-element targets");
  detail::check_oracle_edges(mg, budget);
  if (path.edge_ids.size() < 2) return true;
  auto tables = detail::PowerSetTables::build(mg);
  return detail::factorization_splits(mg, path, generating_subset, tables).empty();
}

/// One node of the recursive decomposition: either an irreducible leaf or a
/// Z-split whose children are the head factor followed by the tail's
/// dominant sub-metapaths.
struct FactorizationNode {
  Metapath path;
  bool irreducible = false;
  ElementSet z;
  std::vector<ElementSet> z_choices;
  std::vector<FactorizationNode> children;
};

struct Factorization {
  std::vector<std::vector<EdgeId>> factors;  // dominant, irreducible leaf edge sets
  FactorizationNode structure;
  bool non_unique = false;  // some step admitted several Z choices
};

namespace detail {

// Dominant metapaths from A to {z} drawn from `pool` edges only; dominance is
// judged within that pool.
inline std::vector<Metapath> dominant_within(const Metagraph& mg, std::span<const EdgeId> pool,
                                             const ElementSet& source, ElementId z) {
  const std::size_t k = pool.size();
  const std::size_t n = mg.element_count();
  std::vector<ElementBits> inv(k), out(k);
  for (std::size_t i = 0; i < k; ++i) {
    inv[i] = ElementBits::of(mg.edge(pool[i]).invertex, n);
    out[i] = ElementBits::of(mg.edge(pool[i]).outvertex, n);
  }
  auto src = ElementBits::of(source, n);
  struct Cand {
    std::uint32_t mask;
    ElementBits pure;
  };
  std::vector<Cand> valid;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << k); ++mask) {
    ElementBits u_inv(n), u_out(n);
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (std::uint32_t{1} << i)) {
        u_inv |= inv[i];
        u_out |= out[i];
      }
    if (!u_out.test(z)) continue;
    ElementBits pure = u_inv;
    pure.subtract(u_out);
    if (!pure.subset_of(src)) continue;
    valid.push_back({mask, std::move(pure)});
  }
  std::vector<Metapath> result;
  for (const auto& c : valid) {
    bool dominated = false;
    for (const auto& o : valid) {
      bool pure_sub = o.pure.subset_of(c.pure);
      if (!pure_sub) continue;
      if (!(c.pure == o.pure)) {
        dominated = true;  // input-dominance fails
        break;
      }
      if (o.mask != c.mask && (o.mask & c.mask) == o.mask) {
        dominated = true;  // edge-dominance fails
        break;
      }
    }
    if (dominated) continue;
    std::vector<EdgeId> ids;
    for (std::size_t i = 0; i < k; ++i)
      if (c.mask & (std::uint32_t{1} << i)) ids.push_back(pool[i]);
    result.push_back(Metapath{std::move(ids), c.pure.to_element_set(), ElementSet{z}});
  }
  std::sort(result.begin(), result.end());
  return result;
}

inline FactorizationNode factorize_node(const Metagraph& mg, const Metapath& path,
                                        const ElementSet& subset, const PowerSetTables& tables,
                                        bool& non_unique,
                                        std::vector<std::vector<EdgeId>>& factors) {
  FactorizationNode node;
  node.path = path;

  auto splits = factorization_splits(mg, path, subset, tables);
  if (splits.empty()) {
    node.irreducible = true;
    factors.push_back(path.edge_ids);
    return node;
  }

  // Prefer splits whose head cannot be factored further; the head then
  // becomes a leaf factor directly. A reducible head (possible when every
  // split stages through a reducible stretch) is decomposed recursively.
  std::vector<Bipartition> leaf_headed;
  for (const auto& s : splits) {
    Metapath head{s.head, s.z, path.target};
    if (factorization_splits(mg, head, subset, tables).empty()) leaf_headed.push_back(s);
  }
  const bool head_is_leaf = !leaf_headed.empty();
  std::vector<Bipartition>& pool = head_is_leaf ? leaf_headed : splits;

  std::sort(pool.begin(), pool.end(), [](const Bipartition& a, const Bipartition& b) {
    if (a.z != b.z) return a.z < b.z;
    return a.head < b.head;
  });
  for (const auto& s : pool)
    if (node.z_choices.empty() || node.z_choices.back() != s.z) node.z_choices.push_back(s.z);
  if (node.z_choices.size() > 1) non_unique = true;

  const Bipartition& chosen = pool.front();
  node.z = chosen.z;

  Metapath head{chosen.head, chosen.z, path.target};
  if (head_is_leaf) {
    FactorizationNode head_node;
    head_node.path = std::move(head);
    head_node.irreducible = true;
    factors.push_back(chosen.head);
    node.children.push_back(std::move(head_node));
  } else {
    node.children.push_back(factorize_node(mg, head, subset, tables, non_unique, factors));
  }

  for (ElementId z : chosen.z)
    for (auto& sub : dominant_within(mg, chosen.tail, path.source, z))
      node.children.push_back(factorize_node(mg, sub, subset, tables, non_unique, factors));
  return node;
}

}  // namespace detail

/// Recursively decomposes a dominant metapath into dominant, irreducible
/// factors over the generating subset. When several Z splits are admissible
/// at a step, the canonically smallest Z is chosen and the result is flagged
/// non-unique.
inline Factorization factorize_metapath(const Metagraph& mg, const Metapath& path,
                                        const ElementSet& generating_subset,
                                        OracleBudget budget = {}) {
  validate_edge_ids(mg, path.edge_ids);
  detail::check_oracle_edges(mg, budget);

  auto tables = detail::PowerSetTables::build(mg);
  Factorization f;
  std::vector<std::vector<EdgeId>> factors;
  f.structure = detail::factorize_node(mg, path, generating_subset, tables, f.non_unique, factors);
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  f.factors = std::move(factors);
  return f;
}

}  // namespace metagraph
