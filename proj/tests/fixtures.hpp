#pragma once

// Shared test graphs and independent brute-force oracles. The oracles here
// deliberately avoid the search code in pathfinding.hpp: they enumerate the
// edge power set and filter with the core is_metapath predicate only.

#include <cstdint>
#include <set>
#include <vector>

#include "metagraph/core.hpp"

namespace mgtest {

using namespace metagraph;

// The motivating example graph: X = {x1..x8}, E = {e1..e5}.
inline Metagraph motivating_graph() {
  return Metagraph::create(
      {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"},
      {
          {{"x1"}, {"x3", "x4"}},        // e1
          {{"x3"}, {"x6"}},              // e2
          {{"x2"}, {"x5"}},              // e3
          {{"x4", "x5"}, {"x7"}},        // e4
          {{"x6", "x7"}, {"x8"}},        // e5
      });
}

// Graph with two admissible factorization splits over
// X' = {A,B,D,E,F,G,H}: Z = {B,F} or Z = {E,D}.
inline Metagraph ambiguous_factorization_graph() {
  return Metagraph::create({"A", "B", "C", "D", "E", "F", "G", "H"},
                           {
                               {{"G"}, {"E"}},
                               {{"H"}, {"F"}},
                               {{"E"}, {"B", "C"}},
                               {{"F"}, {"C", "D"}},
                               {{"B", "C", "D"}, {"A"}},
                           });
}

// All nonempty edge subsets S with is_metapath(S, source, target) that are
// minimal under inclusion, as sorted id vectors in lexicographic order.
inline std::vector<std::vector<EdgeId>> brute_force_minimal_metapaths(const Metagraph& mg,
                                                                      const ElementSet& source,
                                                                      const ElementSet& target) {
  const std::size_t m = mg.edge_count();
  std::vector<std::uint32_t> valid;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<EdgeId> ids;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (1u << k)) ids.push_back(static_cast<EdgeId>(k));
    if (is_metapath(mg, ids, source, target)) valid.push_back(mask);
  }
  std::vector<std::vector<EdgeId>> out;
  for (std::uint32_t mask : valid) {
    bool minimal = true;
    for (std::uint32_t other : valid) {
      if (other != mask && (other & mask) == other) {
        minimal = false;
        break;
      }
    }
    if (!minimal) continue;
    std::vector<EdgeId> ids;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (1u << k)) ids.push_back(static_cast<EdgeId>(k));
    out.push_back(std::move(ids));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Tiny deterministic generator for property tests, independent of the
// library's random graph generator.
struct TestRng {
  std::uint64_t state;
  explicit TestRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// Random metagraph over `elems` elements with up to `edges` distinct edges.
inline Metagraph random_graph(TestRng& rng, unsigned elems, unsigned edges,
                              unsigned max_vertex = 3) {
  std::vector<std::string> names;
  for (unsigned i = 0; i < elems; ++i) names.push_back("x" + std::to_string(i + 1));
  auto draw_vertex = [&]() {
    unsigned size = 1 + static_cast<unsigned>(rng.below(max_vertex));
    std::set<std::string> v;
    while (v.size() < size) v.insert(names[rng.below(elems)]);
    return std::vector<std::string>(v.begin(), v.end());
  };
  std::set<std::pair<std::vector<std::string>, std::vector<std::string>>> seen;
  std::vector<Metagraph::NamedEdge> edge_list;
  unsigned attempts = 0;
  while (edge_list.size() < edges && attempts < 200 * edges + 50) {
    ++attempts;
    auto e = std::make_pair(draw_vertex(), draw_vertex());
    if (seen.insert(e).second) edge_list.push_back(e);
  }
  return Metagraph::create(names, edge_list);
}

inline ElementSet random_subset(TestRng& rng, const Metagraph& mg, unsigned max_size,
                                unsigned min_size = 0) {
  std::vector<ElementId> ids;
  unsigned want = min_size + static_cast<unsigned>(rng.below(max_size - min_size + 1));
  while (ids.size() < want) {
    ElementId x = static_cast<ElementId>(rng.below(mg.element_count()));
    if (std::find(ids.begin(), ids.end(), x) == ids.end()) ids.push_back(x);
  }
  return ElementSet(std::move(ids));
}

}  // namespace mgtest
