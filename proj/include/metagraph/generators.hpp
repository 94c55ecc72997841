#pragma once

// Deterministic instance generators: the adversarial H_n family whose
// brute-force projection grows quadratically while the TPP stays linear, and
// seeded random metagraphs for property testing.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "metagraph/core.hpp"

namespace metagraph {

/// H_n instance: the metagraph, its canonical projection set
/// X'_n = {A_i, B_i : 0 <= i <= n} ∪ {F_0}, and n.
struct HnInstance {
  Metagraph metagraph;
  ElementSet projection_set;
  unsigned n = 0;
};

/// Builds H_n from n body fragments plus the tail fragment. Body fragment i
/// contributes e1_i=({A_i},{C_i,D_i}), e2_i=({C_i},{A_{i-1}}),
/// e3_i=({B_i},{E_i}), e4_i=({D_i,E_i},{B_{i-1}}); the tail contributes
/// e0=({A_0,B_0},{F_0}). |E| = 4n + 1, and gen_hn(1) is isomorphic to the
/// x1..x8 motivating example.
inline HnInstance gen_hn(unsigned n) {
  if (n < 1) fail(Errc::invalid_n, "n must be at least 1");
  auto nm = [](const char* prefix, unsigned i) { return std::string(prefix) + std::to_string(i); };

  std::vector<std::string> elements;
  for (unsigned i = n; i >= 1; --i)
    for (const char* p : {"A", "B", "C", "D", "E"}) elements.push_back(nm(p, i));
  elements.push_back("A0");
  elements.push_back("B0");
  elements.push_back("F0");

  std::vector<Metagraph::NamedEdge> edges;
  std::vector<std::string> labels;
  for (unsigned i = n; i >= 1; --i) {
    edges.push_back({{nm("A", i)}, {nm("C", i), nm("D", i)}});
    edges.push_back({{nm("C", i)}, {nm("A", i - 1)}});
    edges.push_back({{nm("B", i)}, {nm("E", i)}});
    edges.push_back({{nm("D", i), nm("E", i)}, {nm("B", i - 1)}});
    for (const char* p : {"e1_", "e2_", "e3_", "e4_"}) labels.push_back(nm(p, i));
  }
  edges.push_back({{"A0", "B0"}, {"F0"}});
  labels.push_back("e0");

  HnInstance inst;
  inst.metagraph = Metagraph::create(elements, edges, labels);
  std::vector<std::string> subset{"F0"};
  for (unsigned i = 0; i <= n; ++i) {
    subset.push_back(nm("A", i));
    subset.push_back(nm("B", i));
  }
  inst.projection_set = inst.metagraph.elements(subset);
  inst.n = n;
  return inst;
}

struct RandomGraphParams {
  unsigned num_elements = 0;
  unsigned num_edges = 0;
  unsigned max_vertex_size = 1;
  std::uint64_t seed = 0;
  bool allow_empty_vertices = false;
};

namespace detail {

// splitmix64; self-contained so generated graphs are identical across
// platforms and standard library implementations.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

}  // namespace detail

/// Seeded random metagraph over elements x1..xN. Vertex sizes are uniform in
/// [1, max_vertex_size] ([0, max_vertex_size] when empty vertices are
/// enabled); duplicate (invertex, outvertex) pairs are redrawn.
inline Metagraph gen_random(const RandomGraphParams& params) {
  if (params.num_elements < 1) fail(Errc::invalid_params, "need at least one element");
  if (params.max_vertex_size > params.num_elements)
    fail(Errc::invalid_params, "max_vertex_size exceeds the element count");
  if (params.max_vertex_size < 1 && !params.allow_empty_vertices)
    fail(Errc::invalid_params, "max_vertex_size must be positive");

  std::vector<std::string> names;
  for (unsigned i = 1; i <= params.num_elements; ++i) names.push_back("x" + std::to_string(i));

  detail::SplitMix64 rng(params.seed);
  auto draw_vertex = [&]() {
    unsigned lo = params.allow_empty_vertices ? 0 : 1;
    unsigned size = lo + static_cast<unsigned>(rng.below(params.max_vertex_size - lo + 1));
    std::set<unsigned> picked;
    while (picked.size() < size) picked.insert(static_cast<unsigned>(rng.below(params.num_elements)));
    std::vector<std::string> v;
    for (unsigned i : picked) v.push_back(names[i]);
    return v;
  };

  std::set<Metagraph::NamedEdge> seen;
  std::vector<Metagraph::NamedEdge> edges;
  std::uint64_t attempts = 0;
  const std::uint64_t attempt_cap = 1000ull * params.num_edges + 100;
  while (edges.size() < params.num_edges) {
    if (++attempts > attempt_cap)
      fail(Errc::invalid_params, "cannot draw the requested number of distinct edges");
    Metagraph::NamedEdge e{draw_vertex(), draw_vertex()};
    if (seen.insert(e).second) edges.push_back(e);
  }
  return Metagraph::create(names, edges);
}

}  // namespace metagraph
