#include "metagraph/pathfinding.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"

using namespace metagraph;
using mgtest::brute_force_minimal_metapaths;
using mgtest::motivating_graph;

namespace {

std::vector<EdgeId> sorted(std::vector<EdgeId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

TEST(SinglePath, MotivatingExample) {
  Metagraph g = motivating_graph();
  auto r = get_single_metapath(g, g.elements({"x1"}), g.elements({"x6"}));
  ASSERT_TRUE(r.found());
  EXPECT_FALSE(r.trivially_connected);
  EXPECT_EQ(r.edges, (std::vector<EdgeId>{0, 1}));  // e1 then e2
}

TEST(SinglePath, NoPathUpstream) {
  Metagraph g = motivating_graph();
  auto r = get_single_metapath(g, g.elements({"x8"}), g.elements({"x1"}));
  EXPECT_FALSE(r.found());
  EXPECT_TRUE(r.edges.empty());
}

TEST(SinglePath, TrivialWhenTargetInsideSource) {
  Metagraph g = motivating_graph();
  auto r = get_single_metapath(g, g.elements({"x1", "x6"}), g.elements({"x6"}));
  EXPECT_TRUE(r.trivially_connected);
  EXPECT_TRUE(r.edges.empty());
}

TEST(SinglePath, FoundIffBruteForceNonempty) {
  mgtest::TestRng rng(21);
  for (int iter = 0; iter < 300; ++iter) {
    Metagraph g = mgtest::random_graph(rng, 6, 6);
    ElementSet source = mgtest::random_subset(rng, g, 3, 1);
    ElementSet target = mgtest::random_subset(rng, g, 2, 1);
    if (target.subset_of(source)) continue;
    auto brute = brute_force_minimal_metapaths(g, source, target);
    auto r = get_single_metapath(g, source, target);
    EXPECT_FALSE(r.trivially_connected);
    ASSERT_EQ(!r.edges.empty(), !brute.empty())
        << "sources/targets disagree on existence at iter " << iter;
    if (!r.edges.empty()) {
      EXPECT_TRUE(is_metapath(g, r.edges, source, target));
      // No single-edge redundancy.
      for (std::size_t k = 0; k < r.edges.size(); ++k) {
        std::vector<EdgeId> without = r.edges;
        without.erase(without.begin() + static_cast<std::ptrdiff_t>(k));
        EXPECT_FALSE(is_metapath(g, without, source, target));
      }
    }
  }
}

TEST(SinglePath, ConstructiveOrder) {
  mgtest::TestRng rng(22);
  for (int iter = 0; iter < 100; ++iter) {
    Metagraph g = mgtest::random_graph(rng, 6, 6);
    ElementSet source = mgtest::random_subset(rng, g, 3, 1);
    ElementSet target = mgtest::random_subset(rng, g, 2, 1);
    if (target.subset_of(source)) continue;
    auto r = get_single_metapath(g, source, target);
    if (r.edges.empty()) continue;
    // Each edge's invertex should be covered by the source plus the
    // outvertices of the preceding edges whenever such an order exists; when
    // it does not (cyclic support), the metapath predicate still must hold.
    ElementSet bag = source;
    bool constructive = true;
    for (EdgeId i : r.edges) {
      if (!g.edge(i).invertex.subset_of(bag)) constructive = false;
      bag = set_union(bag, g.edge(i).outvertex);
    }
    if (!constructive) {
      EXPECT_TRUE(is_metapath(g, r.edges, source, target));
    }
  }
}

TEST(Superpath, MotivatingExamples) {
  Metagraph g = motivating_graph();
  EXPECT_EQ(get_superpath(g, g.elements({"x1", "x2"}), g.elements({"x8"})),
            (std::vector<EdgeId>{0, 1, 2, 3, 4}));
  EXPECT_EQ(get_superpath(g, g.elements({"x1"}), g.elements({"x6"})),
            (std::vector<EdgeId>{0, 1}));
  EXPECT_TRUE(get_superpath(g, g.elements({"x2"}), g.elements({"x6"})).empty());
}

TEST(Superpath, CoversEveryMinimalMetapath) {
  mgtest::TestRng rng(31);
  for (int iter = 0; iter < 200; ++iter) {
    Metagraph g = mgtest::random_graph(rng, 6, 7);
    ElementSet source = mgtest::random_subset(rng, g, 3, 1);
    ElementSet target = mgtest::random_subset(rng, g, 2, 1);
    auto super = get_superpath(g, source, target);
    std::set<EdgeId> super_set(super.begin(), super.end());
    for (const auto& path : brute_force_minimal_metapaths(g, source, target))
      for (EdgeId i : path)
        EXPECT_TRUE(super_set.count(i)) << "edge " << i << " missing from superpath";
    EXPECT_LE(super.size(), g.edge_count());
  }
}

TEST(Combining, SharedInvertexMerges) {
  Metagraph g = Metagraph::create({"a", "b", "c"}, {{{"a"}, {"b"}}, {{"a"}, {"c"}}});
  auto plan = build_combined_edge_plan(g, std::vector<EdgeId>{0, 1});
  ASSERT_EQ(plan.extended_edges.size(), 3u);
  ASSERT_EQ(plan.replacement_map.size(), 1u);
  const auto& [synthetic, members] = *plan.replacement_map.begin();
  EXPECT_EQ(synthetic, 2u);
  EXPECT_EQ(members, (std::vector<EdgeId>{0, 1}));
  EXPECT_EQ(plan.extended_edges[2].invertex, g.elements({"a"}));
  EXPECT_EQ(plan.extended_edges[2].outvertex, g.elements({"b", "c"}));
  // Only the synthetic edge is searchable for invertex {a}.
  EXPECT_EQ(plan.search_edges, (std::vector<EdgeId>{2}));
}

TEST(Combining, MultiplyFedOutputBlocksMerge) {
  Metagraph g = Metagraph::create({"a", "b", "c", "d"},
                                  {{{"a"}, {"b"}}, {{"a"}, {"c"}}, {{"d"}, {"c"}}});
  auto plan = build_combined_edge_plan(g, std::vector<EdgeId>{0, 1, 2});
  EXPECT_TRUE(plan.replacement_map.empty());
  EXPECT_EQ(plan.extended_edges.size(), 3u);
  EXPECT_EQ(plan.search_edges, (std::vector<EdgeId>{0, 1, 2}));
}

// A star root with 14 outgoing edges mirrors the branching pattern that makes
// uncombined searches explode; combining collapses it to a single edge.
TEST(Combining, StarRootCollapses) {
  std::vector<std::string> names{"root", "t"};
  for (int x = 9; x <= 29; ++x) names.push_back(std::to_string(x));
  std::vector<Metagraph::NamedEdge> edges;
  for (int x = 9; x <= 15; ++x) edges.push_back({{"root"}, {std::to_string(x)}});
  for (int x = 16; x <= 28; x += 2)
    edges.push_back({{"root"}, {std::to_string(x), std::to_string(x + 1)}});
  edges.push_back({{"9", "16"}, {"t"}});
  Metagraph g = Metagraph::create(names, edges);

  std::vector<EdgeId> all;
  for (EdgeId i = 0; i < g.edge_count(); ++i) all.push_back(i);
  auto plan = build_combined_edge_plan(g, all);
  ASSERT_EQ(plan.replacement_map.size(), 1u);
  EXPECT_EQ(plan.replacement_map.begin()->second.size(), 14u);
  // Root branching drops from 2^14 subsets to a single searchable edge.
  std::size_t root_fanout = plan.index.values_for_subsets_of(g.elements({"root"})).size();
  EXPECT_EQ(root_fanout, 1u);

  auto paths = get_all_metapaths(g, g.elements({"root"}), g.elements({"t"}));
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0], (std::vector<EdgeId>{0, 7, 14}));  // {root->9, root->{16,17}, hop}
}

TEST(Enumeration, MotivatingGoldens) {
  Metagraph g = motivating_graph();
  // Only {e5}: both longer alternatives strictly contain a found path.
  auto to_x8 = get_all_metapaths(g, g.elements({"x1", "x2", "x6", "x7"}), g.elements({"x8"}));
  ASSERT_EQ(to_x8.size(), 1u);
  EXPECT_EQ(to_x8[0], (std::vector<EdgeId>{4}));

  auto to_x7 = get_all_metapaths(g, g.elements({"x1", "x2", "x6", "x8"}), g.elements({"x7"}));
  ASSERT_EQ(to_x7.size(), 1u);
  EXPECT_EQ(to_x7[0], (std::vector<EdgeId>{0, 2, 3}));

  EXPECT_TRUE(get_all_metapaths(g, g.elements({"x2"}), g.elements({"x6"})).empty());
}

TEST(Enumeration, MatchesBruteForceWithAndWithoutCombining) {
  mgtest::TestRng rng(41);
  int checked = 0;
  for (int iter = 0; iter < 250; ++iter) {
    Metagraph g = mgtest::random_graph(rng, 6, 7);
    ElementSet source = mgtest::random_subset(rng, g, 3, 1);
    ElementSet target = mgtest::random_subset(rng, g, 2, 1);
    if (target.subset_of(source)) continue;
    auto brute = brute_force_minimal_metapaths(g, source, target);
    for (bool combine : {true, false}) {
      auto got = get_all_metapaths(g, source, target, {.combine_edges = combine});
      std::sort(got.begin(), got.end());
      EXPECT_EQ(got, brute) << "combine=" << combine << " iter=" << iter;
    }
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(Enumeration, FirstYieldHasFewestEdges) {
  mgtest::TestRng rng(43);
  for (int iter = 0; iter < 150; ++iter) {
    Metagraph g = mgtest::random_graph(rng, 6, 6);
    ElementSet source = mgtest::random_subset(rng, g, 3, 1);
    ElementSet target = mgtest::random_subset(rng, g, 2, 1);
    if (target.subset_of(source)) continue;
    auto brute = brute_force_minimal_metapaths(g, source, target);
    if (brute.empty()) continue;
    std::size_t fewest = brute.front().size();
    for (const auto& p : brute) fewest = std::min(fewest, p.size());
    MetapathStream stream(g, source, target);
    auto first = stream.next();
    ASSERT_TRUE(first.has_value());
    EXPECT_EQ(first->size(), fewest);
  }
}

TEST(Enumeration, EveryYieldIsAMetapath) {
  mgtest::TestRng rng(44);
  for (int iter = 0; iter < 100; ++iter) {
    Metagraph g = mgtest::random_graph(rng, 7, 7);
    ElementSet source = mgtest::random_subset(rng, g, 3, 1);
    ElementSet target = mgtest::random_subset(rng, g, 2, 1);
    if (target.subset_of(source)) continue;
    for (const auto& p : get_all_metapaths(g, source, target))
      EXPECT_TRUE(is_metapath(g, p, source, target));
  }
}

// Redundancy assertion for the dropped metapath clause: on graphs without
// supply cycles, every yielded edge lies on a simple path from the source to
// the target (consecutive outvertex/invertex overlap). Cyclic self-support
// is the documented exception, so those instances are filtered out here.
TEST(Enumeration, YieldsSatisfySimplePathClauseOnAcyclicGraphs) {
  mgtest::TestRng rng(47);
  auto on_simple_path = [](const Metagraph& g, const std::vector<EdgeId>& path,
                           const ElementSet& source, const ElementSet& target) {
    std::set<EdgeId> from_source, to_target;
    for (bool grew = true; grew;) {
      grew = false;
      for (EdgeId i : path) {
        if (from_source.count(i)) continue;
        bool reach = g.edge(i).invertex.intersects(source);
        for (EdgeId j : from_source)
          if (g.edge(j).outvertex.intersects(g.edge(i).invertex)) reach = true;
        if (reach) {
          from_source.insert(i);
          grew = true;
        }
      }
    }
    for (bool grew = true; grew;) {
      grew = false;
      for (EdgeId i : path) {
        if (to_target.count(i)) continue;
        bool reach = g.edge(i).outvertex.intersects(target);
        for (EdgeId j : to_target)
          if (g.edge(i).outvertex.intersects(g.edge(j).invertex)) reach = true;
        if (reach) {
          to_target.insert(i);
          grew = true;
        }
      }
    }
    for (EdgeId i : path)
      if (!from_source.count(i) || !to_target.count(i)) return false;
    return true;
  };
  int checked = 0;
  for (int iter = 0; iter < 2000; ++iter) {
    Metagraph g = mgtest::random_graph(rng, 9, 5, 2);
    std::vector<EdgeId> all;
    for (EdgeId i = 0; i < g.edge_count(); ++i) all.push_back(i);
    if (detail::has_supply_cycle(g, all)) continue;
    ElementSet source = mgtest::random_subset(rng, g, 4, 1);
    ElementSet target = mgtest::random_subset(rng, g, 2, 1);
    if (target.subset_of(source)) continue;
    auto single = get_single_metapath(g, source, target);
    if (!single.edges.empty()) {
      EXPECT_TRUE(on_simple_path(g, single.edges, source, target));
    }
    for (const auto& p : get_all_metapaths(g, source, target)) {
      EXPECT_TRUE(on_simple_path(g, p, source, target));
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Enumeration, StreamingStopsEarly) {
  Metagraph g = motivating_graph();
  MetapathStream stream(g, g.elements({"x1", "x2", "x6", "x7"}), g.elements({"x8"}));
  auto first = stream.next();
  ASSERT_TRUE(first.has_value());
  // Dropping the stream after one yield is legal; nothing more is computed.
}

TEST(Enumeration, TrivialTargetYieldsNothing) {
  Metagraph g = motivating_graph();
  MetapathStream stream(g, g.elements({"x6", "x7"}), g.elements({"x6"}));
  EXPECT_TRUE(stream.trivially_connected());
  EXPECT_FALSE(stream.next().has_value());
}

TEST(Expansion, IntersectionFilter) {
  Metagraph g = Metagraph::create({"a", "b", "c", "d"},
                                  {{{"a"}, {"b"}}, {{"a"}, {"c"}}, {{"b"}, {"d"}}});
  auto plan = build_combined_edge_plan(g, std::vector<EdgeId>{0, 1, 2});
  ASSERT_EQ(plan.replacement_map.size(), 1u);
  EdgeId synthetic = plan.replacement_map.begin()->first;
  auto expanded =
      expand_metapath(plan, std::vector<EdgeId>{synthetic, 2}, g.elements({"d"}));
  EXPECT_EQ(expanded, (std::vector<EdgeId>{0, 2}));  // keeps ({a},{b}), drops ({a},{c})
}

TEST(Expansion, IdentityWithoutSynthetics) {
  Metagraph g = motivating_graph();
  std::vector<EdgeId> all{0, 1, 2, 3, 4};
  auto plan = build_combined_edge_plan(g, all);
  EXPECT_EQ(expand_metapath(plan, std::vector<EdgeId>{0, 3}, g.elements({"x7"})),
            (std::vector<EdgeId>{0, 3}));
}

TEST(Expansion, TargetClauseKeepsProducer) {
  Metagraph g = Metagraph::create({"a", "b", "c", "d"},
                                  {{{"a"}, {"b"}}, {{"a"}, {"c"}}, {{"b"}, {"d"}}});
  auto plan = build_combined_edge_plan(g, std::vector<EdgeId>{0, 1, 2});
  EdgeId synthetic = plan.replacement_map.begin()->first;
  // Without the target clause the only kept member would feed the path's own
  // inputs; the target {c} forces ({a},{c}) through.
  auto expanded = expand_metapath(plan, std::vector<EdgeId>{synthetic}, g.elements({"c"}));
  EXPECT_EQ(expanded, (std::vector<EdgeId>{1}));
}

TEST(Expansion, RejectsUnknownCombinedEdge) {
  Metagraph g = motivating_graph();
  auto plan = build_combined_edge_plan(g, std::vector<EdgeId>{0, 1});
  try {
    expand_metapath(plan, std::vector<EdgeId>{99}, g.elements({"x6"}));
    FAIL() << "expected UnknownCombinedEdge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_combined_edge);
  }
}

}  // namespace
