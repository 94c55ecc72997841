#pragma once

// Command-line frontend: path search, projections, instance generation, DOT
// export, invariant verification, and a TPP-vs-brute-force benchmark over
// metagraph documents. Exit codes: 0 success, 1 domain error (no path,
// budget exhausted, failed verification), 2 usage error.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metagraph/core.hpp"
#include "metagraph/generators.hpp"
#include "metagraph/io.hpp"
#include "metagraph/pathfinding.hpp"
#include "metagraph/projection.hpp"

namespace metagraph::cli {

namespace detail {

inline std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(csv);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  std::ifstream file(path);
  if (!file) fail(Errc::invalid_params, "cannot open input file '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

inline void write_output(const std::string& path, std::ostream& out, const std::string& text) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) fail(Errc::invalid_params, "cannot open output file '" + path + "'");
  file << text;
}

inline std::string path_line(const Metagraph& mg, std::span<const EdgeId> ids) {
  std::string line;
  for (EdgeId i : ids) {
    if (!line.empty()) line += ' ';
    line += mg.edge_label(i);
  }
  return line;
}

// Brute-force minimal metapath sets, used by `verify` as the independent
// reference for the search.
inline std::vector<std::vector<EdgeId>> brute_minimal(const Metagraph& mg,
                                                      const ElementSet& source,
                                                      const ElementSet& target) {
  const std::size_t m = mg.edge_count();
  std::vector<std::uint32_t> valid;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << m); ++mask) {
    std::vector<EdgeId> ids;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (std::uint32_t{1} << k)) ids.push_back(static_cast<EdgeId>(k));
    if (is_metapath(mg, ids, source, target)) valid.push_back(mask);
  }
  std::vector<std::vector<EdgeId>> out;
  for (std::uint32_t mask : valid) {
    bool minimal = true;
    for (std::uint32_t other : valid)
      if (other != mask && (other & mask) == other) {
        minimal = false;
        break;
      }
    if (!minimal) continue;
    std::vector<EdgeId> ids;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (std::uint32_t{1} << k)) ids.push_back(static_cast<EdgeId>(k));
    out.push_back(std::move(ids));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline int run_verify(const Metagraph& mg, const OracleBudget& budget, std::ostream& out) {
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok) {
    out << (ok ? "PASS " : "FAIL ") << name << "\n";
    all_ok = all_ok && ok;
  };

  report("round-trip", parse_metagraph(serialize_metagraph(mg)) == mg);
  {
    std::string once = serialize_metagraph(mg);
    report("canonical-stability", serialize_metagraph(parse_metagraph(once)) == once);
  }

  const ElementSet& full = mg.generating_set();
  {
    auto first = tpp(mg, full);
    auto again = tpp(first.projected, first.projected.generating_set());
    report("tpp-idempotence", again.projected == first.projected);
  }

  if (mg.edge_count() <= budget.max_edges) {
    bool paths_ok = true;
    for (ElementId x : full) {
      ElementSet source = set_difference(full, ElementSet{x});
      auto got = get_all_metapaths(mg, source, ElementSet{x});
      std::sort(got.begin(), got.end());
      if (got != brute_minimal(mg, source, ElementSet{x})) paths_ok = false;
    }
    report("path-enumeration", paths_ok);

    bool tpp_ok = true;
    auto fast = tpp(mg, full);
    std::map<ElementSet, ElementSet> oracle_edges, fast_edges;
    for (ElementId x : full) {
      ElementSet source = set_difference(full, ElementSet{x});
      for (const auto& m : enumerate_dominant_metapaths_oracle(mg, source, ElementSet{x}, budget)) {
        if (!is_irreducible(mg, m, full, budget)) continue;
        auto& w = oracle_edges[m.source];
        w = set_union(w, ElementSet{x});
      }
    }
    for (const Edge& e : fast.projected.edges())
      fast_edges[mg.elements(fast.projected.names_of(e.invertex))] =
          mg.elements(fast.projected.names_of(e.outvertex));
    tpp_ok = fast_edges == oracle_edges;
    report("tpp-oracle-equivalence", tpp_ok);
  } else {
    out << "SKIP path-enumeration (budget: " << mg.edge_count() << " edges)\n";
    out << "SKIP tpp-oracle-equivalence (budget: " << mg.edge_count() << " edges)\n";
  }
  return all_ok ? 0 : 1;
}

inline int run_bench(unsigned max_n, const OracleBudget& budget, std::ostream& out) {
  out << std::left << std::setw(5) << "n" << std::setw(8) << "|E|" << std::setw(11)
      << "tpp-edges" << std::setw(11) << "tpp-ms" << std::setw(11) << "bbp-edges"
      << std::setw(11) << "bbp-ms" << "\n";
  using Clock = std::chrono::steady_clock;
  for (unsigned n = 1; n <= max_n; ++n) {
    auto inst = gen_hn(n);
    auto t0 = Clock::now();
    auto fast = tpp(inst.metagraph, inst.projection_set);
    auto t1 = Clock::now();
    double tpp_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    out << std::left << std::setw(5) << n << std::setw(8) << inst.metagraph.edge_count()
        << std::setw(11) << fast.projected.edge_count() << std::setw(11) << std::fixed
        << std::setprecision(2) << tpp_ms;
    if (inst.metagraph.edge_count() <= budget.max_edges &&
        inst.projection_set.size() <= budget.max_subset) {
      auto t2 = Clock::now();
      auto slow = bbp_oracle(inst.metagraph, inst.projection_set, budget);
      auto t3 = Clock::now();
      out << std::setw(11) << slow.projected.edge_count() << std::setw(11)
          << std::chrono::duration<double, std::milli>(t3 - t2).count();
    } else {
      out << std::setw(11) << "-" << std::setw(11) << "DNF(budget)";
    }
    out << "\n";
  }
  return 0;
}

}  // namespace detail

/// Runs the CLI with the given arguments (no program name) and streams.
inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Transitivity preserving projection toolkit for directed metagraphs"};
  app.require_subcommand(1);

  std::string input = "-";
  std::string output = "-";

  auto add_io = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input)
      cmd->add_option("-i,--input", input, "Input metagraph document (- for stdin)");
    cmd->add_option("-o,--output", output, "Output file (- for stdout)");
  };

  // path
  std::string source_csv, target_csv;
  bool all_paths = false;
  std::size_t limit = 0;
  auto* cmd_path = app.add_subcommand("path", "Find one metapath or stream all minimal ones");
  cmd_path->add_option("--source", source_csv, "Comma-separated source elements")->required();
  cmd_path->add_option("--target", target_csv, "Comma-separated target elements")->required();
  cmd_path->add_flag("--all", all_paths, "Enumerate all minimal metapaths");
  cmd_path->add_option("--limit", limit, "Stop after N metapaths (0 = no limit)");
  add_io(cmd_path, true);

  // tpp
  std::string subset_csv;
  bool reverse_map = false;
  unsigned threads = 1;
  auto* cmd_tpp = app.add_subcommand("tpp", "Transitivity preserving projection");
  cmd_tpp->add_option("--subset", subset_csv, "Comma-separated projection subset")->required();
  cmd_tpp->add_flag("--reverse-map", reverse_map, "Include originating metapaths per edge");
  cmd_tpp->add_option("--threads", threads, "Worker threads for per-target searches");
  add_io(cmd_tpp, true);

  // bbp
  std::size_t budget_edges = OracleBudget{}.max_edges;
  std::size_t budget_subset = OracleBudget{}.max_subset;
  auto* cmd_bbp = app.add_subcommand("bbp", "Brute-force projection oracle");
  cmd_bbp->add_option("--subset", subset_csv, "Comma-separated projection subset")->required();
  cmd_bbp->add_flag("--reverse-map", reverse_map, "Include originating metapaths per edge");
  cmd_bbp->add_option("--budget-edges", budget_edges, "Power-set enumeration bound");
  cmd_bbp->add_option("--budget-subset", budget_subset, "Projection subset bound");
  add_io(cmd_bbp, true);

  // gen-hn
  unsigned hn_n = 1;
  auto* cmd_gen_hn = app.add_subcommand("gen-hn", "Generate the adversarial H_n instance");
  cmd_gen_hn->add_option("--n", hn_n, "Number of body fragments")->required();
  add_io(cmd_gen_hn, false);

  // gen-rand
  RandomGraphParams rand_params;
  auto* cmd_gen_rand = app.add_subcommand("gen-rand", "Generate a seeded random metagraph");
  cmd_gen_rand->add_option("--elements", rand_params.num_elements, "Element count")->required();
  cmd_gen_rand->add_option("--edges", rand_params.num_edges, "Edge count")->required();
  cmd_gen_rand->add_option("--max-vertex", rand_params.max_vertex_size, "Max vertex size")
      ->required();
  cmd_gen_rand->add_option("--seed", rand_params.seed, "64-bit seed");
  add_io(cmd_gen_rand, false);

  // dot
  std::string highlight_csv;
  auto* cmd_dot = app.add_subcommand("dot", "Export as a bipartite DOT digraph");
  cmd_dot->add_option("--highlight", highlight_csv, "Comma-separated edge ids to highlight");
  add_io(cmd_dot, true);

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "Run the invariant suite on a document");
  cmd_verify->add_option("--budget-edges", budget_edges, "Power-set enumeration bound");
  cmd_verify->add_option("--budget-subset", budget_subset, "Projection subset bound");
  add_io(cmd_verify, true);

  // bench
  std::string suite = "hn";
  unsigned max_n = 4;
  auto* cmd_bench = app.add_subcommand("bench", "Time TPP against the brute-force oracle");
  cmd_bench->add_option("--suite", suite, "Benchmark suite (hn)")
      ->check(CLI::IsMember({"hn"}));
  cmd_bench->add_option("--max-n", max_n, "Largest H_n instance");
  cmd_bench->add_option("--budget-edges", budget_edges, "Power-set enumeration bound");
  cmd_bench->add_option("--budget-subset", budget_subset, "Projection subset bound");
  add_io(cmd_bench, false);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    OracleBudget budget{budget_edges, budget_subset};
    if (cmd_path->parsed()) {
      Metagraph mg = parse_metagraph(detail::read_input(input, in));
      ElementSet source = mg.elements(detail::split_names(source_csv));
      ElementSet target = mg.elements(detail::split_names(target_csv));
      std::ostringstream lines;
      bool found_any = false;
      bool trivial = false;
      if (all_paths) {
        MetapathStream stream(mg, source, target);
        trivial = stream.trivially_connected();
        std::size_t count = 0;
        while (auto ids = stream.next()) {
          lines << detail::path_line(mg, *ids) << "\n";
          found_any = true;
          if (limit && ++count == limit) break;
        }
      } else {
        auto r = get_single_metapath(mg, source, target);
        trivial = r.trivially_connected;
        if (!r.edges.empty()) {
          lines << detail::path_line(mg, r.edges) << "\n";
          found_any = true;
        }
      }
      detail::write_output(output, out, lines.str());
      if (!found_any && !trivial) {
        err << "no metapath from {" << source_csv << "} to {" << target_csv << "}\n";
        return 1;
      }
      return 0;
    }
    if (cmd_tpp->parsed()) {
      Metagraph mg = parse_metagraph(detail::read_input(input, in));
      ElementSet subset = mg.elements(detail::split_names(subset_csv));
      auto result = tpp(mg, subset, {.threads = threads});
      detail::write_output(output, out, serialize_projection(result, reverse_map));
      return 0;
    }
    if (cmd_bbp->parsed()) {
      Metagraph mg = parse_metagraph(detail::read_input(input, in));
      ElementSet subset = mg.elements(detail::split_names(subset_csv));
      auto result = bbp_oracle(mg, subset, budget);
      detail::write_output(output, out, serialize_projection(result, reverse_map));
      return 0;
    }
    if (cmd_gen_hn->parsed()) {
      auto inst = gen_hn(hn_n);
      detail::write_output(output, out, serialize_metagraph(inst.metagraph));
      return 0;
    }
    if (cmd_gen_rand->parsed()) {
      detail::write_output(output, out, serialize_metagraph(gen_random(rand_params)));
      return 0;
    }
    if (cmd_dot->parsed()) {
      Metagraph mg = parse_metagraph(detail::read_input(input, in));
      std::vector<EdgeId> highlight;
      for (const std::string& label : detail::split_names(highlight_csv))
        highlight.push_back(mg.edge_by_label(label));
      detail::write_output(output, out, export_dot(mg, highlight));
      return 0;
    }
    if (cmd_verify->parsed()) {
      Metagraph mg = parse_metagraph(detail::read_input(input, in));
      std::ostringstream report;
      int rc = detail::run_verify(mg, budget, report);
      detail::write_output(output, out, report.str());
      return rc;
    }
    if (cmd_bench->parsed()) {
      std::ostringstream report;
      int rc = detail::run_bench(max_n, budget, report);
      detail::write_output(output, out, report.str());
      return rc;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace metagraph::cli
