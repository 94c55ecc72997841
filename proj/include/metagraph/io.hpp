#pragma once

// Document format and exports: a canonical JSON metagraph document, the
// projection document with optional reverse maps, and bipartite DOT output.
//
// Canonical form: UTF-8, LF line endings, two-space indentation, object keys
// in lexicographic order, element name arrays sorted ascending by name, the
// generating set in declaration (interning) order. parse(serialize(g)) == g
// and serialize(parse(d)) is byte-stable.

#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metagraph/core.hpp"
#include "metagraph/projection.hpp"

namespace metagraph {

inline constexpr int kFormatVersion = 1;

namespace detail {

inline nlohmann::json sorted_names(const Metagraph& mg, const ElementSet& s) {
  std::vector<std::string> names = mg.names_of(s);
  std::sort(names.begin(), names.end());
  return nlohmann::json(names);
}

[[noreturn]] inline void bad_document(const std::string& what) {
  fail(Errc::semantic_error, what);
}

inline void check_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      bad_document("unknown field '" + it.key() + "' in " + where);
  }
}

inline std::vector<std::string> string_array(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) bad_document(where + " must be an array");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) bad_document(where + " must contain strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Parses a metagraph document. Unknown fields are rejected; the reverse-map
/// fields of projection documents ("kind", per-edge "paths") are accepted and
/// ignored, so projection output parses back as a plain metagraph.
inline Metagraph parse_metagraph(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::syntax_error, e.what());
  }
  if (!doc.is_object()) detail::bad_document("top level must be an object");
  detail::check_keys(doc, {"format_version", "generating_set", "edges", "kind"}, "document");
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer())
    detail::bad_document("missing integer 'format_version'");
  if (doc["format_version"].get<int>() != kFormatVersion)
    fail(Errc::version_error,
         "unsupported format_version " + doc["format_version"].dump());
  if (!doc.contains("generating_set") || !doc.contains("edges"))
    detail::bad_document("missing 'generating_set' or 'edges'");
  if (doc.contains("kind") && !doc["kind"].is_string())
    detail::bad_document("'kind' must be a string");

  std::vector<std::string> elements =
      detail::string_array(doc["generating_set"], "'generating_set'");

  if (!doc["edges"].is_array()) detail::bad_document("'edges' must be an array");
  std::vector<Metagraph::NamedEdge> edges;
  std::vector<std::string> labels;
  for (const auto& e : doc["edges"]) {
    if (!e.is_object()) detail::bad_document("each edge must be an object");
    detail::check_keys(e, {"id", "invertex", "outvertex", "paths"}, "edge");
    if (!e.contains("id") || !e["id"].is_string())
      detail::bad_document("each edge needs a string 'id'");
    if (!e.contains("invertex") || !e.contains("outvertex"))
      detail::bad_document("each edge needs 'invertex' and 'outvertex'");
    if (e.contains("paths")) {
      if (!e["paths"].is_array()) detail::bad_document("edge 'paths' must be an array");
      for (const auto& p : e["paths"]) detail::string_array(p, "reverse-map path");
    }
    labels.push_back(e["id"].get<std::string>());
    edges.push_back({detail::string_array(e["invertex"], "'invertex'"),
                     detail::string_array(e["outvertex"], "'outvertex'")});
  }
  try {
    return Metagraph::create(elements, edges, std::move(labels));
  } catch (const Error& err) {
    if (err.code() == Errc::duplicate_element || err.code() == Errc::duplicate_edge ||
        err.code() == Errc::element_not_in_generating_set)
      detail::bad_document(err.what());
    throw;
  }
}

inline std::string serialize_metagraph(const Metagraph& mg) {
  nlohmann::json doc;
  doc["format_version"] = kFormatVersion;
  doc["generating_set"] = mg.element_names();
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : mg.edges()) {
    nlohmann::json je;
    je["id"] = mg.edge_label(e.id);
    je["invertex"] = detail::sorted_names(mg, e.invertex);
    je["outvertex"] = detail::sorted_names(mg, e.outvertex);
    edges.push_back(std::move(je));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

/// Serializes a projection as a metagraph document (edges already sorted by
/// invertex at construction). With the reverse map enabled each edge carries
/// its originating metapaths as arrays of original edge ids.
inline std::string serialize_projection(const ProjectionResult& result,
                                        bool include_reverse_map) {
  nlohmann::json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = result.kind == ProjectionKind::tpp ? "tpp" : "bbp";
  doc["generating_set"] = result.projected.element_names();
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : result.projected.edges()) {
    nlohmann::json je;
    je["id"] = result.projected.edge_label(e.id);
    je["invertex"] = detail::sorted_names(result.projected, e.invertex);
    je["outvertex"] = detail::sorted_names(result.projected, e.outvertex);
    if (include_reverse_map) {
      nlohmann::json paths = nlohmann::json::array();
      for (const Metapath& m : result.reverse_map[e.id]) {
        nlohmann::json ids = nlohmann::json::array();
        for (EdgeId i : m.edge_ids) ids.push_back(result.original_edge_labels[i]);
        paths.push_back(std::move(ids));
      }
      je["paths"] = std::move(paths);
    }
    edges.push_back(std::move(je));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

/// Bipartite DOT rendering: one ellipse node per element, one small box node
/// per metagraph edge, arcs element->box for invertex members and
/// box->element for outvertex members. Highlighted edges get a color.
inline std::string export_dot(const Metagraph& mg,
                              std::span<const EdgeId> highlight = {}) {
  std::vector<char> marked(mg.edge_count(), 0);
  for (EdgeId i : highlight) {
    if (i >= mg.edge_count()) fail(Errc::invalid_edge_id, std::to_string(i));
    marked[i] = 1;
  }
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('"');
    return out;
  };

  std::ostringstream os;
  os << "digraph metagraph {\n";
  os << "  rankdir=LR;\n";
  for (ElementId x : mg.generating_set())
    os << "  x" << x << " [shape=ellipse, label=" << quote(mg.name(x)) << "];\n";
  for (const Edge& e : mg.edges()) {
    os << "  e" << e.id << " [shape=box, width=0.25, height=0.2, label="
       << quote(mg.edge_label(e.id));
    if (marked[e.id]) os << ", color=red, penwidth=2";
    os << "];\n";
  }
  for (const Edge& e : mg.edges()) {
    for (ElementId x : e.invertex) os << "  x" << x << " -> e" << e.id << ";\n";
    for (ElementId x : e.outvertex) os << "  e" << e.id << " -> x" << x << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace metagraph
