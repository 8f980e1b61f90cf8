#ifndef PPN_EXPORTS_HPP
#define PPN_EXPORTS_HPP

#include <charconv>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ppn/graph.hpp"

namespace ppn {

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Shortest round-trip decimal form; locale-independent.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

}  // namespace detail

// GraphML with node keys {specialty, latitude, longitude, degree} and edge
// key {weight}. Nodes and edges are written in sorted id order so identical
// graphs serialize byte-identically. Geo keys are omitted for nodes without
// coordinates; specialty is omitted when empty.
inline void export_graphml(const WeightedGraph& g, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"d_specialty\" for=\"node\" attr.name=\"specialty\" attr.type=\"string\"/>\n"
      << "  <key id=\"d_latitude\" for=\"node\" attr.name=\"latitude\" attr.type=\"double\"/>\n"
      << "  <key id=\"d_longitude\" for=\"node\" attr.name=\"longitude\" attr.type=\"double\"/>\n"
      << "  <key id=\"d_degree\" for=\"node\" attr.name=\"degree\" attr.type=\"long\"/>\n"
      << "  <key id=\"d_weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n"
      << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    const NodeAttr& a = g.attrs()[v];
    out << "    <node id=\"" << detail::xml_escape(g.ids()[v]) << "\">\n";
    if (!a.specialty.empty())
      out << "      <data key=\"d_specialty\">" << detail::xml_escape(a.specialty)
          << "</data>\n";
    if (a.has_geo()) {
      out << "      <data key=\"d_latitude\">" << detail::format_double(*a.latitude)
          << "</data>\n";
      out << "      <data key=\"d_longitude\">" << detail::format_double(*a.longitude)
          << "</data>\n";
    }
    out << "      <data key=\"d_degree\">" << g.degree(static_cast<NodeIndex>(v))
        << "</data>\n";
    out << "    </node>\n";
  }
  for (const auto& e : g.edges()) {
    out << "    <edge source=\"" << detail::xml_escape(g.id(e.u)) << "\" target=\""
        << detail::xml_escape(g.id(e.v)) << "\">\n"
        << "      <data key=\"d_weight\">" << e.weight << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

inline void export_graphml(const WeightedGraph& g, const std::string& path) {
  auto out = detail::open_output(path);
  export_graphml(g, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct GeoJsonStats {
  std::size_t points_written = 0;
  std::size_t lines_written = 0;
  std::size_t nodes_skipped_no_geo = 0;  // non-singleton nodes lacking coordinates
  std::size_t nodes_skipped_singleton = 0;
  std::size_t edges_skipped_no_geo = 0;
};

// RFC 7946 FeatureCollection: one Point per geo-located non-singleton node
// (properties id, degree, specialty) and one LineString per edge whose two
// endpoints both carry coordinates (property weight). Coordinates are
// [longitude, latitude]. Throws if not a single node qualifies for a Point.
inline GeoJsonStats export_geojson(const WeightedGraph& g, std::ostream& out) {
  GeoJsonStats stats;
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    const NodeAttr& a = g.attrs()[v];
    if (g.degree(static_cast<NodeIndex>(v)) == 0) {
      ++stats.nodes_skipped_singleton;
      continue;
    }
    if (!a.has_geo()) {
      ++stats.nodes_skipped_no_geo;
      continue;
    }
    nlohmann::json f;
    f["type"] = "Feature";
    f["geometry"]["type"] = "Point";
    f["geometry"]["coordinates"] = {*a.longitude, *a.latitude};
    f["properties"]["id"] = g.ids()[v];
    f["properties"]["degree"] = g.degree(static_cast<NodeIndex>(v));
    f["properties"]["specialty"] = a.specialty;
    features.push_back(std::move(f));
    ++stats.points_written;
  }
  if (stats.points_written == 0)
    throw std::runtime_error("export_geojson: no geo-located non-singleton nodes");
  for (const auto& e : g.edges()) {
    const NodeAttr& au = g.attrs()[static_cast<std::size_t>(e.u)];
    const NodeAttr& av = g.attrs()[static_cast<std::size_t>(e.v)];
    if (!au.has_geo() || !av.has_geo()) {
      ++stats.edges_skipped_no_geo;
      continue;
    }
    nlohmann::json f;
    f["type"] = "Feature";
    f["geometry"]["type"] = "LineString";
    f["geometry"]["coordinates"] = {{*au.longitude, *au.latitude},
                                    {*av.longitude, *av.latitude}};
    f["properties"]["weight"] = e.weight;
    features.push_back(std::move(f));
    ++stats.lines_written;
  }
  nlohmann::json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);
  out << doc.dump(2) << "\n";
  return stats;
}

inline GeoJsonStats export_geojson(const WeightedGraph& g, const std::string& path) {
  auto out = detail::open_output(path);
  GeoJsonStats stats = export_geojson(g, out);
  if (!out) throw std::runtime_error("write failed: " + path);
  return stats;
}

}  // namespace ppn

#endif  // PPN_EXPORTS_HPP
