#ifndef PPN_PIPELINE_HPP
#define PPN_PIPELINE_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppn/claims.hpp"
#include "ppn/exports.hpp"
#include "ppn/graph.hpp"
#include "ppn/link_communities.hpp"
#include "ppn/report.hpp"
#include "ppn/stats.hpp"
#include "ppn/surrogate.hpp"

namespace ppn {

// Configuration/input problems detected before analysis starts (CLI exit 1);
// anything thrown later is a runtime failure (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::string input_path;
  std::vector<Schedule> schedules = {Schedule::II, Schedule::III, Schedule::IV};
  double fence_k = 4.5;
  QuartileMethod quartile_method = QuartileMethod::linear_interpolation;
  std::vector<std::string> stoplist;
  std::size_t n_s = 99;
  int swap_factor_q = 10;
  std::optional<std::uint64_t> master_seed;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"graphml", "geojson", "json", "csv"};
  bool run_surrogates = true;
  bool use_drug_map = false;
  double rejection_threshold = 2.0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

inline void validate_config(const PipelineConfig& c) {
  if (c.input_path.empty()) throw ConfigError("no input file given");
  if (!std::filesystem::exists(c.input_path))
    throw ConfigError("input file does not exist: " + c.input_path);
  if (c.schedules.empty()) throw ConfigError("no schedules selected");
  if (c.fence_k < 0) throw ConfigError("fence multiplier must be >= 0");
  if (c.n_s < 2) throw ConfigError("n_s must be >= 2");
  if (c.swap_factor_q < 0) throw ConfigError("swap factor must be >= 0");
  if (c.run_surrogates && !c.master_seed)
    throw ConfigError("a master seed is required when surrogates are enabled");
  static const std::set<std::string> known = {"graphml", "geojson", "json",
                                              "csv", "graphjson"};
  for (const auto& f : c.formats) {
    if (!known.count(f)) throw ConfigError("unknown export format: " + f);
  }
}

inline ReportConfig report_config(const PipelineConfig& c) {
  ReportConfig rc;
  rc.input_path = c.input_path;
  rc.fence_k = c.fence_k;
  rc.quartile_method = c.quartile_method;
  rc.stoplist = c.stoplist;
  rc.n_s = c.n_s;
  rc.swap_factor_q = c.swap_factor_q;
  rc.master_seed = c.master_seed;
  rc.rejection_threshold = c.rejection_threshold;
  rc.drug_map_override = c.use_drug_map;
  rc.surrogates_enabled = c.run_surrogates;
  return rc;
}

// ---------------------------------------------------------------------------
// Stage artifacts

inline nlohmann::json graph_to_json(const WeightedGraph& g,
                                    const std::string& schedule_label) {
  nlohmann::json j;
  j["schedule"] = schedule_label;
  j["nodes"] = nlohmann::json::array();
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    nlohmann::json node;
    node["id"] = g.ids()[v];
    const NodeAttr& a = g.attrs()[v];
    if (!a.specialty.empty()) node["specialty"] = a.specialty;
    if (a.has_geo()) {
      node["latitude"] = *a.latitude;
      node["longitude"] = *a.longitude;
    }
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) {
    j["edges"].push_back({{"source", g.id(e.u)},
                          {"target", g.id(e.v)},
                          {"weight", e.weight}});
  }
  return j;
}

inline WeightedGraph graph_from_json(const nlohmann::json& j) {
  std::vector<std::string> ids;
  std::vector<NodeAttr> attrs_raw;
  for (const auto& node : j.at("nodes")) {
    ids.push_back(node.at("id").get<std::string>());
    NodeAttr a;
    if (node.contains("specialty")) a.specialty = node["specialty"].get<std::string>();
    if (node.contains("latitude") && node.contains("longitude")) {
      a.latitude = node["latitude"].get<double>();
      a.longitude = node["longitude"].get<double>();
    }
    attrs_raw.push_back(std::move(a));
  }
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  std::vector<std::string> sorted_ids;
  std::vector<NodeAttr> sorted_attrs;
  for (std::size_t i : order) {
    sorted_ids.push_back(ids[i]);
    sorted_attrs.push_back(attrs_raw[i]);
  }
  auto index_of = [&](const std::string& id) {
    auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
    if (it == sorted_ids.end() || *it != id)
      throw std::runtime_error("graph JSON references unknown node id: " + id);
    return static_cast<NodeIndex>(it - sorted_ids.begin());
  };
  std::vector<WeightedEdge> edges;
  for (const auto& e : j.at("edges")) {
    edges.push_back({index_of(e.at("source").get<std::string>()),
                     index_of(e.at("target").get<std::string>()),
                     e.value("weight", std::int64_t{1})});
  }
  return WeightedGraph(std::move(sorted_ids), std::move(sorted_attrs), std::move(edges));
}

inline std::string schedule_label(Schedule s) { return std::string(to_string(s)); }

inline void write_text_file(const std::string& path, const std::string& content) {
  auto out = detail::open_output(path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Canonical claims CSV serialization (the `validate` stage artifact).
inline std::string claims_to_csv(const std::vector<ClaimRecord>& records) {
  std::ostringstream out;
  out << "prescriber_id,patient_id,drug_name,schedule,specialty,latitude,"
         "longitude,dispense_date\n";
  for (const auto& r : records) {
    std::ostringstream date;
    if (r.dispense_date) {
      date << std::setfill('0') << std::setw(4) << r.dispense_date->year << "-"
           << std::setw(2) << r.dispense_date->month << "-" << std::setw(2)
           << r.dispense_date->day;
    }
    std::vector<std::string> cells = {
        detail::csv_escape(r.prescriber_id),
        detail::csv_escape(r.patient_id),
        detail::csv_escape(r.drug_name),
        std::string(to_string(r.schedule)),
        detail::csv_escape(r.specialty),
        r.latitude ? detail::format_double(*r.latitude) : "",
        r.longitude ? detail::format_double(*r.longitude) : "",
        date.str()};
    out << detail::join(cells, ',') << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Per-schedule analysis

struct ScheduleArtifacts {
  ScheduleReport report;
  WeightedGraph ppn;  // with node attributes attached
  WeightedGraph lcc;
  LinkPartition lcc_partition;                         // valid when communities ran
  std::vector<std::vector<NodeIndex>> lcc_memberships;  // node -> community ids
};

// Runs every analysis stage for one schedule bucket. Degenerate inputs never
// crash: empty buckets and edgeless LCCs produce zeroed sections plus a
// warning in the report.
inline ScheduleArtifacts analyze_schedule(Schedule schedule,
                                          const std::vector<ClaimRecord>& bucket,
                                          const PipelineConfig& config) {
  ScheduleArtifacts art;
  ScheduleReport& rep = art.report;
  rep.schedule = schedule_label(schedule);
  rep.prescriptions = bucket.size();
  if (bucket.empty()) {
    rep.warnings.push_back("no validated records for this schedule; all stages skipped");
    return art;
  }

  BipartiteGraph bipartite = build_bipartite(bucket);
  art.ppn = with_attrs(project(bipartite, Side::prescriber),
                       collect_prescriber_attrs(bucket));
  rep.ppn_nodes = art.ppn.num_nodes();
  rep.ppn_edges = art.ppn.num_edges();
  for (std::size_t v = 0; v < art.ppn.num_nodes(); ++v)
    if (art.ppn.degree(static_cast<NodeIndex>(v)) == 0) ++rep.singleton_count;

  std::vector<PrescriberProfile> profiles = prescriber_profiles(bucket);
  rep.prescriber_count = profiles.size();
  std::vector<std::pair<std::string, double>> avg_by_id;
  avg_by_id.reserve(profiles.size());
  for (const auto& p : profiles) avg_by_id.emplace_back(p.prescriber_id, p.avg_count);
  rep.fence = tukey_extreme_outliers(avg_by_id, config.fence_k, config.quartile_method);
  std::set<std::string> stoplist(config.stoplist.begin(), config.stoplist.end());
  rep.specialty_frequencies =
      specialty_frequency(rep.fence->flagged, profiles, stoplist);

  {
    auto degrees = degree_sequence(art.ppn);
    std::vector<double> values(degrees.begin(), degrees.end());
    if (values.size() >= 2) {
      try {
        rep.degree_moments = distribution_moments(values);
      } catch (const std::invalid_argument&) {
        rep.warnings.push_back("degree moments undefined (constant degree sequence)");
      }
    } else {
      rep.warnings.push_back("degree moments undefined (fewer than 2 nodes)");
    }
  }

  art.lcc = largest_connected_component(art.ppn);
  rep.lcc_nodes = art.lcc.num_nodes();
  rep.lcc_edges = art.lcc.num_edges();

  if (rep.lcc_edges == 0) {
    rep.warnings.push_back("LCC has no edges; community and surrogate stages skipped");
    return art;
  }

  SimpleGraph simple = art.lcc.simple_view();
  Dendrogram dendro = cluster_links(simple);
  BestPartition best = best_partition(simple, dendro);
  art.lcc_partition = best.partition;
  art.lcc_memberships = node_communities(simple, best.partition);
  CommunitySummary cs;
  cs.community_count = static_cast<std::size_t>(best.partition.num_communities);
  for (const auto& members : art.lcc_memberships)
    if (members.size() > 1) ++cs.overlapping_nodes;
  cs.max_partition_density = best.density;
  cs.cut_similarity = best.cut_similarity;
  rep.communities = cs;

  if (config.run_surrogates) {
    // Independent seed per schedule so schedule order cannot matter.
    std::uint64_t schedule_seed =
        SplitMix64::derive(*config.master_seed, 0xabcdULL + static_cast<std::uint64_t>(schedule));
    rep.surrogate = surrogate_test(simple, max_partition_density_statistic,
                                   config.n_s, schedule_seed, config.swap_factor_q,
                                   config.rejection_threshold, config.threads);
  }
  return art;
}

inline nlohmann::json communities_to_json(const ScheduleArtifacts& art) {
  const SimpleGraph simple = art.lcc.simple_view();
  nlohmann::json j;
  j["schedule"] = art.report.schedule;
  if (!art.report.communities) {
    j["communities"] = nullptr;
    return j;
  }
  const auto& cs = *art.report.communities;
  j["max_partition_density"] = cs.max_partition_density;
  j["cut_similarity"] = cs.cut_similarity;
  j["community_count"] = cs.community_count;
  std::vector<nlohmann::json> communities(cs.community_count);
  for (std::size_t c = 0; c < cs.community_count; ++c) {
    communities[c]["id"] = c;
    communities[c]["edges"] = nlohmann::json::array();
    communities[c]["nodes"] = nlohmann::json::array();
  }
  std::vector<std::set<std::string>> node_sets(cs.community_count);
  for (std::size_t e = 0; e < simple.edges.size(); ++e) {
    auto c = static_cast<std::size_t>(art.lcc_partition.community_of_edge[e]);
    const std::string& u = art.lcc.id(simple.edges[e].first);
    const std::string& v = art.lcc.id(simple.edges[e].second);
    communities[c]["edges"].push_back({u, v});
    node_sets[c].insert(u);
    node_sets[c].insert(v);
  }
  for (std::size_t c = 0; c < cs.community_count; ++c)
    for (const auto& id : node_sets[c]) communities[c]["nodes"].push_back(id);
  j["communities"] = communities;
  j["overlapping_nodes"] = nlohmann::json::array();
  for (std::size_t v = 0; v < art.lcc_memberships.size(); ++v) {
    if (art.lcc_memberships[v].size() > 1)
      j["overlapping_nodes"].push_back(art.lcc.id(static_cast<NodeIndex>(v)));
  }
  return j;
}

inline std::string wordcloud_csv(
    const std::vector<std::pair<std::string, std::size_t>>& frequencies) {
  std::ostringstream out;
  out << "specialty,count\n";
  for (const auto& [name, count] : frequencies)
    out << detail::csv_escape(name) << "," << count << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Full pipeline

struct PipelineResult {
  std::vector<ScheduleReport> reports;
  std::vector<std::string> files_written;
};

inline PipelineResult run_pipeline(const PipelineConfig& config) {
  validate_config(config);
  std::ifstream in(config.input_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read input file: " + config.input_path);
  ParseResult parsed = parse_claims(in);

  ValidationOptions vopts;
  if (config.use_drug_map) vopts.drug_schedule_map = &drug_schedule_reference();
  ValidationResult validated = validate_and_filter(parsed.records, vopts);
  auto buckets = partition_by_schedule(validated.records);

  std::filesystem::create_directories(config.out_dir);
  auto out_path = [&](const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
  };
  auto wants = [&](const std::string& fmt) {
    return std::find(config.formats.begin(), config.formats.end(), fmt) !=
           config.formats.end();
  };

  PipelineResult result;
  for (Schedule s : config.schedules) {
    ScheduleArtifacts art = analyze_schedule(s, buckets.at(s), config);
    art.report.parse_rows_excluded = parsed.diagnostics.size();
    art.report.ingest = validated.report;
    const std::string label = schedule_label(s);

    if (art.report.prescriptions > 0) {
      if (wants("graphml")) {
        std::string path = out_path("ppn_" + label + ".graphml");
        export_graphml(art.ppn, path);
        result.files_written.push_back(path);
      }
      if (wants("graphjson")) {
        std::string path = out_path("ppn_" + label + ".graph.json");
        write_text_file(path, graph_to_json(art.ppn, label).dump(2) + "\n");
        result.files_written.push_back(path);
      }
      if (wants("geojson")) {
        std::string path = out_path("ppn_" + label + ".geojson");
        try {
          export_geojson(art.ppn, path);
          result.files_written.push_back(path);
        } catch (const std::runtime_error& e) {
          art.report.warnings.push_back(std::string("geojson export skipped: ") +
                                        e.what());
          std::filesystem::remove(path);
        }
      }
      if (wants("csv")) {
        std::string path = out_path("wordcloud_" + label + ".csv");
        write_text_file(path, wordcloud_csv(art.report.specialty_frequencies));
        result.files_written.push_back(path);
      }
      if (wants("json") && art.report.communities) {
        std::string path = out_path("communities_" + label + ".json");
        write_text_file(path, communities_to_json(art).dump(2) + "\n");
        result.files_written.push_back(path);
      }
    }
    result.reports.push_back(std::move(art.report));
  }

  ReportConfig rc = report_config(config);
  if (wants("json")) {
    std::string path = out_path("report.json");
    write_text_file(path, reports_to_json(result.reports, rc).dump(2) + "\n");
    result.files_written.push_back(path);
  }
  if (wants("csv")) {
    std::string path = out_path("report.csv");
    write_text_file(path, reports_to_csv(result.reports, rc));
    result.files_written.push_back(path);
  }
  return result;
}

}  // namespace ppn

#endif  // PPN_PIPELINE_HPP
