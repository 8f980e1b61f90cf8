// Command-line front end for the prescription-network analysis pipeline.
// Subcommands mirror the pipeline stages so any stage can be rerun on a
// prior stage's artifacts; `run` executes everything.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppn/ppn.hpp"

namespace {

struct CliOptions {
  std::string input;
  std::string graph_path;
  std::vector<std::string> schedules = {"II", "III", "IV"};
  std::string out_dir = "out";
  std::vector<std::string> formats = {"graphml", "geojson", "json", "csv"};
  std::uint64_t seed = 0;
  std::size_t ns = 99;
  double fence_k = 4.5;
  int swap_q = 10;
  std::vector<std::string> stoplist;
  std::string quartile_method = "linear";
  double s_threshold = 2.0;
  bool no_surrogates = false;
  bool use_drug_map = false;
  unsigned threads = 0;
};

std::vector<ppn::Schedule> parse_schedules(const std::vector<std::string>& tokens) {
  std::vector<ppn::Schedule> schedules;
  for (const auto& t : tokens) {
    auto s = ppn::parse_schedule(t);
    if (!s) throw ppn::ConfigError("unknown schedule value: " + t);
    schedules.push_back(*s);
  }
  return schedules;
}

ppn::QuartileMethod parse_quartile_method(const std::string& name) {
  if (name == "linear" || name == "linear_interpolation")
    return ppn::QuartileMethod::linear_interpolation;
  if (name == "hinges" || name == "tukey_hinges")
    return ppn::QuartileMethod::tukey_hinges;
  throw ppn::ConfigError("unknown quartile method: " + name);
}

ppn::PipelineConfig to_pipeline_config(const CliOptions& o, bool seed_given) {
  ppn::PipelineConfig c;
  c.input_path = o.input;
  c.schedules = parse_schedules(o.schedules);
  c.fence_k = o.fence_k;
  c.quartile_method = parse_quartile_method(o.quartile_method);
  c.stoplist = o.stoplist;
  c.n_s = o.ns;
  c.swap_factor_q = o.swap_q;
  if (seed_given) c.master_seed = o.seed;
  c.out_dir = o.out_dir;
  c.formats = o.formats;
  c.run_surrogates = !o.no_surrogates;
  c.use_drug_map = o.use_drug_map;
  c.rejection_threshold = o.s_threshold;
  c.threads = o.threads;
  return c;
}

// Parse + validate the claims file; header or I/O problems are input
// validation failures.
std::pair<ppn::ParseResult, ppn::ValidationResult> load_claims(const CliOptions& o) {
  if (o.input.empty()) throw ppn::ConfigError("no input file given (--input)");
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw ppn::ConfigError("cannot read input file: " + o.input);
  ppn::ParseResult parsed;
  try {
    parsed = ppn::parse_claims(in);
  } catch (const std::runtime_error& e) {
    throw ppn::ConfigError(e.what());
  }
  ppn::ValidationOptions vopts;
  if (o.use_drug_map) vopts.drug_schedule_map = &ppn::drug_schedule_reference();
  ppn::ValidationResult validated = ppn::validate_and_filter(parsed.records, vopts);
  return {std::move(parsed), std::move(validated)};
}

std::string out_path(const CliOptions& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / name).string();
}

ppn::WeightedGraph load_graph_artifact(const std::string& path, std::string& label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ppn::ConfigError("cannot read graph file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ppn::ConfigError("bad graph JSON in " + path + ": " + e.what());
  }
  label = j.value("schedule", std::string("graph"));
  return ppn::graph_from_json(j);
}

int cmd_validate(const CliOptions& o) {
  auto [parsed, validated] = load_claims(o);
  std::string clean_path = out_path(o, "clean_claims.csv");
  ppn::write_text_file(clean_path, ppn::claims_to_csv(validated.records));

  nlohmann::json j;
  j["input"] = o.input;
  j["parse_diagnostics"] = nlohmann::json::array();
  for (const auto& d : parsed.diagnostics)
    j["parse_diagnostics"].push_back({{"line", d.line}, {"message", d.message}});
  j["records_read"] = validated.report.records_read;
  j["records_kept"] = validated.report.records_kept;
  j["records_excluded"] = validated.report.records_excluded;
  j["records_missing_geo"] = validated.report.records_missing_geo;
  j["exclusion_reasons"] = validated.report.exclusion_reasons;
  ppn::write_text_file(out_path(o, "ingest.json"), j.dump(2) + "\n");

  std::cout << "read " << validated.report.records_read << " rows ("
            << parsed.diagnostics.size() << " malformed), kept "
            << validated.report.records_kept << ", excluded "
            << validated.report.records_excluded << "\n"
            << "wrote " << clean_path << "\n";
  return 0;
}

int cmd_build(const CliOptions& o) {
  auto [parsed, validated] = load_claims(o);
  auto buckets = ppn::partition_by_schedule(validated.records);
  auto wanted = parse_schedules(o.schedules);
  for (ppn::Schedule s : wanted) {
    const auto& bucket = buckets.at(s);
    std::string label = ppn::schedule_label(s);
    if (bucket.empty()) {
      std::cout << "schedule " << label << ": no records, skipped\n";
      continue;
    }
    auto ppn_graph = ppn::with_attrs(
        ppn::project(ppn::build_bipartite(bucket), ppn::Side::prescriber),
        ppn::collect_prescriber_attrs(bucket));
    std::string path = out_path(o, "ppn_" + label + ".graph.json");
    ppn::write_text_file(path, ppn::graph_to_json(ppn_graph, label).dump(2) + "\n");
    std::cout << "schedule " << label << ": PPN " << ppn_graph.num_nodes()
              << " nodes / " << ppn_graph.num_edges() << " edges -> " << path << "\n";
  }
  return 0;
}

int cmd_stats(const CliOptions& o) {
  auto [parsed, validated] = load_claims(o);
  auto buckets = ppn::partition_by_schedule(validated.records);
  nlohmann::json stats;
  for (ppn::Schedule s : parse_schedules(o.schedules)) {
    const auto& bucket = buckets.at(s);
    std::string label = ppn::schedule_label(s);
    auto profiles = ppn::prescriber_profiles(bucket);
    std::ostringstream csv;
    csv << "prescriber_id,specialty,total_prescriptions,distinct_patients,avg_count\n";
    for (const auto& p : profiles) {
      csv << ppn::detail::csv_escape(p.prescriber_id) << ","
          << ppn::detail::csv_escape(p.specialty) << "," << p.total_prescriptions
          << "," << p.distinct_patients << ","
          << ppn::detail::format_double(p.avg_count) << "\n";
    }
    std::string path = out_path(o, "profiles_" + label + ".csv");
    ppn::write_text_file(path, csv.str());

    nlohmann::json entry;
    entry["prescriptions"] = bucket.size();
    entry["prescriber_count"] = profiles.size();
    if (!bucket.empty()) {
      auto g = ppn::project(ppn::build_bipartite(bucket), ppn::Side::prescriber);
      auto degrees = ppn::degree_sequence(g);
      std::vector<double> values(degrees.begin(), degrees.end());
      try {
        auto m = ppn::distribution_moments(values);
        entry["degree_moments"] = {{"n", m.n},
                                   {"mean", m.mean},
                                   {"sd", m.sd},
                                   {"skewness", m.skewness},
                                   {"kurtosis", m.kurtosis},
                                   {"excess_kurtosis", m.excess_kurtosis}};
      } catch (const std::invalid_argument& e) {
        entry["degree_moments"] = nullptr;
      }
    }
    stats[label] = entry;
    std::cout << "schedule " << label << ": " << profiles.size()
              << " prescribers -> " << path << "\n";
  }
  ppn::write_text_file(out_path(o, "stats.json"), stats.dump(2) + "\n");
  return 0;
}

int cmd_outliers(const CliOptions& o) {
  auto [parsed, validated] = load_claims(o);
  auto buckets = ppn::partition_by_schedule(validated.records);
  ppn::QuartileMethod method = parse_quartile_method(o.quartile_method);
  std::set<std::string> stoplist(o.stoplist.begin(), o.stoplist.end());
  for (ppn::Schedule s : parse_schedules(o.schedules)) {
    const auto& bucket = buckets.at(s);
    std::string label = ppn::schedule_label(s);
    if (bucket.empty()) {
      std::cout << "schedule " << label << ": no records, skipped\n";
      continue;
    }
    auto profiles = ppn::prescriber_profiles(bucket);
    std::vector<std::pair<std::string, double>> avg_by_id;
    for (const auto& p : profiles) avg_by_id.emplace_back(p.prescriber_id, p.avg_count);
    auto fence = ppn::tukey_extreme_outliers(avg_by_id, o.fence_k, method);
    auto freq = ppn::specialty_frequency(fence.flagged, profiles, stoplist);

    nlohmann::json j;
    j["schedule"] = label;
    j["q1"] = fence.q1;
    j["q3"] = fence.q3;
    j["iqr"] = fence.iqr;
    j["multiplier"] = fence.multiplier;
    j["threshold"] = fence.threshold;
    j["quartile_method"] = o.quartile_method;
    j["flagged_count"] = fence.flagged.size();
    j["flagged"] = fence.flagged;
    j["specialty_frequency"] = nlohmann::json::array();
    for (const auto& [name, count] : freq)
      j["specialty_frequency"].push_back({{"specialty", name}, {"count", count}});
    ppn::write_text_file(out_path(o, "outliers_" + label + ".json"), j.dump(2) + "\n");
    ppn::write_text_file(out_path(o, "wordcloud_" + label + ".csv"),
                         ppn::wordcloud_csv(freq));
    std::cout << "schedule " << label << ": flagged " << fence.flagged.size()
              << " of " << profiles.size() << " (threshold "
              << ppn::detail::format_double(fence.threshold) << ")\n";
  }
  return 0;
}

int cmd_communities(const CliOptions& o) {
  if (o.graph_path.empty())
    throw ppn::ConfigError("communities needs a graph artifact (--graph)");
  std::string label;
  ppn::WeightedGraph g = load_graph_artifact(o.graph_path, label);
  if (g.num_nodes() == 0) throw ppn::ConfigError("graph artifact is empty");
  ppn::WeightedGraph lcc = ppn::largest_connected_component(g);
  nlohmann::json j;
  j["schedule"] = label;
  j["lcc_nodes"] = lcc.num_nodes();
  j["lcc_edges"] = lcc.num_edges();
  if (lcc.num_edges() == 0) {
    j["communities"] = nullptr;
    j["notice"] = "LCC has no edges; nothing to cluster";
  } else {
    ppn::ScheduleArtifacts art;
    art.report.schedule = label;
    art.lcc = lcc;
    ppn::SimpleGraph simple = lcc.simple_view();
    ppn::Dendrogram dendro = ppn::cluster_links(simple);
    ppn::BestPartition best = ppn::best_partition(simple, dendro);
    art.lcc_partition = best.partition;
    art.lcc_memberships = ppn::node_communities(simple, best.partition);
    ppn::CommunitySummary cs;
    cs.community_count = static_cast<std::size_t>(best.partition.num_communities);
    for (const auto& members : art.lcc_memberships)
      if (members.size() > 1) ++cs.overlapping_nodes;
    cs.max_partition_density = best.density;
    cs.cut_similarity = best.cut_similarity;
    art.report.communities = cs;
    j = ppn::communities_to_json(art);
    j["lcc_nodes"] = lcc.num_nodes();
    j["lcc_edges"] = lcc.num_edges();
  }
  std::string path = out_path(o, "communities_" + label + ".json");
  ppn::write_text_file(path, j.dump(2) + "\n");
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_surrogate(const CliOptions& o, bool seed_given) {
  if (o.graph_path.empty())
    throw ppn::ConfigError("surrogate needs a graph artifact (--graph)");
  if (!seed_given) throw ppn::ConfigError("surrogate needs a seed (--seed)");
  if (o.ns < 2) throw ppn::ConfigError("n_s must be >= 2");
  std::string label;
  ppn::WeightedGraph g = load_graph_artifact(o.graph_path, label);
  if (g.num_nodes() == 0) throw ppn::ConfigError("graph artifact is empty");
  ppn::WeightedGraph lcc = ppn::largest_connected_component(g);
  nlohmann::json j;
  j["schedule"] = label;
  j["lcc_nodes"] = lcc.num_nodes();
  j["lcc_edges"] = lcc.num_edges();
  if (lcc.num_edges() == 0) {
    j["surrogate"] = nullptr;
    j["notice"] = "LCC has no edges; surrogate test skipped";
  } else {
    auto result = ppn::surrogate_test(lcc.simple_view(),
                                      ppn::max_partition_density_statistic, o.ns,
                                      o.seed, o.swap_q, o.s_threshold, o.threads);
    ppn::ScheduleReport rep;
    rep.surrogate = result;
    j["surrogate"] = ppn::to_json(rep)["surrogate"];
    std::cout << "S = "
              << (std::isinf(result.s_score) ? std::string("inf")
                                             : ppn::detail::format_double(result.s_score))
              << (result.rejected ? " (rejected)" : " (not rejected)") << "\n";
  }
  std::string path = out_path(o, "surrogate_" + label + ".json");
  ppn::write_text_file(path, j.dump(2) + "\n");
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_export(const CliOptions& o) {
  auto wants = [&](const std::string& fmt) {
    return std::find(o.formats.begin(), o.formats.end(), fmt) != o.formats.end();
  };
  std::vector<std::pair<std::string, ppn::WeightedGraph>> graphs;
  if (!o.graph_path.empty()) {
    std::string label;
    ppn::WeightedGraph g = load_graph_artifact(o.graph_path, label);
    graphs.emplace_back(label, std::move(g));
  } else {
    auto [parsed, validated] = load_claims(o);
    auto buckets = ppn::partition_by_schedule(validated.records);
    for (ppn::Schedule s : parse_schedules(o.schedules)) {
      const auto& bucket = buckets.at(s);
      if (bucket.empty()) continue;
      graphs.emplace_back(
          ppn::schedule_label(s),
          ppn::with_attrs(
              ppn::project(ppn::build_bipartite(bucket), ppn::Side::prescriber),
              ppn::collect_prescriber_attrs(bucket)));
    }
  }
  for (const auto& [label, g] : graphs) {
    if (wants("graphml")) {
      std::string path = out_path(o, "ppn_" + label + ".graphml");
      ppn::export_graphml(g, path);
      std::cout << "wrote " << path << "\n";
    }
    if (wants("graphjson")) {
      std::string path = out_path(o, "ppn_" + label + ".graph.json");
      ppn::write_text_file(path, ppn::graph_to_json(g, label).dump(2) + "\n");
      std::cout << "wrote " << path << "\n";
    }
    if (wants("geojson")) {
      std::string path = out_path(o, "ppn_" + label + ".geojson");
      try {
        auto stats = ppn::export_geojson(g, path);
        std::cout << "wrote " << path << " (" << stats.points_written << " points, "
                  << stats.lines_written << " lines)\n";
      } catch (const std::runtime_error& e) {
        std::filesystem::remove(path);
        std::cout << "geojson for " << label << " skipped: " << e.what() << "\n";
      }
    }
  }
  return 0;
}

int cmd_run(const CliOptions& o, bool seed_given) {
  ppn::PipelineConfig config = to_pipeline_config(o, seed_given);
  ppn::PipelineResult result = ppn::run_pipeline(config);
  for (const auto& rep : result.reports) {
    std::cout << "schedule " << rep.schedule << ": " << rep.prescriptions
              << " prescriptions, PPN " << rep.ppn_nodes << "/" << rep.ppn_edges
              << ", LCC " << rep.lcc_nodes << "/" << rep.lcc_edges;
    if (rep.fence) std::cout << ", flagged " << rep.fence->flagged.size();
    if (rep.communities)
      std::cout << ", D_max "
                << ppn::detail::format_double(rep.communities->max_partition_density);
    if (rep.surrogate)
      std::cout << ", S "
                << (std::isinf(rep.surrogate->s_score)
                        ? std::string("inf")
                        : ppn::detail::format_double(rep.surrogate->s_score))
                << (rep.surrogate->rejected ? " (rejected)" : " (not rejected)");
    std::cout << "\n";
    for (const auto& w : rep.warnings) std::cout << "  warning: " << w << "\n";
  }
  for (const auto& f : result.files_written) std::cout << "wrote " << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescriber-prescriber network analysis pipeline"};
  app.require_subcommand(1);

  CliOptions o;

  auto add_common = [&](CLI::App* cmd, bool with_claims_opts = true) {
    cmd->set_config("--config", "", "Config file (key=value, flags override)");
    cmd->allow_config_extras(true);
    if (with_claims_opts) {
      cmd->add_option("--input", o.input, "Claims CSV file");
      cmd->add_option("--schedules", o.schedules, "Schedules to analyze")
          ->delimiter(',');
      cmd->add_flag("--use-drug-map", o.use_drug_map,
                    "Override the schedule column from the built-in drug map");
    }
    cmd->add_option("--out", o.out_dir, "Output directory");
    return cmd;
  };

  auto* validate = add_common(app.add_subcommand("validate", "Parse and validate claims"));
  auto* build = add_common(app.add_subcommand("build", "Build PPN graph artifacts"));
  auto* stats = add_common(app.add_subcommand("stats", "Prescriber profiles and degree moments"));

  auto* outliers = add_common(app.add_subcommand(
      "outliers", "Tukey extreme-outlier flags on average prescription counts"));
  outliers->add_option("--fence-k", o.fence_k, "Fence multiplier");
  outliers->add_option("--quartile-method", o.quartile_method,
                       "linear|hinges quartile estimator");
  outliers->add_option("--stoplist", o.stoplist, "Specialties to drop")->delimiter(',');

  auto* communities = add_common(
      app.add_subcommand("communities", "Link communities on a graph artifact's LCC"),
      false);
  communities->add_option("--graph", o.graph_path, "Graph artifact (.graph.json)");

  auto* surrogate = add_common(
      app.add_subcommand("surrogate", "Surrogate test on a graph artifact's LCC"),
      false);
  surrogate->add_option("--graph", o.graph_path, "Graph artifact (.graph.json)");
  auto* surr_seed = surrogate->add_option("--seed", o.seed, "Master seed");
  surrogate->add_option("--ns", o.ns, "Number of surrogate realizations");
  surrogate->add_option("--swap-q", o.swap_q, "Swap attempts per edge");
  surrogate->add_option("--s-threshold", o.s_threshold, "Rejection threshold on S");
  surrogate->add_option("--threads", o.threads, "Worker threads (0 = auto)");

  auto* exp = add_common(app.add_subcommand("export", "Write GraphML/GeoJSON exports"));
  exp->add_option("--graph", o.graph_path, "Graph artifact instead of claims input");
  exp->add_option("--formats", o.formats, "graphml,geojson,graphjson")->delimiter(',');

  auto* run = add_common(app.add_subcommand("run", "Full pipeline"));
  auto* run_seed = run->add_option("--seed", o.seed, "Master seed (required unless --no-surrogates)");
  run->add_option("--ns", o.ns, "Number of surrogate realizations");
  run->add_option("--fence-k", o.fence_k, "Fence multiplier");
  run->add_option("--swap-q", o.swap_q, "Swap attempts per edge");
  run->add_option("--stoplist", o.stoplist, "Specialties to drop")->delimiter(',');
  run->add_option("--formats", o.formats, "graphml,geojson,json,csv,graphjson")
      ->delimiter(',');
  run->add_option("--quartile-method", o.quartile_method, "linear|hinges quartile estimator");
  run->add_option("--s-threshold", o.s_threshold, "Rejection threshold on S");
  run->add_flag("--no-surrogates", o.no_surrogates, "Skip the surrogate stage");
  run->add_option("--threads", o.threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (validate->parsed()) return cmd_validate(o);
    if (build->parsed()) return cmd_build(o);
    if (stats->parsed()) return cmd_stats(o);
    if (outliers->parsed()) return cmd_outliers(o);
    if (communities->parsed()) return cmd_communities(o);
    if (surrogate->parsed()) return cmd_surrogate(o, surr_seed->count() > 0);
    if (exp->parsed()) return cmd_export(o);
    if (run->parsed()) return cmd_run(o, run_seed->count() > 0);
  } catch (const ppn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
