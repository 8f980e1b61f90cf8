#ifndef PPN_REPORT_HPP
#define PPN_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ppn/claims.hpp"
#include "ppn/exports.hpp"
#include "ppn/stats.hpp"
#include "ppn/surrogate.hpp"

namespace ppn {

struct CommunitySummary {
  std::size_t community_count = 0;
  std::size_t overlapping_nodes = 0;  // LCC nodes belonging to >1 community
  double max_partition_density = 0.0;
  double cut_similarity = 1.0;
};

// Everything the pipeline learned about one schedule. All numbers are
// recomputable from the input file plus the echoed configuration.
struct ScheduleReport {
  std::string schedule;
  std::size_t parse_rows_excluded = 0;  // malformed rows dropped before validation
  IngestReport ingest;                  // whole-input accounting (shared across schedules)
  std::size_t prescriptions = 0;        // validated claims in this schedule
  std::size_t prescriber_count = 0;
  std::size_t ppn_nodes = 0;
  std::size_t ppn_edges = 0;
  std::size_t singleton_count = 0;
  std::size_t lcc_nodes = 0;
  std::size_t lcc_edges = 0;
  std::optional<MomentSummary> degree_moments;  // absent when degenerate
  std::optional<FenceResult> fence;             // absent when no prescribers
  std::vector<std::pair<std::string, std::size_t>> specialty_frequencies;
  std::optional<CommunitySummary> communities;  // absent when LCC has no edges
  std::optional<SurrogateResult> surrogate;
  std::vector<std::string> warnings;
};

// Conventions and knobs echoed into every report so the numbers are
// interpretable without this source tree.
struct ReportConfig {
  std::string input_path;
  double fence_k = 4.5;
  QuartileMethod quartile_method = QuartileMethod::linear_interpolation;
  std::vector<std::string> stoplist;
  std::size_t n_s = 99;
  int swap_factor_q = 10;
  std::optional<std::uint64_t> master_seed;
  double rejection_threshold = 2.0;
  bool drug_map_override = false;
  bool surrogates_enabled = true;
};

inline nlohmann::json to_json(const ReportConfig& c) {
  nlohmann::json j;
  j["input"] = c.input_path;
  j["fence_k"] = c.fence_k;
  j["quartile_method"] = std::string(to_string(c.quartile_method));
  j["stoplist"] = c.stoplist;
  j["n_s"] = c.n_s;
  j["swap_factor_q"] = c.swap_factor_q;
  if (c.master_seed) j["master_seed"] = *c.master_seed;
  else j["master_seed"] = nullptr;
  j["rejection_threshold"] = c.rejection_threshold;
  j["drug_map_override"] = c.drug_map_override;
  j["surrogates_enabled"] = c.surrogates_enabled;
  j["conventions"]["central_moments"] = "population (1/n)";
  j["conventions"]["kurtosis"] = "raw (normal = 3), excess reported alongside";
  j["conventions"]["surrogate_sigma"] = "population (1/n_s)";
  j["conventions"]["fence_inequality"] = "strict (value > threshold)";
  return j;
}

inline nlohmann::json to_json(const ScheduleReport& r) {
  nlohmann::json j;
  j["schedule"] = r.schedule;
  j["ingest"]["records_read"] = r.ingest.records_read;
  j["ingest"]["records_kept"] = r.ingest.records_kept;
  j["ingest"]["records_excluded"] = r.ingest.records_excluded;
  j["ingest"]["records_missing_geo"] = r.ingest.records_missing_geo;
  j["ingest"]["exclusion_reasons"] = r.ingest.exclusion_reasons;
  j["ingest"]["parse_rows_excluded"] = r.parse_rows_excluded;
  j["prescriptions"] = r.prescriptions;
  j["prescriber_count"] = r.prescriber_count;
  j["ppn"]["nodes"] = r.ppn_nodes;
  j["ppn"]["edges"] = r.ppn_edges;
  j["ppn"]["singletons"] = r.singleton_count;
  j["lcc"]["nodes"] = r.lcc_nodes;
  j["lcc"]["edges"] = r.lcc_edges;
  if (r.degree_moments) {
    const auto& m = *r.degree_moments;
    j["degree_moments"] = {{"n", m.n},
                           {"mean", m.mean},
                           {"sd", m.sd},
                           {"skewness", m.skewness},
                           {"kurtosis", m.kurtosis},
                           {"excess_kurtosis", m.excess_kurtosis}};
  } else {
    j["degree_moments"] = nullptr;
  }
  if (r.fence) {
    const auto& f = *r.fence;
    j["outliers"] = {{"q1", f.q1},
                     {"q3", f.q3},
                     {"iqr", f.iqr},
                     {"multiplier", f.multiplier},
                     {"threshold", f.threshold},
                     {"flagged_count", f.flagged.size()},
                     {"flagged", f.flagged}};
  } else {
    j["outliers"] = nullptr;
  }
  j["specialty_frequency"] = nlohmann::json::array();
  for (const auto& [name, count] : r.specialty_frequencies)
    j["specialty_frequency"].push_back({{"specialty", name}, {"count", count}});
  if (r.communities) {
    const auto& c = *r.communities;
    j["communities"] = {{"count", c.community_count},
                        {"overlapping_nodes", c.overlapping_nodes},
                        {"max_partition_density", c.max_partition_density},
                        {"cut_similarity", c.cut_similarity}};
  } else {
    j["communities"] = nullptr;
  }
  if (r.surrogate) {
    const auto& s = *r.surrogate;
    bool s_inf = std::isinf(s.s_score);
    j["surrogate"] = {{"m_orig", s.m_orig},
                      {"mu_surr", s.mu_surr},
                      {"sigma_surr", s.sigma_surr},
                      {"s", s_inf ? nlohmann::json(nullptr) : nlohmann::json(s.s_score)},
                      {"s_infinite", s_inf},
                      {"rejected", s.rejected},
                      {"n_s", s.n_s},
                      {"master_seed", s.master_seed},
                      {"swap_factor_q", s.swap_factor_q},
                      {"rejection_threshold", s.rejection_threshold},
                      {"values", s.surrogate_values}};
  } else {
    j["surrogate"] = nullptr;
  }
  j["warnings"] = r.warnings;
  return j;
}

inline nlohmann::json reports_to_json(const std::vector<ScheduleReport>& reports,
                                      const ReportConfig& config) {
  nlohmann::json j;
  j["config"] = to_json(config);
  j["schedules"] = nlohmann::json::array();
  for (const auto& r : reports) j["schedules"].push_back(to_json(r));
  return j;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string csv_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

// One row per schedule, fixed column order. List-valued fields are joined
// with ';' inside a single cell.
inline std::string reports_to_csv(const std::vector<ScheduleReport>& reports,
                                  const ReportConfig& config) {
  std::ostringstream out;
  out << "schedule,records_read,records_kept,records_excluded,records_missing_geo,"
         "parse_rows_excluded,prescriptions,prescriber_count,ppn_nodes,ppn_edges,"
         "singletons,lcc_nodes,lcc_edges,degree_mean,degree_sd,degree_skewness,"
         "degree_kurtosis,degree_excess_kurtosis,fence_q1,fence_q3,fence_iqr,"
         "fence_multiplier,fence_threshold,flagged_count,flagged_ids,"
         "specialty_frequency,community_count,overlapping_nodes,"
         "max_partition_density,cut_similarity,s_m_orig,s_mu_surr,s_sigma_surr,"
         "s_score,s_rejected,n_s,swap_factor_q,master_seed,quartile_method,"
         "warnings\n";
  for (const auto& r : reports) {
    std::vector<std::string> cells;
    auto num = [&](auto v) { cells.push_back(std::to_string(v)); };
    auto dbl = [&](double v) { cells.push_back(detail::csv_double(v)); };
    auto str = [&](const std::string& s) { cells.push_back(detail::csv_escape(s)); };
    auto blank = [&](std::size_t n = 1) { cells.insert(cells.end(), n, ""); };
    str(r.schedule);
    num(r.ingest.records_read);
    num(r.ingest.records_kept);
    num(r.ingest.records_excluded);
    num(r.ingest.records_missing_geo);
    num(r.parse_rows_excluded);
    num(r.prescriptions);
    num(r.prescriber_count);
    num(r.ppn_nodes);
    num(r.ppn_edges);
    num(r.singleton_count);
    num(r.lcc_nodes);
    num(r.lcc_edges);
    if (r.degree_moments) {
      dbl(r.degree_moments->mean);
      dbl(r.degree_moments->sd);
      dbl(r.degree_moments->skewness);
      dbl(r.degree_moments->kurtosis);
      dbl(r.degree_moments->excess_kurtosis);
    } else {
      blank(5);
    }
    if (r.fence) {
      dbl(r.fence->q1);
      dbl(r.fence->q3);
      dbl(r.fence->iqr);
      dbl(r.fence->multiplier);
      dbl(r.fence->threshold);
      num(r.fence->flagged.size());
      str(detail::join(r.fence->flagged, ';'));
    } else {
      blank(7);
    }
    {
      std::vector<std::string> parts;
      for (const auto& [name, count] : r.specialty_frequencies)
        parts.push_back(name + ":" + std::to_string(count));
      str(detail::join(parts, ';'));
    }
    if (r.communities) {
      num(r.communities->community_count);
      num(r.communities->overlapping_nodes);
      dbl(r.communities->max_partition_density);
      dbl(r.communities->cut_similarity);
    } else {
      blank(4);
    }
    if (r.surrogate) {
      dbl(r.surrogate->m_orig);
      dbl(r.surrogate->mu_surr);
      dbl(r.surrogate->sigma_surr);
      dbl(r.surrogate->s_score);
      cells.push_back(r.surrogate->rejected ? "true" : "false");
      num(r.surrogate->n_s);
      num(r.surrogate->swap_factor_q);
      num(r.surrogate->master_seed);
    } else {
      blank(6);
      num(config.swap_factor_q);
      if (config.master_seed) num(*config.master_seed);
      else blank();
    }
    cells.push_back(std::string(to_string(config.quartile_method)));
    str(detail::join(r.warnings, ';'));
    out << detail::join(cells, ',') << "\n";
  }
  return out.str();
}

}  // namespace ppn

#endif  // PPN_REPORT_HPP
