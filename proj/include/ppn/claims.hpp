#ifndef PPN_CLAIMS_HPP
#define PPN_CLAIMS_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ppn {

enum class Schedule { II, III, IV };

constexpr std::array<Schedule, 3> kAllSchedules = {Schedule::II, Schedule::III,
                                                   Schedule::IV};

inline std::string_view to_string(Schedule s) {
  switch (s) {
    case Schedule::II: return "II";
    case Schedule::III: return "III";
    case Schedule::IV: return "IV";
  }
  return "?";
}

inline std::optional<Schedule> parse_schedule(std::string_view token) {
  if (token == "II") return Schedule::II;
  if (token == "III") return Schedule::III;
  if (token == "IV") return Schedule::IV;
  return std::nullopt;
}

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;
  friend bool operator==(const Date&, const Date&) = default;
};

// One row as parsed from the claims CSV. Field contents are unchecked:
// schedule is still a raw token and geo coordinates may be out of range.
struct RawClaimRecord {
  std::size_t line = 0;  // 1-based source line
  std::string prescriber_id;
  std::string patient_id;
  std::string drug_name;
  std::string schedule;
  std::string specialty;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<Date> dispense_date;
};

// A record that passed validation: ids non-empty per policy, schedule one of
// the supported values, geo coordinates in range when present.
struct ClaimRecord {
  std::string prescriber_id;
  std::string patient_id;
  std::string drug_name;
  Schedule schedule = Schedule::II;
  std::string specialty;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<Date> dispense_date;
};

struct ParseDiagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<RawClaimRecord> records;
  std::vector<ParseDiagnostic> diagnostics;
};

struct IngestReport {
  std::size_t records_read = 0;
  std::size_t records_kept = 0;
  std::size_t records_excluded = 0;
  std::map<std::string, std::size_t> exclusion_reasons;
  // Kept records lacking a complete, in-range coordinate pair.
  std::size_t records_missing_geo = 0;
};

// Which attributes must be non-empty for a record to be kept. A parseable
// schedule token is required regardless (a validated record carries a typed
// schedule); the flags only control the id fields and reason labeling.
struct RequiredFields {
  bool prescriber_id = true;
  bool patient_id = true;
  bool schedule = true;
  static RequiredFields all() { return {}; }
};

namespace detail {

// Splits one CSV line. Handles double-quoted fields with embedded commas and
// doubled quotes; embedded newlines are not supported (claims extracts are
// line-per-record).
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

inline std::optional<Date> parse_date(std::string_view s) {
  // YYYY-MM-DD
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [](std::string_view t, int& out) {
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc{} && ptr == t.data() + t.size();
  };
  Date d;
  if (!num(s.substr(0, 4), d.year) || !num(s.substr(5, 2), d.month) ||
      !num(s.substr(8, 2), d.day))
    return std::nullopt;
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
  return d;
}

}  // namespace detail

inline constexpr std::array<std::string_view, 8> kClaimsColumns = {
    "prescriber_id", "patient_id", "drug_name", "schedule",
    "specialty",     "latitude",   "longitude", "dispense_date"};

// Reads claims CSV. The header row must name all recognized columns (any
// order, unknown extras ignored). Structural problems in a data row (wrong
// field count, unparseable number or date) exclude the row with a diagnostic
// naming the line; semantic checks are validate_and_filter's job.
inline ParseResult parse_claims(std::istream& in) {
  ParseResult result;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("claims CSV: missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = detail::split_csv_line(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
  std::string missing;
  for (auto name : kClaimsColumns) {
    if (!col.count(std::string(name))) {
      if (!missing.empty()) missing += ", ";
      missing += name;
    }
  }
  if (!missing.empty()) {
    throw std::runtime_error("claims CSV: header missing column(s): " + missing);
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "expected " << header.size() << " fields, got " << fields.size();
      result.diagnostics.push_back({line_no, msg.str()});
      continue;
    }
    auto get = [&](std::string_view name) -> const std::string& {
      return fields[col.at(std::string(name))];
    };
    RawClaimRecord rec;
    rec.line = line_no;
    rec.prescriber_id = get("prescriber_id");
    rec.patient_id = get("patient_id");
    rec.drug_name = get("drug_name");
    rec.schedule = get("schedule");
    rec.specialty = get("specialty");
    bool bad = false;
    auto read_coord = [&](std::string_view name, std::optional<double>& out) {
      const std::string& raw = get(name);
      if (raw.empty()) return;
      auto v = detail::parse_double(raw);
      if (!v) {
        result.diagnostics.push_back(
            {line_no, std::string("unparseable ") + std::string(name) + ": \"" + raw + "\""});
        bad = true;
      } else {
        out = v;
      }
    };
    read_coord("latitude", rec.latitude);
    read_coord("longitude", rec.longitude);
    const std::string& date_raw = get("dispense_date");
    if (!date_raw.empty()) {
      auto d = detail::parse_date(date_raw);
      if (!d) {
        result.diagnostics.push_back(
            {line_no, "unparseable dispense_date: \"" + date_raw + "\""});
        bad = true;
      } else {
        rec.dispense_date = d;
      }
    }
    if (bad) continue;
    result.records.push_back(std::move(rec));
  }
  return result;
}

// Reference drug -> schedule mapping shipped with the library. Matching is
// exact on the drug name string. Note hydrocodone-acetaminophen is listed
// under Schedule IV here, reflecting the study-period claims classification;
// combination hydrocodone products were rescheduled federally in 2014.
inline const std::map<std::string, Schedule>& drug_schedule_reference() {
  static const std::map<std::string, Schedule> table = {
      {"Oxycodone-acetaminophen", Schedule::II},
      {"Oxycodone hcl", Schedule::II},
      {"Methadone hcl", Schedule::II},
      {"Morphine sulfate", Schedule::II},
      {"Hydromorphone hcl", Schedule::II},
      {"Oxymorphone hcl", Schedule::II},
      {"Acetaminophen-codeine", Schedule::III},
      {"Buprenorphine", Schedule::III},
      {"Buprenorphine-naloxone", Schedule::III},
      {"Butalbital codeine", Schedule::III},
      {"Hydrocodone-acetaminophen", Schedule::IV},
      {"Alprazolam", Schedule::IV},
      {"Carisoprodol", Schedule::IV},
      {"Chlordiazepoxide hcl", Schedule::IV},
      {"Clonazepam", Schedule::IV},
      {"Clorazepate dipotassium", Schedule::IV},
      {"Diazepam", Schedule::IV},
      {"Flurazepam hcl", Schedule::IV},
      {"Lorazepam", Schedule::IV},
      {"Midazolam hcl", Schedule::IV},
      {"Oxazepam", Schedule::IV},
      {"Pentazocine-naloxone hcl", Schedule::IV},
      {"Phenobarbital", Schedule::IV},
      {"Temazepam", Schedule::IV},
      {"Triazolam", Schedule::IV},
      {"Zolpidem tartrate", Schedule::IV},
  };
  return table;
}

struct ValidationOptions {
  RequiredFields required = RequiredFields::all();
  // When set, a drug name found in the map overrides the schedule column.
  const std::map<std::string, Schedule>* drug_schedule_map = nullptr;
};

struct ValidationResult {
  std::vector<ClaimRecord> records;
  IngestReport report;
};

// Applies the missing-value exclusion policy. Every failure becomes an
// exclusion with a reason; nothing is dropped silently. Missing or
// out-of-range geo coordinates never exclude a record: the coordinates are
// cleared and the record counts toward records_missing_geo (geo gates only
// the geo exports).
inline ValidationResult validate_and_filter(
    const std::vector<RawClaimRecord>& raw,
    const ValidationOptions& options = {}) {
  ValidationResult out;
  out.report.records_read = raw.size();
  auto exclude = [&](const char* reason) {
    ++out.report.records_excluded;
    ++out.report.exclusion_reasons[reason];
  };
  for (const auto& r : raw) {
    if (options.required.prescriber_id && r.prescriber_id.empty()) {
      exclude("missing prescriber_id");
      continue;
    }
    if (options.required.patient_id && r.patient_id.empty()) {
      exclude("missing patient_id");
      continue;
    }
    std::optional<Schedule> sched;
    if (options.drug_schedule_map) {
      auto it = options.drug_schedule_map->find(r.drug_name);
      if (it != options.drug_schedule_map->end()) sched = it->second;
    }
    if (!sched) {
      if (r.schedule.empty()) {
        exclude("missing schedule");
        continue;
      }
      sched = parse_schedule(r.schedule);
      if (!sched) {
        exclude("invalid schedule");
        continue;
      }
    }
    ClaimRecord rec;
    rec.prescriber_id = r.prescriber_id;
    rec.patient_id = r.patient_id;
    rec.drug_name = r.drug_name;
    rec.schedule = *sched;
    rec.specialty = r.specialty;
    rec.dispense_date = r.dispense_date;
    bool geo_ok = r.latitude && r.longitude && *r.latitude >= -90.0 &&
                  *r.latitude <= 90.0 && *r.longitude >= -180.0 &&
                  *r.longitude <= 180.0;
    if (geo_ok) {
      rec.latitude = r.latitude;
      rec.longitude = r.longitude;
    } else {
      ++out.report.records_missing_geo;
    }
    ++out.report.records_kept;
    out.records.push_back(std::move(rec));
  }
  return out;
}

// Every record lands in exactly one bucket; all three buckets are present.
inline std::map<Schedule, std::vector<ClaimRecord>> partition_by_schedule(
    const std::vector<ClaimRecord>& records) {
  std::map<Schedule, std::vector<ClaimRecord>> buckets;
  for (Schedule s : kAllSchedules) buckets[s];
  for (const auto& r : records) buckets[r.schedule].push_back(r);
  return buckets;
}

}  // namespace ppn

#endif  // PPN_CLAIMS_HPP
