#ifndef PPN_STATS_HPP
#define PPN_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppn/claims.hpp"

namespace ppn {

struct PrescriberProfile {
  std::string prescriber_id;
  std::size_t total_prescriptions = 0;
  std::size_t distinct_patients = 0;
  double avg_count = 0.0;  // total / distinct
  std::string specialty;
};

// One profile per distinct prescriber, sorted by id. The average prescription
// count is claims divided by distinct patients, so it is always >= 1.
inline std::vector<PrescriberProfile> prescriber_profiles(
    const std::vector<ClaimRecord>& records) {
  struct Accum {
    std::size_t total = 0;
    std::set<std::string> patients;
    std::string specialty;
  };
  std::map<std::string, Accum> by_id;
  for (const auto& r : records) {
    Accum& a = by_id[r.prescriber_id];
    ++a.total;
    a.patients.insert(r.patient_id);
    if (a.specialty.empty() && !r.specialty.empty()) a.specialty = r.specialty;
  }
  std::vector<PrescriberProfile> profiles;
  profiles.reserve(by_id.size());
  for (auto& [id, a] : by_id) {
    PrescriberProfile p;
    p.prescriber_id = id;
    p.total_prescriptions = a.total;
    p.distinct_patients = a.patients.size();
    p.avg_count = static_cast<double>(a.total) / static_cast<double>(a.patients.size());
    p.specialty = std::move(a.specialty);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

enum class QuartileMethod {
  linear_interpolation,  // rank 1 + p*(n-1) on the sorted sample
  tukey_hinges,          // medians of the lower/upper half (median shared when n odd)
};

inline std::string_view to_string(QuartileMethod m) {
  return m == QuartileMethod::linear_interpolation ? "linear_interpolation"
                                                   : "tukey_hinges";
}

struct Quartiles {
  double q1 = 0.0;
  double q3 = 0.0;
};

namespace detail {

inline double interpolate_at(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  double h = 1.0 + p * static_cast<double>(n - 1);  // 1-based rank
  std::size_t lo = static_cast<std::size_t>(h);     // floor, h >= 1
  if (lo >= n) return sorted[n - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

inline double median_of(const std::vector<double>& sorted, std::size_t first,
                        std::size_t last) {  // half-open [first, last)
  std::size_t len = last - first;
  std::size_t mid = first + len / 2;
  if (len % 2 == 1) return sorted[mid];
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

}  // namespace detail

inline Quartiles quartiles(std::vector<double> values,
                           QuartileMethod method = QuartileMethod::linear_interpolation) {
  if (values.empty()) throw std::invalid_argument("quartiles: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return {values[0], values[0]};
  if (method == QuartileMethod::linear_interpolation) {
    return {detail::interpolate_at(values, 0.25), detail::interpolate_at(values, 0.75)};
  }
  // Tukey hinges: split at the median, sharing it between halves when n odd.
  std::size_t half = n / 2;
  double q1 = detail::median_of(values, 0, n % 2 == 1 ? half + 1 : half);
  double q3 = detail::median_of(values, half, n);
  return {q1, q3};
}

struct FenceResult {
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double multiplier = 0.0;
  double threshold = 0.0;
  std::vector<std::string> flagged;  // ids with value strictly above threshold, sorted
};

// Tukey fence on values keyed by id: flag everything strictly greater than
// q3 + k*(q3 - q1). IQR of zero is legal; the fence then sits at q3.
inline FenceResult tukey_extreme_outliers(
    const std::vector<std::pair<std::string, double>>& values_by_id,
    double k = 4.5,
    QuartileMethod method = QuartileMethod::linear_interpolation) {
  if (values_by_id.empty())
    throw std::invalid_argument("tukey_extreme_outliers: empty input");
  std::vector<double> values;
  values.reserve(values_by_id.size());
  for (const auto& [id, v] : values_by_id) values.push_back(v);
  Quartiles q = quartiles(std::move(values), method);
  FenceResult r;
  r.q1 = q.q1;
  r.q3 = q.q3;
  r.iqr = q.q3 - q.q1;
  r.multiplier = k;
  r.threshold = q.q3 + k * r.iqr;
  for (const auto& [id, v] : values_by_id) {
    if (v > r.threshold) r.flagged.push_back(id);
  }
  std::sort(r.flagged.begin(), r.flagged.end());
  return r;
}

struct MomentSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;        // population convention, sqrt(m2)
  double skewness = 0.0;  // m3 / m2^(3/2)
  double kurtosis = 0.0;  // m4 / m2^2, raw (normal = 3)
  double excess_kurtosis = 0.0;
};

// Population central moments (1/n). Raw kurtosis is reported with the excess
// value alongside.
inline MomentSummary distribution_moments(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("distribution_moments: need n >= 2");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    double d = v - mean;
    double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (m2 == 0.0)
    throw std::invalid_argument("distribution_moments: moments undefined (sd = 0)");
  MomentSummary s;
  s.n = n;
  s.mean = mean;
  s.sd = std::sqrt(m2);
  s.skewness = m3 / (m2 * std::sqrt(m2));
  s.kurtosis = m4 / (m2 * m2);
  s.excess_kurtosis = s.kurtosis - 3.0;
  return s;
}

// Specialty tally over the flagged prescribers, stoplist entries removed,
// ordered by descending count then ascending name.
inline std::vector<std::pair<std::string, std::size_t>> specialty_frequency(
    const std::vector<std::string>& flagged_ids,
    const std::vector<PrescriberProfile>& profiles,
    const std::set<std::string>& stoplist = {}) {
  std::map<std::string, std::string> specialty_of;
  for (const auto& p : profiles) specialty_of[p.prescriber_id] = p.specialty;
  std::map<std::string, std::size_t> counts;
  for (const auto& id : flagged_ids) {
    auto it = specialty_of.find(id);
    if (it == specialty_of.end()) continue;
    if (stoplist.count(it->second)) continue;
    ++counts[it->second];
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace ppn

#endif  // PPN_STATS_HPP
