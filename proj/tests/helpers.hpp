#ifndef PPN_TESTS_HELPERS_HPP
#define PPN_TESTS_HELPERS_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "ppn/claims.hpp"
#include "ppn/graph.hpp"
#include "ppn/rng.hpp"

namespace ppn_tests {

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("ppn_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// --- small graph builders ---------------------------------------------------

inline ppn::SimpleGraph make_graph(ppn::NodeIndex n,
                                   std::vector<std::pair<ppn::NodeIndex, ppn::NodeIndex>> edges) {
  return ppn::SimpleGraph::from_edge_list(n, std::move(edges));
}

// a=0, b=1, c=2, d=3; edges ab, bc, ca, cd
inline ppn::SimpleGraph triangle_with_pendant() {
  return make_graph(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
}

inline ppn::SimpleGraph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

inline ppn::SimpleGraph path_graph(ppn::NodeIndex n) {
  std::vector<std::pair<ppn::NodeIndex, ppn::NodeIndex>> edges;
  for (ppn::NodeIndex i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return make_graph(n, std::move(edges));
}

inline ppn::SimpleGraph cycle_graph(ppn::NodeIndex n) {
  std::vector<std::pair<ppn::NodeIndex, ppn::NodeIndex>> edges;
  for (ppn::NodeIndex i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return make_graph(n, std::move(edges));
}

inline ppn::SimpleGraph star_graph(ppn::NodeIndex leaves) {
  std::vector<std::pair<ppn::NodeIndex, ppn::NodeIndex>> edges;
  for (ppn::NodeIndex i = 1; i <= leaves; ++i) edges.push_back({0, i});
  return make_graph(leaves + 1, std::move(edges));
}

// Two k-cliques joined by a single bridge edge.
inline ppn::SimpleGraph two_cliques_with_bridge(ppn::NodeIndex k) {
  std::vector<std::pair<ppn::NodeIndex, ppn::NodeIndex>> edges;
  for (ppn::NodeIndex i = 0; i < k; ++i)
    for (ppn::NodeIndex j = i + 1; j < k; ++j) edges.push_back({i, j});
  for (ppn::NodeIndex i = 0; i < k; ++i)
    for (ppn::NodeIndex j = i + 1; j < k; ++j) edges.push_back({k + i, k + j});
  edges.push_back({k - 1, k});
  return make_graph(2 * k, std::move(edges));
}

// Random connected graph: random spanning tree plus extra random edges.
inline ppn::SimpleGraph random_connected_graph(ppn::NodeIndex n, std::size_t extra_edges,
                                               ppn::SplitMix64& rng) {
  std::set<std::pair<ppn::NodeIndex, ppn::NodeIndex>> edges;
  for (ppn::NodeIndex v = 1; v < n; ++v) {
    auto u = static_cast<ppn::NodeIndex>(rng.below(static_cast<std::uint64_t>(v)));
    edges.insert({std::min(u, v), std::max(u, v)});
  }
  const std::size_t max_edges = static_cast<std::size_t>(n) * (n - 1) / 2;
  std::size_t want = std::min(edges.size() + extra_edges, max_edges);
  while (edges.size() < want) {
    auto a = static_cast<ppn::NodeIndex>(rng.below(static_cast<std::uint64_t>(n)));
    auto b = static_cast<ppn::NodeIndex>(rng.below(static_cast<std::uint64_t>(n)));
    if (a == b) continue;
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  return ppn::SimpleGraph::from_edge_list(
      n, std::vector<std::pair<ppn::NodeIndex, ppn::NodeIndex>>(edges.begin(),
                                                                edges.end()));
}

// --- random bipartite fixtures and the projection oracle --------------------

struct BipartiteFixture {
  // patient index -> set of prescriber indices
  std::vector<std::set<int>> visits;
  int num_prescribers = 0;
};

inline BipartiteFixture random_bipartite(int max_prescribers, int max_patients,
                                         ppn::SplitMix64& rng) {
  BipartiteFixture fx;
  fx.num_prescribers = 1 + static_cast<int>(rng.below(max_prescribers));
  int patients = 1 + static_cast<int>(rng.below(max_patients));
  fx.visits.resize(patients);
  for (auto& vs : fx.visits) {
    // mostly 0-3 prescribers per patient, occasionally more
    std::uint64_t k = rng.below(5);
    if (rng.below(10) == 0) k += rng.below(4);
    for (std::uint64_t i = 0; i < k; ++i)
      vs.insert(static_cast<int>(rng.below(fx.num_prescribers)));
  }
  return fx;
}

inline std::vector<ppn::ClaimRecord> claims_from_fixture(const BipartiteFixture& fx,
                                                         ppn::Schedule schedule) {
  std::vector<ppn::ClaimRecord> records;
  for (std::size_t p = 0; p < fx.visits.size(); ++p) {
    for (int q : fx.visits[p]) {
      ppn::ClaimRecord r;
      r.patient_id = "P" + std::to_string(p);
      r.prescriber_id = "D" + std::to_string(q);
      r.drug_name = "drug";
      r.schedule = schedule;
      records.push_back(std::move(r));
    }
  }
  return records;
}

// Brute-force projection: weight(u,v) = |patients(u) ∩ patients(v)|.
inline std::map<std::pair<int, int>, int> oracle_projection(const BipartiteFixture& fx) {
  std::vector<std::set<int>> patients_of(fx.num_prescribers);
  for (std::size_t p = 0; p < fx.visits.size(); ++p)
    for (int q : fx.visits[p]) patients_of[q].insert(static_cast<int>(p));
  std::map<std::pair<int, int>, int> weights;
  for (int u = 0; u < fx.num_prescribers; ++u) {
    for (int v = u + 1; v < fx.num_prescribers; ++v) {
      int shared = 0;
      for (int p : patients_of[u])
        if (patients_of[v].count(p)) ++shared;
      if (shared > 0) weights[{u, v}] = shared;
    }
  }
  return weights;
}

// --- synthetic claims CSV ----------------------------------------------------

struct SyntheticSpec {
  std::size_t claims = 1000;
  std::size_t prescribers = 100;
  std::size_t patients = 400;
  std::uint64_t seed = 1;
  bool with_geo = true;
  std::string schedule;  // empty = spread over II/III/IV
};

// Claims resembling a one-month extract: a skewed prescriber popularity
// profile, most patients loyal to one prescriber, a minority visiting two or
// three, claims spread over all three schedules.
inline std::string synthetic_claims_csv(const SyntheticSpec& spec) {
  ppn::SplitMix64 rng(spec.seed);
  static const char* specialties[] = {
      "General Practitioner", "Internist",     "Dentist",
      "Physical Rehabilitation", "Psychiatrist", "Nurse Practitioner",
      "Pediatrician",         "Plastic Surgeon"};
  static const char* drugs[] = {"Oxycodone hcl", "Buprenorphine", "Alprazolam",
                                "Diazepam", "Lorazepam", "Morphine sulfate"};
  static const char* schedules[] = {"II", "III", "IV"};

  // Zipf-ish prescriber popularity.
  std::vector<double> popularity(spec.prescribers);
  double total = 0;
  for (std::size_t i = 0; i < spec.prescribers; ++i) {
    popularity[i] = 1.0 / static_cast<double>(i + 1);
    total += popularity[i];
  }
  auto pick_prescriber = [&]() {
    double r = rng.unit() * total;
    for (std::size_t i = 0; i < spec.prescribers; ++i) {
      r -= popularity[i];
      if (r <= 0) return i;
    }
    return spec.prescribers - 1;
  };

  // Each patient picks 1-3 favorite prescribers.
  std::vector<std::vector<std::size_t>> favorites(spec.patients);
  for (auto& f : favorites) {
    std::size_t k = 1;
    std::uint64_t roll = rng.below(100);
    if (roll < 9) k = 2;
    else if (roll < 12) k = 3;
    while (f.size() < k) {
      std::size_t q = pick_prescriber();
      if (std::find(f.begin(), f.end(), q) == f.end()) f.push_back(q);
    }
  }

  std::ostringstream out;
  out << "prescriber_id,patient_id,drug_name,schedule,specialty,latitude,"
         "longitude,dispense_date\n";
  for (std::size_t c = 0; c < spec.claims; ++c) {
    std::size_t p = rng.below(spec.patients);
    const auto& f = favorites[p];
    std::size_t q = f[rng.below(f.size())];
    const char* schedule =
        spec.schedule.empty() ? schedules[rng.below(3)] : spec.schedule.c_str();
    const char* drug = drugs[rng.below(6)];
    const char* specialty = specialties[q % 8];
    bool geo = spec.with_geo && rng.below(100) < 93;
    out << "D" << q << ",P" << p << "," << drug << "," << schedule << ","
        << specialty << ",";
    if (geo) {
      double lat = 36.5 + 2.5 * (static_cast<double>(q % 101) / 100.0);
      double lon = -89.0 + 6.5 * (static_cast<double>(q % 97) / 96.0);
      out << lat << "," << lon;
    } else {
      out << ",";
    }
    std::uint64_t day = 1 + rng.below(28);
    out << ",2011-09-" << (day < 10 ? "0" : "") << day << "\n";
  }
  return out.str();
}

}  // namespace ppn_tests

#endif  // PPN_TESTS_HELPERS_HPP
