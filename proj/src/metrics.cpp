#include "metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "error.hpp"
#include "textio.hpp"

namespace dppmb::metrics {

bool is_active(const oracle::ScoreBreakdown& s) {
  return s.qed > 0.5 && s.activity > 0.5;
}

namespace {

double distance(const chem::Molecule& a, const chem::Molecule& b) {
  return 1.0 - chem::tanimoto(a.fingerprint(), b.fingerprint());
}

}  // namespace

MaxMinResult maxmin_diverse_actives(const std::vector<const chem::Molecule*>& actives,
                                    double threshold_d, Rng& rng) {
  if (!(threshold_d > 0.0 && threshold_d <= 1.0))
    fail_arg("distance threshold must lie in (0, 1]");
  MaxMinResult result;
  const int n = static_cast<int>(actives.size());
  if (n == 0) return result;

  const int seed_item = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
  result.selected.push_back(seed_item);

  std::vector<double> min_dist(n);
  for (int i = 0; i < n; ++i)
    min_dist[i] = distance(*actives[i], *actives[seed_item]);
  min_dist[seed_item] = -1.0;

  for (;;) {
    int best = -1;
    double best_dist = -1.0;
    for (int i = 0; i < n; ++i)
      if (min_dist[i] > best_dist) {
        best_dist = min_dist[i];
        best = i;
      }
    if (best < 0 || best_dist < threshold_d) break;
    result.selected.push_back(best);
    for (int i = 0; i < n; ++i) {
      if (min_dist[i] < 0.0) continue;
      min_dist[i] = std::min(min_dist[i], distance(*actives[i], *actives[best]));
    }
    min_dist[best] = -1.0;
  }
  result.count = static_cast<int>(result.selected.size());
  return result;
}

namespace {

// Max clique on the >=D graph via branch and bound with a popcount bound.
void packing_search(const std::vector<uint32_t>& compatible, uint32_t candidates,
                    int depth, int& best) {
  if (depth + std::popcount(candidates) <= best) return;
  if (candidates == 0) {
    best = std::max(best, depth);
    return;
  }
  while (candidates) {
    if (depth + std::popcount(candidates) <= best) return;
    const int v = std::countr_zero(candidates);
    candidates &= candidates - 1;
    packing_search(compatible, candidates & compatible[v], depth + 1, best);
  }
}

}  // namespace

int bruteforce_diverse_actives(const std::vector<const chem::Molecule*>& actives,
                               double threshold_d) {
  const int n = static_cast<int>(actives.size());
  if (n > 20)
    fail_arg("brute-force packing limited to 20 items, got " + std::to_string(n));
  if (n == 0) return 0;

  std::vector<uint32_t> compatible(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (distance(*actives[i], *actives[j]) >= threshold_d) {
        compatible[i] |= 1u << j;
        compatible[j] |= 1u << i;
      }

  int best = 0;
  packing_search(compatible, (1u << n) - 1, 0, best);
  return best;
}

int cumulative_scaffolds(std::span<const shaping::MemoryEntry> entries) {
  std::unordered_set<std::string> keys;
  for (const auto& e : entries)
    if (is_active(e.scores)) keys.insert(e.molecule.scaffold_key());
  return static_cast<int>(keys.size());
}

MetricsRow report_at(std::span<const shaping::MemoryEntry> entries, int64_t step,
                     double threshold_d, uint64_t seed, int reseeds) {
  if (reseeds < 1) fail_arg("reseeds must be >= 1");
  MetricsRow row;
  row.step = step;
  row.picker_seed = seed;

  std::vector<const chem::Molecule*> actives;
  std::unordered_set<std::string> scaffold_keys;
  for (const auto& e : entries) {
    if (e.step > step || !is_active(e.scores)) continue;
    actives.push_back(&e.molecule);
    scaffold_keys.insert(e.molecule.scaffold_key());
  }
  row.n_actives = static_cast<int>(actives.size());
  row.n_scaffolds = static_cast<int>(scaffold_keys.size());

  double total = 0.0;
  for (int r = 0; r < reseeds; ++r) {
    Rng rng(seed + static_cast<uint64_t>(r),
            stream::id(stream::metrics_picker, static_cast<uint64_t>(step)));
    total += maxmin_diverse_actives(actives, threshold_d, rng).count;
  }
  row.diverse_actives = total / reseeds;
  return row;
}

std::string metrics_csv_header() {
  return "step,n_actives,n_scaffolds,diverse_actives,picker_seed";
}

std::string metrics_csv_row(const MetricsRow& row) {
  std::ostringstream ss;
  ss << row.step << ',' << row.n_actives << ',' << row.n_scaffolds << ','
     << textio::format_double(row.diverse_actives) << ',' << row.picker_seed;
  return ss.str();
}

void compute_metrics_file(const std::string& memory_csv, const std::string& out_csv,
                          double threshold_d, int64_t every, uint64_t seed,
                          int reseeds, const oracle::OracleSpec& spec) {
  if (every < 1) fail_arg("metrics interval must be >= 1");
  auto entries = shaping::MemoryStore::read_csv(memory_csv, spec.alphabet);
  for (auto& e : entries) e.scores = oracle::extrinsic_reward(e.molecule, spec);

  int64_t last_step = 0;
  for (const auto& e : entries) last_step = std::max(last_step, e.step);

  std::ostringstream ss;
  ss << metrics_csv_header() << '\n';
  for (int64_t s = every; s <= last_step; s += every)
    ss << metrics_csv_row(report_at(entries, s, threshold_d, seed, reseeds)) << '\n';
  if (last_step % every != 0 || last_step == 0)
    ss << metrics_csv_row(report_at(entries, last_step, threshold_d, seed, reseeds))
       << '\n';
  textio::write_file(out_csv, ss.str());
}

}  // namespace dppmb::metrics
