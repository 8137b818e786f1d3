#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chem.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "shaping.hpp"

namespace dppmb::metrics {

// Active: both drug-likeness and predicted activity strictly above 0.5.
bool is_active(const oracle::ScoreBreakdown& s);

struct MaxMinResult {
  int count = 0;
  std::vector<int> selected;  // indices into the actives list
};

// Greedy MaxMin packing under Tanimoto distance: seed with one random item,
// repeatedly add the item with the largest minimum distance to the selected
// set (ties to the lowest index), stop when that distance falls below D.
// The result is a valid D-packing and maximal.
MaxMinResult maxmin_diverse_actives(const std::vector<const chem::Molecule*>& actives,
                                    double threshold_d, Rng& rng);

// Exact maximum D-packing by branch and bound; refuses more than 20 items.
int bruteforce_diverse_actives(const std::vector<const chem::Molecule*>& actives,
                               double threshold_d);

// Distinct scaffold keys among active entries.
int cumulative_scaffolds(std::span<const shaping::MemoryEntry> entries);

struct MetricsRow {
  int64_t step = 0;
  int n_actives = 0;
  int n_scaffolds = 0;
  double diverse_actives = 0.0;
  uint64_t picker_seed = 0;
};

// One report over the entries admitted up to and including `step`.
// reseeds > 1 averages the picker value over seeds seed..seed+reseeds-1.
MetricsRow report_at(std::span<const shaping::MemoryEntry> entries, int64_t step,
                     double threshold_d, uint64_t seed, int reseeds);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

// Offline pipeline: memory dump in, metrics CSV out. Rows at every multiple
// of `every` up to the last admission step, plus a final row there.
void compute_metrics_file(const std::string& memory_csv, const std::string& out_csv,
                          double threshold_d, int64_t every, uint64_t seed,
                          int reseeds, const oracle::OracleSpec& spec);

}  // namespace dppmb::metrics
