#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpviz/pointset.hpp"
#include "dpviz/tensor_io.hpp"

namespace dpviz {

struct ClusterSummary {
  std::int32_t id = 0;
  std::size_t size = 0;
  std::optional<double> expected_weight;
  std::map<std::string, std::size_t> class_counts;
  std::map<std::string, double> composition;  // class -> fraction of size
  std::string dominant_class;                 // ties: lexicographically first
  double purity = 0.0;
  std::map<std::string, std::size_t> patient_breakdown;  // empty without patient ids
};

struct ClusterReport {
  std::vector<ClusterSummary> clusters;  // ascending id, occupied clusters only
  std::size_t total_points = 0;
  std::optional<double> alpha;
  std::optional<std::size_t> truncation;
};

/// Positional join: labels[i] annotates meta.records[i].
ClusterReport composition(std::span<const std::int32_t> labels, const DatasetMeta& meta);

/// Attaches model-level fields. weights[id] is the expected weight of cluster id.
void annotate_report(ClusterReport& report, std::span<const double> weights, double alpha,
                     std::size_t truncation);

std::string report_to_json(const ClusterReport& report);

double ari(std::span<const std::int32_t> a, std::span<const std::int32_t> b);

struct SynthSpec {
  std::size_t k_true = 3;
  std::size_t dim = 2;
  std::size_t n_points = 300;
  double separation = 10.0;
  double sigma = 0.5;
  std::uint64_t seed = 0;
};

struct SynthData {
  PointMatrix points;
  std::vector<std::int32_t> truth;
  std::vector<std::vector<double>> means;
};

/// Mean k is separation * (1 + floor(k / dim)) along axis k mod dim. Component
/// sizes differ by at most one (earlier components take the remainder);
/// points are emitted component by component.
SynthData synth_generate(const SynthSpec& spec);

}  // namespace dpviz
