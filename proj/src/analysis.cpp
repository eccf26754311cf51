#include "dpviz/analysis.hpp"

#include <map>
#include <random>

#include "json.hpp"
#include "dpviz/error.hpp"

namespace dpviz {

ClusterReport composition(std::span<const std::int32_t> labels, const DatasetMeta& meta) {
  if (labels.size() != meta.size())
    throw Error(Errc::LengthMismatch, std::to_string(labels.size()) + " labels for " +
                                          std::to_string(meta.size()) + " metadata records");
  std::map<std::int32_t, ClusterSummary> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& c = by_id[labels[i]];
    c.id = labels[i];
    ++c.size;
    ++c.class_counts[meta.records[i].class_label];
    if (meta.records[i].patient_id) ++c.patient_breakdown[*meta.records[i].patient_id];
  }
  ClusterReport report;
  report.total_points = labels.size();
  for (auto& [id, c] : by_id) {
    std::size_t best = 0;
    for (const auto& [label, count] : c.class_counts) {
      c.composition[label] = static_cast<double>(count) / static_cast<double>(c.size);
      if (count > best) {
        best = count;
        c.dominant_class = label;
      }
    }
    c.purity = static_cast<double>(best) / static_cast<double>(c.size);
    report.clusters.push_back(std::move(c));
  }
  return report;
}

void annotate_report(ClusterReport& report, std::span<const double> weights, double alpha,
                     std::size_t truncation) {
  report.alpha = alpha;
  report.truncation = truncation;
  for (auto& c : report.clusters)
    if (c.id >= 0 && static_cast<std::size_t>(c.id) < weights.size())
      c.expected_weight = weights[static_cast<std::size_t>(c.id)];
}

std::string report_to_json(const ClusterReport& report) {
  using nlohmann::json;
  json clusters = json::array();
  for (const auto& c : report.clusters) {
    json entry = {{"id", c.id},
                  {"size", c.size},
                  {"expected_weight", c.expected_weight ? json(*c.expected_weight) : json(nullptr)},
                  {"composition", c.composition},
                  {"purity", c.purity},
                  {"dominant_class", c.dominant_class}};
    if (!c.patient_breakdown.empty()) entry["patient_breakdown"] = c.patient_breakdown;
    clusters.push_back(std::move(entry));
  }
  json j = {{"clusters", clusters},
            {"total_points", report.total_points},
            {"alpha", report.alpha ? json(*report.alpha) : json(nullptr)},
            {"truncation", report.truncation ? json(*report.truncation) : json(nullptr)}};
  return j.dump(2) + "\n";
}

double ari(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  if (a.size() != b.size())
    throw Error(Errc::LengthMismatch, "partitions differ in length");
  if (a.size() < 2) throw Error(Errc::TooFewPoints, "ARI needs at least two points");

  std::map<std::int32_t, std::size_t> ia, ib;
  for (auto x : a) ia.emplace(x, ia.size());
  for (auto x : b) ib.emplace(x, ib.size());
  std::vector<double> table(ia.size() * ib.size(), 0.0), rows(ia.size(), 0.0), cols(ib.size(), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n) {
    const auto i = ia[a[n]], j = ib[b[n]];
    table[i * ib.size() + j] += 1.0;
    rows[i] += 1.0;
    cols[j] += 1.0;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (double v : table) index += choose2(v);
  for (double v : rows) sum_a += choose2(v);
  for (double v : cols) sum_b += choose2(v);
  const double expected = sum_a * sum_b / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    // only reachable when both partitions are all-singletons or all-one-cluster
    return index == max_index ? 1.0 : 0.0;
  }
  return (index - expected) / denom;
}

SynthData synth_generate(const SynthSpec& spec) {
  if (spec.k_true < 1 || spec.dim < 1 || spec.n_points < spec.k_true || !(spec.sigma > 0.0))
    throw Error(Errc::InvalidSpec, "need k_true >= 1, dim >= 1, n_points >= k_true, sigma > 0");
  const std::size_t K = spec.k_true, D = spec.dim, N = spec.n_points;

  SynthData out;
  out.means.assign(K, std::vector<double>(D, 0.0));
  for (std::size_t k = 0; k < K; ++k)
    out.means[k][k % D] = spec.separation * static_cast<double>(1 + k / D);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  std::vector<double> values;
  values.reserve(N * D);
  out.truth.reserve(N);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t count = N / K + (k < N % K ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t d = 0; d < D; ++d) values.push_back(out.means[k][d] + noise(rng));
      out.truth.push_back(static_cast<std::int32_t>(k));
    }
  }
  out.points = PointMatrix(N, D, std::move(values), PointMode::Vector, {N, D});
  return out;
}

}  // namespace dpviz
