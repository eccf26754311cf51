#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpviz/dpgmm.hpp"

namespace dpviz::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dpviz_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

/// True when `python3 -c "import <modules>"` succeeds.
inline bool python_has(const std::string& modules) {
  const std::string cmd = "python3 -c \"import " + modules + "\" > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

inline int run_python(const std::string& script) {
  const std::string cmd = "python3 -c '" + script + "'";
  return std::system(cmd.c_str());
}

/// Invariant violations observed across one fit.
struct FitAudit {
  std::size_t iterations = 0;
  std::size_t elbo_drops = 0;         // steps with ELBO_t < ELBO_{t-1} - 1e-6 |ELBO_{t-1}|
  double worst_row_error = 0.0;       // max |sum_k phi_nk - 1|
  bool negative_phi = false;
  double worst_weight_error = 0.0;    // max |sum_k pi_k - 1|
  bool negative_weight = false;

  bool ok() const {
    return elbo_drops == 0 && worst_row_error <= 1e-9 && !negative_phi &&
           worst_weight_error <= 1e-9 && !negative_weight;
  }
};

/// fit() with every per-iteration invariant checked.
inline FitResult audited_fit(const PointMatrix& pm, const DpgmmConfig& cfg, FitAudit& audit) {
  double prev = NAN;
  auto observer = [&](const IterationView& v) {
    ++audit.iterations;
    if (!std::isnan(prev) && v.elbo < prev - 1e-6 * std::abs(prev)) ++audit.elbo_drops;
    prev = v.elbo;
    for (std::size_t n = 0; n < v.phi.n_points(); ++n) {
      double s = 0.0;
      for (double p : v.phi.row(n)) {
        if (p < 0.0 || p > 1.0) audit.negative_phi = true;
        s += p;
      }
      audit.worst_row_error = std::max(audit.worst_row_error, std::abs(s - 1.0));
    }
    const auto w = expected_weights(v.model);
    double s = 0.0;
    for (double x : w) {
      if (x < 0.0) audit.negative_weight = true;
      s += x;
    }
    audit.worst_weight_error = std::max(audit.worst_weight_error, std::abs(s - 1.0));
  };
  return fit(pm, cfg, observer);
}

}  // namespace dpviz::testing
