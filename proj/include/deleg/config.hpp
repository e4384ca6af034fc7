#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "deleg/model.hpp"

namespace deleg {

// Flat INI-style config: [section] headers, key = value lines, '#' comments.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  long get_long_or(const std::string& section, const std::string& key, long fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// [problem] section: n, lo, hi (scalar or per-axis lo0/lo1...), density
// (uniform | gauss with mean/sigma), bias (linear alpha | affine beta),
// kappa, curvature (quadratic).
DelegationProblem problem_from_config(const Config& config);

struct RunParams {
  int grid_cells = 101;           // [grid] cells
  double rho = 3.0;               // [lp] rho
  double extension_factor = 1.0;  // [lp] extension_factor
  double tol = 1e-6;              // [cert] tol
  long samples = 1000000;         // [sim] samples
  std::uint64_t seed = 12345;     // [sim] seed
  int threads = 1;
  int boundary_vertices = 64;     // [boundary2d] vertices
  double boundary_radius = 0.2;   // [boundary2d] init_radius
  int boundary_cells = 129;       // [boundary2d] cells
  double boundary_tol = 5e-3;     // [boundary2d] tol
  int boundary_max_iters = 100;   // [boundary2d] max_iters
};

RunParams params_from_config(const Config& config);

}  // namespace deleg
