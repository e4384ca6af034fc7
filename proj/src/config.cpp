#include "deleg/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace deleg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::parse(std::istream& in) {
  Config config;
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key or value");
    config.sections_[section][key] = value;
  }
  return config;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return parse(in);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end() || !s->second.count(key))
    throw std::invalid_argument("config is missing [" + section + "] " + key);
  return s->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string raw = get(section, key);
  size_t used = 0;
  const double value = std::stod(raw, &used);
  if (used != raw.size())
    throw std::invalid_argument("config [" + section + "] " + key + ": not a number: " + raw);
  return value;
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_long_or(const std::string& section, const std::string& key,
                         long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get(section, key);
  size_t used = 0;
  const long value = std::stol(raw, &used);
  if (used != raw.size())
    throw std::invalid_argument("config [" + section + "] " + key + ": not an integer: " + raw);
  return value;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

namespace {

// Truncated Gaussian shape on [lo, hi], normalized by trapezoid quadrature at
// construction so the analytic density integrates to one.
DensitySpec gauss_density(double lo, double hi, double mean, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("gauss density needs sigma > 0");
  const int cells = 8192;
  CompensatedSum acc;
  double prev = std::exp(-0.5 * (lo - mean) * (lo - mean) / (sigma * sigma));
  for (int i = 1; i <= cells; ++i) {
    const double x = lo + (hi - lo) * i / cells;
    const double cur = std::exp(-0.5 * (x - mean) * (x - mean) / (sigma * sigma));
    acc.add(0.5 * (prev + cur) * (hi - lo) / cells);
    prev = cur;
  }
  const double norm = acc.value();
  return DensitySpec::analytic(
      [mean, sigma, norm](const Vector& s) {
        return std::exp(-0.5 * (s[0] - mean) * (s[0] - mean) / (sigma * sigma)) / norm;
      },
      [mean, sigma, norm](const Vector& s) {
        const double f =
            std::exp(-0.5 * (s[0] - mean) * (s[0] - mean) / (sigma * sigma)) / norm;
        return vec1(-f * (s[0] - mean) / (sigma * sigma));
      });
}

}  // namespace

DelegationProblem problem_from_config(const Config& config) {
  const int n = static_cast<int>(config.get_long_or("problem", "n", 1));
  if (n < 1) throw std::invalid_argument("config [problem] n must be positive");

  Box box;
  box.lo.resize(n);
  box.hi.resize(n);
  for (int d = 0; d < n; ++d) {
    const std::string lo_key = config.has("problem", "lo" + std::to_string(d))
                                   ? "lo" + std::to_string(d)
                                   : "lo";
    const std::string hi_key = config.has("problem", "hi" + std::to_string(d))
                                   ? "hi" + std::to_string(d)
                                   : "hi";
    box.lo[d] = config.get_double("problem", lo_key);
    box.hi[d] = config.get_double("problem", hi_key);
  }

  DensitySpec density;
  const std::string density_kind = config.get_or("problem", "density", "uniform");
  if (density_kind == "uniform") {
    density = DensitySpec::uniform();
  } else if (density_kind == "gauss") {
    if (n != 1) throw std::invalid_argument("gauss density is one-dimensional");
    density = gauss_density(box.lo[0], box.hi[0], config.get_double("problem", "mean"),
                            config.get_double("problem", "sigma"));
  } else {
    throw std::invalid_argument("unknown density kind: " + density_kind);
  }

  BiasSpec bias;
  const std::string bias_kind = config.get_or("problem", "bias", "linear");
  if (bias_kind == "linear") {
    bias = BiasSpec::linear(config.get_double("problem", "alpha"));
  } else if (bias_kind == "affine") {
    Vector beta(n);
    for (int d = 0; d < n; ++d) {
      const std::string key = config.has("problem", "beta" + std::to_string(d))
                                  ? "beta" + std::to_string(d)
                                  : "beta";
      beta[d] = config.get_double("problem", key);
    }
    bias = BiasSpec::affine(std::move(beta));
  } else {
    throw std::invalid_argument("unknown bias kind: " + bias_kind);
  }

  const std::string curvature_kind = config.get_or("problem", "curvature", "quadratic");
  if (curvature_kind != "quadratic")
    throw std::invalid_argument("unknown curvature kind: " + curvature_kind);

  return make_problem(n, std::move(box), std::move(density), std::move(bias),
                      config.get_double_or("problem", "kappa", 1.0), CurvatureSpec::quadratic());
}

RunParams params_from_config(const Config& config) {
  RunParams params;
  params.grid_cells = static_cast<int>(config.get_long_or("grid", "cells", params.grid_cells));
  params.rho = config.get_double_or("lp", "rho", params.rho);
  params.extension_factor =
      config.get_double_or("lp", "extension_factor", params.extension_factor);
  params.tol = config.get_double_or("cert", "tol", params.tol);
  params.samples = config.get_long_or("sim", "samples", params.samples);
  params.seed = static_cast<std::uint64_t>(config.get_long_or("sim", "seed", 12345));
  params.threads = static_cast<int>(config.get_long_or("sim", "threads", params.threads));
  params.boundary_vertices =
      static_cast<int>(config.get_long_or("boundary2d", "vertices", params.boundary_vertices));
  params.boundary_radius =
      config.get_double_or("boundary2d", "init_radius", params.boundary_radius);
  params.boundary_cells =
      static_cast<int>(config.get_long_or("boundary2d", "cells", params.boundary_cells));
  params.boundary_tol = config.get_double_or("boundary2d", "tol", params.boundary_tol);
  params.boundary_max_iters =
      static_cast<int>(config.get_long_or("boundary2d", "max_iters", params.boundary_max_iters));
  return params;
}

}  // namespace deleg
