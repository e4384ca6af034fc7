#include "deleg/report.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace deleg {

std::string format_float(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_ += '{';
  first_in_scope_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  first_in_scope_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array(const std::string& key) {
  separator();
  out_ += '"' + key + "\":[";
  first_in_scope_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::begin_array_object() {
  separator();
  out_ += '{';
  first_in_scope_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  first_in_scope_.pop_back();
  return *this;
}

void JsonWriter::separator() {
  if (first_in_scope_.empty()) return;
  if (first_in_scope_.back())
    first_in_scope_.back() = false;
  else
    out_ += ',';
}

JsonWriter& JsonWriter::field(const std::string& key, double value) {
  separator();
  out_ += '"' + key + "\":" + format_float(value);
  return *this;
}

JsonWriter& JsonWriter::field(const std::string& key, long value) {
  separator();
  out_ += '"' + key + "\":" + std::to_string(value);
  return *this;
}

JsonWriter& JsonWriter::field(const std::string& key, int value) {
  return field(key, static_cast<long>(value));
}

JsonWriter& JsonWriter::field(const std::string& key, bool value) {
  separator();
  out_ += '"' + key + "\":" + (value ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::field(const std::string& key, const std::string& value) {
  separator();
  out_ += '"' + key + "\":\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out_ += '\\';
    out_ += c;
  }
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::element(double value) {
  separator();
  out_ += format_float(value);
  return *this;
}

std::string JsonWriter::str() const { return out_; }

void write_measure_csv(std::ostream& out, const SignedMeasureGrid& measure) {
  const int n = static_cast<int>(measure.nodes.cols());
  for (int d = 0; d < n; ++d) out << "s" << d << ",";
  out << "tag,nu,weight\n";
  double cell_volume = 1.0;
  for (int d = 0; d < n; ++d) cell_volume *= measure.cell_widths[d];
  for (long i = 0; i < measure.size(); ++i) {
    for (int d = 0; d < n; ++d) out << format_float(measure.nodes(i, d)) << ",";
    const bool interior = measure.tags[i] == SignedMeasureGrid::Tag::interior;
    double element = cell_volume;
    if (!interior) {
      element = 1.0;
      for (int d = 0; d < n; ++d)
        if (measure.normals(i, d) == 0.0) element *= measure.cell_widths[d];
    }
    out << (interior ? "interior" : "boundary") << ","
        << format_float(measure.weights[i] / element) << ","
        << format_float(measure.weights[i]) << "\n";
  }
}

void write_menu(std::ostream& out, const Menu& menu) {
  const long n = menu.pieces.empty() ? 0 : menu.pieces.front().a.size();
  out << "menu " << n << " " << menu.pieces.size() << "\n";
  for (const auto& piece : menu.pieces) {
    out << "piece";
    for (long d = 0; d < n; ++d) out << " " << format_float(piece.a[d]);
    out << " " << format_float(piece.c) << "\n";
  }
}

Menu read_menu(std::istream& in) {
  std::string tag;
  long n = 0;
  size_t count = 0;
  in >> tag >> n >> count;
  if (tag != "menu" || !in) throw std::invalid_argument("malformed menu header");
  Menu menu;
  menu.pieces.resize(count);
  for (auto& piece : menu.pieces) {
    in >> tag;
    if (tag != "piece") throw std::invalid_argument("malformed menu piece");
    piece.a.resize(n);
    for (long d = 0; d < n; ++d) in >> piece.a[d];
    in >> piece.c;
    if (!in) throw std::invalid_argument("malformed menu piece");
  }
  return menu;
}

void write_mechanism(std::ostream& out, const Mechanism& mechanism) {
  const long n = mechanism.menu.pieces.empty() ? 0 : mechanism.menu.pieces.front().a.size();
  out << "mechanism " << n << " " << mechanism.menu.pieces.size() << "\n";
  for (size_t k = 0; k < mechanism.menu.pieces.size(); ++k) {
    const auto& piece = mechanism.menu.pieces[k];
    out << "piece";
    for (long d = 0; d < n; ++d) out << " " << format_float(piece.a[d]);
    out << " " << format_float(piece.c) << "\n";
    out << "atoms " << mechanism.lotteries[k].atoms.size() << "\n";
    for (const auto& atom : mechanism.lotteries[k].atoms) {
      out << "atom " << format_float(atom.probability);
      for (long d = 0; d < n; ++d) out << " " << format_float(atom.action[d]);
      out << "\n";
    }
  }
}

Mechanism read_mechanism(std::istream& in) {
  std::string tag;
  long n = 0;
  size_t count = 0;
  in >> tag >> n >> count;
  if (tag != "mechanism" || !in) throw std::invalid_argument("malformed mechanism header");
  Mechanism mech;
  mech.menu.pieces.resize(count);
  mech.lotteries.resize(count);
  for (size_t k = 0; k < count; ++k) {
    in >> tag;
    if (tag != "piece") throw std::invalid_argument("malformed mechanism piece");
    mech.menu.pieces[k].a.resize(n);
    for (long d = 0; d < n; ++d) in >> mech.menu.pieces[k].a[d];
    in >> mech.menu.pieces[k].c;
    size_t atoms = 0;
    in >> tag >> atoms;
    if (tag != "atoms" || !in) throw std::invalid_argument("malformed lottery header");
    mech.lotteries[k].atoms.resize(atoms);
    for (auto& atom : mech.lotteries[k].atoms) {
      in >> tag >> atom.probability;
      if (tag != "atom") throw std::invalid_argument("malformed lottery atom");
      atom.action.resize(n);
      for (long d = 0; d < n; ++d) in >> atom.action[d];
    }
    validate_lottery(mech.lotteries[k]);
  }
  return mech;
}

void write_curve_csv(std::ostream& out, const BoundaryCurve& curve) {
  out << "x,y,nx,ny\n";
  for (long i = 0; i < curve.size(); ++i)
    out << format_float(curve.vertices(i, 0)) << "," << format_float(curve.vertices(i, 1)) << ","
        << format_float(curve.normals(i, 0)) << "," << format_float(curve.normals(i, 1)) << "\n";
}

BoundaryCurve read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty curve file");
  std::vector<std::pair<double, double>> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string x_str, y_str;
    if (!std::getline(row, x_str, ',') || !std::getline(row, y_str, ','))
      throw std::invalid_argument("malformed curve row");
    points.emplace_back(std::stod(x_str), std::stod(y_str));
  }
  Matrix vertices(static_cast<long>(points.size()), 2);
  for (size_t i = 0; i < points.size(); ++i)
    vertices.row(static_cast<long>(i)) << points[i].first, points[i].second;
  return make_curve(std::move(vertices));
}

void write_solution_csv(std::ostream& out, const LPInstance& instance,
                        const LPSolution& solution) {
  const int n = static_cast<int>(instance.nodes.cols());
  for (int d = 0; d < n; ++d) out << "x" << d << ",";
  out << "u";
  for (int d = 0; d < n; ++d) out << ",du" << d;
  out << "\n";
  for (long i = 0; i < instance.value_vars; ++i) {
    for (int d = 0; d < n; ++d) out << format_float(instance.nodes(i, d)) << ",";
    out << format_float(solution.node_values[i]);
    if (n == 1) {
      // Forward-difference slope; the last node reuses the previous one.
      double slope = 0.0;
      if (i + 1 < instance.value_vars)
        slope = (solution.node_values[i + 1] - solution.node_values[i]) /
                (instance.nodes(i + 1, 0) - instance.nodes(i, 0));
      else if (i > 0)
        slope = (solution.node_values[i] - solution.node_values[i - 1]) /
                (instance.nodes(i, 0) - instance.nodes(i - 1, 0));
      out << "," << format_float(slope);
    } else {
      for (int d = 0; d < n; ++d)
        out << "," << format_float(solution.subgradients[i * n + d]);
    }
    out << "\n";
  }
}

}  // namespace deleg
