#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "deleg/boundary2d.hpp"
#include "deleg/lp.hpp"
#include "deleg/measure.hpp"
#include "deleg/mech.hpp"

namespace deleg {

// All emitted floats carry 17 significant digits so reruns are byte-identical
// and values round-trip exactly.
std::string format_float(double x);

// Minimal ordered JSON writer; keys appear in insertion order.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array(const std::string& key);
  JsonWriter& begin_array_object();
  JsonWriter& end_array();
  JsonWriter& field(const std::string& key, double value);
  JsonWriter& field(const std::string& key, long value);
  JsonWriter& field(const std::string& key, int value);
  JsonWriter& field(const std::string& key, bool value);
  JsonWriter& field(const std::string& key, const std::string& value);
  JsonWriter& element(double value);
  std::string str() const;

 private:
  void separator();
  std::string out_;
  std::vector<bool> first_in_scope_;
};

void write_measure_csv(std::ostream& out, const SignedMeasureGrid& measure);

void write_menu(std::ostream& out, const Menu& menu);
Menu read_menu(std::istream& in);

void write_mechanism(std::ostream& out, const Mechanism& mechanism);
Mechanism read_mechanism(std::istream& in);

void write_curve_csv(std::ostream& out, const BoundaryCurve& curve);
BoundaryCurve read_curve_csv(std::istream& in);

// Node table of an LP solution: coordinates, U, and the subgradient (1D uses
// the forward difference).
void write_solution_csv(std::ostream& out, const LPInstance& instance,
                        const LPSolution& solution);

}  // namespace deleg
