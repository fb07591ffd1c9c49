#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "divfree/solver.hpp"
#include "divfree/verify.hpp"

namespace divfree {

using json = nlohmann::ordered_json;

/// Decimal with 17 significant digits ("inf", "-inf", "nan" for non-finite).
std::string format_double(double v);

struct NamedValue {
  std::string name;
  double value = 0.0;
};

/// A plain table for tables/*.csv; cells are numbers, integers or text.
struct Table {
  using Cell = std::variant<double, long long, std::string>;

  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::string csv() const;
  json to_json() const;
};

/// Constants, measured norms and inequality verdicts of one suite.
struct EstimateReport {
  std::string suite;
  std::string anchor;
  std::vector<NamedValue> constants;
  std::vector<NamedValue> norms;
  std::vector<Verdict> verdicts;
  std::vector<json> solves;
  std::vector<Table> tables;
  std::vector<std::string> notes;

  void constant(std::string name, double value) { constants.push_back({std::move(name), value}); }
  void measured(std::string name, double value) { norms.push_back({std::move(name), value}); }
  const Verdict& add(Verdict v);
  Table& table(std::string name, std::vector<std::string> columns);

  bool hard_ok() const;
  /// Names of failed hard verdicts.
  std::vector<std::string> failures() const;

  json to_json() const;
  /// name,lhs,rhs,margin,verdict
  std::string verdict_csv() const;
};

json to_json(const Verdict& v);
json to_json(const SolveReport& r, const std::string& label);

/// Recomputes each verdict from its stored lhs and rhs; false on any mismatch.
bool reproducible(const EstimateReport& report);

}  // namespace divfree
