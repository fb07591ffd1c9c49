#include "divfree/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace divfree {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string cell_text(const Table::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return csv_field(std::get<std::string>(c));
}

// Non-finite numbers are kept as strings; JSON has no literal for them.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                                std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out += ',';
    out += csv_field(columns[j]);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += cell_text(row[j]);
    }
    out += '\n';
  }
  return out;
}

json Table::to_json() const {
  json rows_json = json::array();
  for (const auto& row : rows) {
    json r = json::object();
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              r[columns[j]] = number(v);
            else
              r[columns[j]] = v;
          },
          row[j]);
    }
    rows_json.push_back(std::move(r));
  }
  return json{{"name", name}, {"rows", rows_json}};
}

const Verdict& EstimateReport::add(Verdict v) {
  verdicts.push_back(std::move(v));
  return verdicts.back();
}

Table& EstimateReport::table(std::string name, std::vector<std::string> columns) {
  tables.push_back(Table{std::move(name), std::move(columns), {}});
  return tables.back();
}

bool EstimateReport::hard_ok() const { return failures().empty(); }

std::vector<std::string> EstimateReport::failures() const {
  std::vector<std::string> out;
  for (const auto& v : verdicts)
    if (v.hard && !v.ok()) out.push_back(v.name);
  return out;
}

json to_json(const Verdict& v) {
  json j{{"name", v.name},     {"lhs", number(v.lhs)},       {"rhs", number(v.rhs)},
         {"margin", number(v.margin)}, {"slack", v.slack}, {"verdict", v.status_text()},
         {"hard", v.hard}};
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

json to_json(const SolveReport& r, const std::string& label) {
  json j{{"label", label},
         {"method", r.method},
         {"iterations", r.iterations},
         {"inner_iterations", r.inner_iterations},
         {"residual", number(r.residual_norm)},
         {"weak_residual", number(r.weak_residual)}};
  if (r.spectral_radius > 0.0) j["spectral_radius"] = number(r.spectral_radius);
  if (r.solution.space_ptr()) {
    j["dofs"] = r.solution.values().size();
    j["norms"] = json{{"l2", number(norm(r.solution, NormKind::l2))},
                      {"h1_semi", number(norm(r.solution, NormKind::h1_semi))},
                      {"linf", number(norm(r.solution, NormKind::linf))}};
  }
  return j;
}

json EstimateReport::to_json() const {
  json c = json::object(), n = json::object(), v = json::array(), t = json::array();
  for (const auto& x : constants) c[x.name] = number(x.value);
  for (const auto& x : norms) n[x.name] = number(x.value);
  for (const auto& x : verdicts) v.push_back(divfree::to_json(x));
  for (const auto& x : tables) t.push_back(x.to_json());
  json j{{"suite", suite}, {"anchor", anchor}, {"constants", c}, {"norms", n},
         {"verdicts", v},  {"solves", solves}, {"tables", t},   {"passed", hard_ok()}};
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

std::string EstimateReport::verdict_csv() const {
  std::string out = "name,lhs,rhs,margin,verdict\n";
  for (const auto& v : verdicts)
    out += csv_field(v.name) + ',' + format_double(v.lhs) + ',' + format_double(v.rhs) + ',' +
           format_double(v.margin) + ',' + v.status_text() + '\n';
  return out;
}

bool reproducible(const EstimateReport& report) {
  for (const auto& v : report.verdicts) {
    if (v.status == VerdictStatus::not_applicable) continue;
    const bool holds = v.lhs <= v.rhs * (1.0 + v.slack);
    if (holds != (v.status == VerdictStatus::holds)) return false;
  }
  return true;
}

}  // namespace divfree
