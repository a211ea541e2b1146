#pragma once

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "krrpm/calibration.hpp"
#include "krrpm/cps.hpp"
#include "krrpm/errors.hpp"
#include "krrpm/kernels.hpp"

namespace krrpm {

struct Dataset {
  Matrix objects;
  Vector labels;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_number(const std::string& field, const std::string& path, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(field, &pos);
    while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InputError(path + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
  }
}

// Rows of numbers after a header line; every row must match the header width.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1) {
      header = fields;
      continue;
    }
    if (fields.size() != header.size())
      throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, path, line_no));
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw InputError(path + ":1: missing header row");
  return {std::move(header), std::move(rows)};
}

}  // namespace detail

// Training CSV: header row with feature columns then a final `y` column.
inline Dataset read_dataset_csv(const std::string& path) {
  auto [header, rows] = detail::read_csv(path);
  if (header.size() < 2 || header.back() != "y")
    throw InputError(path + ":1: expected feature columns followed by a final 'y' column");
  if (rows.empty()) throw InputError(path + ": no data rows");
  const auto d = header.size() - 1;
  Dataset ds;
  ds.objects.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j)
      ds.objects(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    ds.labels(static_cast<Eigen::Index>(i)) = rows[i][d];
  }
  return ds;
}

// Test-object CSV: same layout minus the label column.
inline Matrix read_objects_csv(const std::string& path) {
  auto [header, rows] = detail::read_csv(path);
  if (header.back() == "y")
    throw InputError(path + ":1: test files must not carry a 'y' column");
  if (rows.empty()) throw InputError(path + ": no data rows");
  Matrix objects(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j)
      objects(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return objects;
}

// Curve table with a fixed header; UTF-8, LF line endings.
inline void write_curve_csv(const std::string& path, const std::vector<std::string>& columns,
                            const std::vector<Vector>& values) {
  if (columns.empty() || columns.size() != values.size())
    throw InputError("write_curve_csv: column/value mismatch");
  for (const auto& v : values)
    if (v.size() != values.front().size())
      throw InputError("write_curve_csv: columns have different lengths");
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << std::setprecision(12);
  for (std::size_t j = 0; j < columns.size(); ++j)
    out << columns[j] << (j + 1 < columns.size() ? ',' : '\n');
  for (Eigen::Index i = 0; i < values.front().size(); ++i)
    for (std::size_t j = 0; j < values.size(); ++j)
      out << values[j](i) << (j + 1 < values.size() ? ',' : '\n');
}

inline nlohmann::json to_json(const ConformalDistribution& dist) {
  nlohmann::json j;
  j["n"] = dist.n();
  j["C"] = std::vector<double>(dist.critical_values().data(),
                               dist.critical_values().data() + dist.n());
  j["variant"] = variant_name(dist.variant());
  return j;
}

inline ConformalDistribution conformal_distribution_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("C") || !j.contains("variant"))
    throw InputError("conformal distribution JSON: missing n/C/variant");
  auto values = j.at("C").get<std::vector<double>>();
  if (j.at("n").get<int>() != static_cast<int>(values.size()))
    throw InputError("conformal distribution JSON: n does not match C length");
  Vector c(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) c(static_cast<Eigen::Index>(i)) = values[i];
  return ConformalDistribution::from_sorted(std::move(c),
                                            variant_from_string(j.at("variant").get<std::string>()));
}

inline nlohmann::json to_json(const CalibrationReport& report) {
  nlohmann::json j;
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["ks_statistic"] = report.ks_statistic;
  j["histogram"] = report.histogram;
  j["pit_values"] = report.pit_values;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace krrpm
