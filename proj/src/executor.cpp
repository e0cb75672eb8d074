// SPDX-License-Identifier: Apache-2.0

#include "infospace/executor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "infospace/error.hpp"

namespace infospace {

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::InvalidArgument, "pearson: length mismatch");
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
    sxy += xs[i] * ys[i];
  }
  double vx = n * sxx - sx * sx;
  double vy = n * syy - sy * sy;
  // Cancellation can leave a tiny residue for constant inputs.
  double scale_x = n * sxx, scale_y = n * syy;
  if (vx <= 1e-12 * std::max(1.0, scale_x) || vy <= 1e-12 * std::max(1.0, scale_y)) return std::nullopt;
  double r = (n * sxy - sx * sy) / std::sqrt(vx * vy);
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> population_stddev(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

namespace {

Scalar convert(Scalar v, const OutputColumn& col) {
  if (col.types.contains(AttributeType::Filter)) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i != 0;
    if (auto d = std::get_if<double>(&v)) return *d != 0.0;
  }
  if (col.types.contains(AttributeType::Datetime)) {
    if (auto s = std::get_if<std::string>(&v)) return Datetime{std::move(*s)};
  }
  return v;
}

}  // namespace

nlohmann::ordered_json scalar_json(const Scalar& v) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(std::int64_t i) const { return i; }
    nlohmann::ordered_json operator()(double d) const { return std::isfinite(d) ? nlohmann::ordered_json(d) : nlohmann::ordered_json(nullptr); }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(const Datetime& d) const { return d.iso; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
  };
  return std::visit(Visitor{}, v);
}

ResultTable execute(const Database& db, const CompiledQuery& query, std::size_t row_cap) {
  RawResult raw = db.query(query.sql_text, query.params, row_cap);
  if (raw.column_names.size() != query.columns.size()) {
    throw Error(ErrorCode::Internal, "query returned " + std::to_string(raw.column_names.size()) + " columns, expected " +
                                         std::to_string(query.columns.size()));
  }
  ResultTable table;
  table.columns = query.columns;
  table.truncated = raw.truncated;
  table.rows.reserve(raw.rows.size());
  for (auto& row : raw.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = convert(std::move(row[c]), query.columns[c]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string ResultTable::to_text() const {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header;
  for (const auto& c : columns) header.push_back(c.label + (c.units ? " (" + *c.units + ")" : ""));
  cells.push_back(header);
  for (const auto& row : rows) {
    std::vector<std::string> line;
    for (const auto& v : row) line.push_back(to_display(v));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(columns.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c) out << "  ";
      out << cells[r][c];
      if (c + 1 < cells[r].size()) out << std::string(width[c] - cells[r][c].size(), ' ');
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) out << (c ? "  " : "") << std::string(width[c], '-');
      out << '\n';
    }
  }
  if (truncated) out << "(truncated)\n";
  return out.str();
}

nlohmann::ordered_json ResultTable::to_json() const {
  nlohmann::ordered_json out;
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : columns) {
    auto types = nlohmann::ordered_json::array();
    for (auto t : c.types.members()) types.push_back(std::string(to_string(t)));
    cols.push_back({{"label", c.label},
                    {"types", types},
                    {"units", c.units ? nlohmann::ordered_json(*c.units) : nlohmann::ordered_json(nullptr)},
                    {"nicename", c.nicename}});
  }
  auto data = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    auto line = nlohmann::ordered_json::array();
    for (const auto& v : row) line.push_back(scalar_json(v));
    data.push_back(std::move(line));
  }
  out["columns"] = std::move(cols);
  out["rows"] = std::move(data);
  out["truncated"] = truncated;
  return out;
}

std::string ResultTable::to_records() const {
  std::string out;
  for (const auto& row : rows) {
    nlohmann::ordered_json rec = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) rec[columns[c].label] = scalar_json(row[c]);
    out += rec.dump() + "\n";
  }
  return out;
}

}  // namespace infospace
