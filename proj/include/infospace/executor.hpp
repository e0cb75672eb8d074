// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infospace/compiler.hpp"
#include "infospace/database.hpp"

namespace infospace {

inline constexpr std::size_t kDefaultRowCap = 10000;

struct ResultTable {
  std::vector<OutputColumn> columns;
  std::vector<std::vector<Scalar>> rows;
  bool truncated = false;

  /// Column-aligned text with a header of column labels.
  std::string to_text() const;
  /// One JSON object per row keyed by column label, newline separated.
  std::string to_records() const;
  /// `{"columns": [{label, types, units, nicename}], "rows": [...], "truncated": b}`.
  nlohmann::ordered_json to_json() const;
};

nlohmann::ordered_json scalar_json(const Scalar& v);

/// Runs a compiled query. Filter-typed columns come back as booleans and
/// Datetime-typed text as Datetime values.
ResultTable execute(const Database& db, const CompiledQuery& query, std::size_t row_cap = kDefaultRowCap);

/// Host-side reductions; nulls are dropped by the callers.
std::optional<double> median(std::vector<double> values);
std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys);
std::optional<double> population_stddev(const std::vector<double>& values);

}  // namespace infospace
