// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

struct sqlite3;

namespace infospace {

struct Datetime {
  std::string iso;

  friend auto operator<=>(const Datetime&, const Datetime&) = default;
};

/// A single cell value or bound parameter.
using Scalar = std::variant<std::monostate, std::int64_t, double, std::string, Datetime, bool>;

bool is_null(const Scalar& v) noexcept;
/// Display form: integers plainly, doubles in shortest round-trip form (always with a point or exponent),
/// text as-is, null as "null".
std::string to_display(const Scalar& v);

struct RawResult {
  std::vector<std::string> column_names;
  std::vector<std::vector<Scalar>> rows;
  bool truncated = false;
};

struct LiveColumn {
  std::string name;
  std::string declared_type;
};

/// Read-only connection to a single-file embedded database. Opening
/// registers the host-side aggregate and scalar functions used for
/// operations the engine cannot evaluate natively.
class Database {
 public:
  static Database open_readonly(const std::string& path);

  Database(Database&& other) noexcept;
  Database& operator=(Database&& other) noexcept;
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;
  ~Database();

  /// Runs a SELECT; at most `row_cap` rows are returned and `truncated` is
  /// set when more were available.
  RawResult query(const std::string& sql, const std::vector<Scalar>& params, std::size_t row_cap) const;

  /// Columns of `table` in the live schema, or nullopt when the table is absent.
  std::optional<std::vector<LiveColumn>> table_columns(const std::string& table) const;

  /// Whether the engine evaluates `name` natively (e.g. "sqrt").
  bool has_native_function(const std::string& name) const;

  const std::string& path() const noexcept { return path_; }

 private:
  Database(sqlite3* handle, std::string path) : handle_(handle), path_(std::move(path)) {}

  sqlite3* handle_ = nullptr;
  std::string path_;
};

/// Creates (or replaces) a database file by running `script`. Used to build
/// fixture databases; the only writing entry point in the library.
void create_database(const std::string& path, const std::string& script);

}  // namespace infospace
