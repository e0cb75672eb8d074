// SPDX-License-Identifier: Apache-2.0

#include "infospace/database.hpp"

#include <sqlite3.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <memory>
#include <vector>

#include "infospace/error.hpp"
#include "infospace/executor.hpp"

namespace infospace {

bool is_null(const Scalar& v) noexcept { return std::holds_alternative<std::monostate>(v); }

std::string to_display(const Scalar& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      if (std::isnan(d)) return "nan";
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, d);
      std::string out(buf, res.ptr);
      // Keep doubles distinguishable from integers.
      if (std::isfinite(d) && out.find_first_of(".e") == std::string::npos) out += ".0";
      return out;
    }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const Datetime& d) const { return d.iso; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, v);
}

namespace {

// Per-group state for the host aggregates: collected non-null inputs.
struct Samples {
  std::vector<double>* xs = nullptr;
  std::vector<double>* ys = nullptr;
  std::vector<std::string>* texts = nullptr;
};

Samples* samples(sqlite3_context* ctx, bool create) {
  auto* slot = static_cast<Samples*>(sqlite3_aggregate_context(ctx, create ? sizeof(Samples) : 0));
  return slot;
}

void release(Samples* s) {
  if (!s) return;
  delete s->xs;
  delete s->ys;
  delete s->texts;
  s->xs = nullptr;
  s->ys = nullptr;
  s->texts = nullptr;
}

void result_or_null(sqlite3_context* ctx, std::optional<double> v) {
  if (v && std::isfinite(*v)) sqlite3_result_double(ctx, *v);
  else sqlite3_result_null(ctx);
}

void numeric_step(sqlite3_context* ctx, int, sqlite3_value** argv) {
  if (sqlite3_value_type(argv[0]) == SQLITE_NULL) return;
  Samples* s = samples(ctx, true);
  if (!s) return sqlite3_result_error_nomem(ctx);
  if (!s->xs) s->xs = new std::vector<double>;
  s->xs->push_back(sqlite3_value_double(argv[0]));
}

void median_final(sqlite3_context* ctx) {
  Samples* s = samples(ctx, false);
  if (!s || !s->xs) return sqlite3_result_null(ctx);
  result_or_null(ctx, median(*s->xs));
  release(s);
}

void stddev_final(sqlite3_context* ctx) {
  Samples* s = samples(ctx, false);
  if (!s || !s->xs) return sqlite3_result_null(ctx);
  result_or_null(ctx, population_stddev(*s->xs));
  release(s);
}

// Pairs with a null on either side are dropped.
void corr_step(sqlite3_context* ctx, int, sqlite3_value** argv) {
  if (sqlite3_value_type(argv[0]) == SQLITE_NULL || sqlite3_value_type(argv[1]) == SQLITE_NULL) return;
  Samples* s = samples(ctx, true);
  if (!s) return sqlite3_result_error_nomem(ctx);
  if (!s->xs) s->xs = new std::vector<double>;
  if (!s->ys) s->ys = new std::vector<double>;
  s->xs->push_back(sqlite3_value_double(argv[0]));
  s->ys->push_back(sqlite3_value_double(argv[1]));
}

void corr_final(sqlite3_context* ctx) {
  Samples* s = samples(ctx, false);
  if (!s || !s->xs) return sqlite3_result_null(ctx);
  result_or_null(ctx, pearson(*s->xs, *s->ys));
  release(s);
}

void text_step(sqlite3_context* ctx, int, sqlite3_value** argv) {
  if (sqlite3_value_type(argv[0]) == SQLITE_NULL) return;
  Samples* s = samples(ctx, true);
  if (!s) return sqlite3_result_error_nomem(ctx);
  if (!s->texts) s->texts = new std::vector<std::string>;
  const auto* text = reinterpret_cast<const char*>(sqlite3_value_text(argv[0]));
  s->texts->emplace_back(text, static_cast<std::size_t>(sqlite3_value_bytes(argv[0])));
}

void text_final(sqlite3_context* ctx) {
  Samples* s = samples(ctx, false);
  if (!s || !s->texts) return sqlite3_result_null(ctx);
  std::string out;
  for (std::size_t i = 0; i < s->texts->size(); ++i) {
    if (i) out += ", ";
    out += (*s->texts)[i];
  }
  sqlite3_result_text(ctx, out.c_str(), static_cast<int>(out.size()), SQLITE_TRANSIENT);
  release(s);
}

void sqrt_fn(sqlite3_context* ctx, int, sqlite3_value** argv) {
  if (sqlite3_value_type(argv[0]) == SQLITE_NULL) return sqlite3_result_null(ctx);
  double v = sqlite3_value_double(argv[0]);
  if (v < 0) return sqlite3_result_null(ctx);
  sqlite3_result_double(ctx, std::sqrt(v));
}

void register_functions(sqlite3* db) {
  constexpr int flags = SQLITE_UTF8 | SQLITE_DETERMINISTIC;
  struct Agg {
    const char* name;
    int args;
    void (*step)(sqlite3_context*, int, sqlite3_value**);
    void (*final)(sqlite3_context*);
  };
  const Agg aggs[] = {
      {"infospace_median", 1, numeric_step, median_final},
      {"infospace_stddev", 1, numeric_step, stddev_final},
      {"infospace_corr", 2, corr_step, corr_final},
      {"infospace_string_agg", 1, text_step, text_final},
  };
  for (const auto& a : aggs) {
    if (sqlite3_create_function_v2(db, a.name, a.args, flags, nullptr, nullptr, a.step, a.final, nullptr) != SQLITE_OK) {
      throw DatabaseError(std::string("cannot register ") + a.name + ": " + sqlite3_errmsg(db));
    }
  }
  if (sqlite3_create_function_v2(db, "infospace_sqrt", 1, flags, nullptr, sqrt_fn, nullptr, nullptr, nullptr) !=
      SQLITE_OK) {
    throw DatabaseError(std::string("cannot register infospace_sqrt: ") + sqlite3_errmsg(db));
  }
}

struct Statement {
  sqlite3_stmt* stmt = nullptr;
  ~Statement() { sqlite3_finalize(stmt); }
};

std::string describe_params(const std::vector<Scalar>& params) {
  std::string out = "[";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ", ";
    out += to_display(params[i]);
  }
  return out + "]";
}

void bind(sqlite3_stmt* stmt, int index, const Scalar& v) {
  struct Visitor {
    sqlite3_stmt* s;
    int i;
    int operator()(std::monostate) const { return sqlite3_bind_null(s, i); }
    int operator()(std::int64_t v) const { return sqlite3_bind_int64(s, i, v); }
    int operator()(double v) const { return sqlite3_bind_double(s, i, v); }
    int operator()(const std::string& v) const {
      return sqlite3_bind_text(s, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    }
    int operator()(const Datetime& v) const {
      return sqlite3_bind_text(s, i, v.iso.c_str(), static_cast<int>(v.iso.size()), SQLITE_TRANSIENT);
    }
    int operator()(bool v) const { return sqlite3_bind_int(s, i, v ? 1 : 0); }
  };
  if (std::visit(Visitor{stmt, index}, v) != SQLITE_OK) throw DatabaseError("cannot bind parameter " + std::to_string(index));
}

Scalar column_value(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT: return sqlite3_column_double(stmt, col);
    case SQLITE_NULL: return std::monostate{};
    default: {
      const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
      return std::string(text ? text : "", static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)));
    }
  }
}

}  // namespace

Database Database::open_readonly(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "database file not found: " + path);
  sqlite3* handle = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &handle, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = handle ? sqlite3_errmsg(handle) : "out of memory";
    sqlite3_close(handle);
    throw DatabaseError("cannot open " + path + ": " + msg);
  }
  Database db(handle, path);
  sqlite3_busy_timeout(handle, 5000);
  register_functions(handle);
  return db;
}

Database::Database(Database&& other) noexcept : handle_(other.handle_), path_(std::move(other.path_)) {
  other.handle_ = nullptr;
}

Database& Database::operator=(Database&& other) noexcept {
  if (this != &other) {
    sqlite3_close(handle_);
    handle_ = other.handle_;
    path_ = std::move(other.path_);
    other.handle_ = nullptr;
  }
  return *this;
}

Database::~Database() { sqlite3_close(handle_); }

RawResult Database::query(const std::string& sql, const std::vector<Scalar>& params, std::size_t row_cap) const {
  Statement st;
  if (sqlite3_prepare_v2(handle_, sql.c_str(), static_cast<int>(sql.size()), &st.stmt, nullptr) != SQLITE_OK) {
    throw DatabaseError(std::string(sqlite3_errmsg(handle_)) + "\n  sql: " + sql + "\n  params: " + describe_params(params));
  }
  if (!sqlite3_stmt_readonly(st.stmt)) throw DatabaseError("refusing to run a statement that writes: " + sql);
  if (sqlite3_bind_parameter_count(st.stmt) != static_cast<int>(params.size())) {
    throw DatabaseError("statement expects " + std::to_string(sqlite3_bind_parameter_count(st.stmt)) +
                        " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) bind(st.stmt, static_cast<int>(i + 1), params[i]);

  RawResult out;
  int ncols = sqlite3_column_count(st.stmt);
  for (int c = 0; c < ncols; ++c) out.column_names.emplace_back(sqlite3_column_name(st.stmt, c));
  for (;;) {
    int rc = sqlite3_step(st.stmt);
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) {
      throw DatabaseError(std::string(sqlite3_errmsg(handle_)) + "\n  sql: " + sql + "\n  params: " + describe_params(params));
    }
    if (out.rows.size() >= row_cap) {
      out.truncated = true;
      break;
    }
    std::vector<Scalar> row;
    row.reserve(ncols);
    for (int c = 0; c < ncols; ++c) row.push_back(column_value(st.stmt, c));
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::optional<std::vector<LiveColumn>> Database::table_columns(const std::string& table) const {
  Statement st;
  const char* sql = "SELECT name, type FROM pragma_table_info(?)";
  if (sqlite3_prepare_v2(handle_, sql, -1, &st.stmt, nullptr) != SQLITE_OK) throw DatabaseError(sqlite3_errmsg(handle_));
  sqlite3_bind_text(st.stmt, 1, table.c_str(), static_cast<int>(table.size()), SQLITE_TRANSIENT);
  std::vector<LiveColumn> cols;
  while (sqlite3_step(st.stmt) == SQLITE_ROW) {
    const auto* name = reinterpret_cast<const char*>(sqlite3_column_text(st.stmt, 0));
    const auto* type = reinterpret_cast<const char*>(sqlite3_column_text(st.stmt, 1));
    cols.push_back({name ? name : "", type ? type : ""});
  }
  if (cols.empty()) return std::nullopt;
  return cols;
}

bool Database::has_native_function(const std::string& name) const {
  Statement st;
  const char* sql = "SELECT 1 FROM pragma_function_list WHERE name = ? LIMIT 1";
  if (sqlite3_prepare_v2(handle_, sql, -1, &st.stmt, nullptr) != SQLITE_OK) return false;
  sqlite3_bind_text(st.stmt, 1, name.c_str(), static_cast<int>(name.size()), SQLITE_TRANSIENT);
  return sqlite3_step(st.stmt) == SQLITE_ROW;
}

void create_database(const std::string& path, const std::string& script) {
  std::error_code ec;
  std::filesystem::remove(path, ec);
  sqlite3* handle = nullptr;
  if (sqlite3_open_v2(path.c_str(), &handle, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) != SQLITE_OK) {
    std::string msg = handle ? sqlite3_errmsg(handle) : "out of memory";
    sqlite3_close(handle);
    throw DatabaseError("cannot create " + path + ": " + msg);
  }
  std::unique_ptr<sqlite3, int (*)(sqlite3*)> guard(handle, sqlite3_close);
  char* err = nullptr;
  if (sqlite3_exec(handle, script.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw DatabaseError("seed script failed for " + path + ": " + msg);
  }
}

}  // namespace infospace
