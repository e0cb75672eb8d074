// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infospace/database.hpp"
#include "infospace/executor.hpp"
#include "infospace/fixtures.hpp"
#include "infospace/labeling.hpp"
#include "infospace/spacegen.hpp"

namespace infospace::testing {

/// One row of the reference operation table. Slots read
/// "arity:Type,Type" separated by ";".
struct OperationRow {
  const char* name;
  const char* category;
  const char* inputs;
  const char* outputs;
};

/// All 33 rows; corrections are marked in test_support.cpp.
const std::vector<OperationRow>& operation_table();
std::vector<Slot> parse_slots(const std::string& text);

/// Fixture domains built once per process under a scratch directory that is
/// removed at exit.
const std::vector<FixturePaths>& fixtures();
const FixturePaths& fixture(const std::string& name);
const DomainLabeling& fixture_labeling_of(const std::string& name);

/// Fresh empty directory under the process scratch area.
std::string scratch_dir(const std::string& name);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// parse, check, compile and execute against the fixture database.
ResultTable run_plan(const std::string& fixture_name, const std::string& plan_text, std::size_t row_cap = kDefaultRowCap);

// Reference reducers written from the textbook definitions, independent of
// the library's own implementations.
std::optional<double> oracle_median(std::vector<double> xs);
std::optional<double> oracle_population_stddev(const std::vector<double>& xs);
/// Centered two-pass form: cov(x, y) / sqrt(var(x) var(y)).
std::optional<double> oracle_pearson(const std::vector<double>& xs, const std::vector<double>& ys);

nlohmann::json scalar_to_json(const Scalar& v);
nlohmann::json rows_to_json(const std::vector<std::vector<Scalar>>& rows);

/// Two-entity desk-scale domain: Shop(region, revenue, rating, opened) and
/// Visit(kind, spend, party), one-to-many. `visits` may be left empty.
std::string toy_labeling_document();
std::string toy_seed_sql(bool with_visits = true);

/// Aggregate of a measure grouped by a second attribute of the same entity,
/// with the aggregation drawn from `ops`.
PlanTemplate toy_template(const std::vector<std::string>& ops);

/// Slot fillings of toy_template counted by walking the cross product of
/// entities, attributes and operations and keeping the combinations whose
/// every argument passes types_accept against the operation tables.
std::size_t brute_force_fillings(const DomainLabeling& labeling, const OperationRegistry& registry,
                                 const std::vector<std::string>& ops);

/// Runs an entry's oracle SQL directly and applies its reduction.
nlohmann::json oracle_rows(const Database& db, const ManifestEntry& entry);

/// Empty when equal. Numbers match within 1e-9 (relative above 1), booleans
/// equal 0/1; unordered comparison matches rows as multisets.
std::string compare_rows(const nlohmann::json& actual, const nlohmann::json& expected, bool ordered);

}  // namespace infospace::testing
