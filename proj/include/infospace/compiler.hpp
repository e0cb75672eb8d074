// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "infospace/database.hpp"
#include "infospace/labeling.hpp"
#include "infospace/plan.hpp"

namespace infospace {

struct JoinStep {
  std::string table;
  std::string joined_from;  // table already in the plan that this join attaches to
  std::vector<std::pair<ColumnRef, ColumnRef>> on;
  std::string join_name;
  std::string provenance;  // "entity:<name>" or "relationship:<name>"

  friend bool operator==(const JoinStep&, const JoinStep&) = default;
};

/// Inner joins needed to bring every used attribute into one row source.
struct JoinPlan {
  std::string root_table;
  std::vector<JoinStep> joins;

  bool contains_table(const std::string& table) const;
};

/// Entities in first-use order, attributes as (entity, attribute) pairs.
/// Intra-entity chains come first, then relationship chains between the
/// first entity and every other one; a join whose table is already present
/// is skipped.
JoinPlan resolve_joins(const DomainLabeling& labeling, const std::vector<std::string>& entities_used,
                       const std::vector<AttributeBinding>& attributes_used);

/// Which functions the target engine evaluates natively. Anything missing
/// runs on the host through functions registered on the connection.
struct Dialect {
  bool native_stddev = false;
  bool native_group_concat = true;
  bool native_sqrt = false;

  static Dialect sqlite() { return {}; }
  static Dialect portable() { return {false, false, false}; }
};

enum class HostFunction { Median, Correlation, StddevFallback, StringAggFallback, SqrtFallback };

std::string_view to_string(HostFunction f) noexcept;

/// Describes host-side reductions a query depends on: which output columns
/// they produce and which output columns are its group keys.
struct PostAggregation {
  HostFunction kind = HostFunction::Median;
  std::vector<int> group_key_columns;
  std::vector<int> value_columns;
  int value_arity = 1;
};

struct OutputColumn {
  std::string label;
  TypeSet types;
  std::optional<std::string> units;
  std::string nicename;
};

struct CompiledQuery {
  std::string sql_text;
  std::vector<Scalar> params;
  std::vector<OutputColumn> columns;
  std::vector<PostAggregation> post_aggregation;
};

struct SqlFragment {
  std::string text;
  std::vector<Scalar> params;
};

/// Lowers one operation over already-rendered argument expressions.
/// `literal_args` marks arguments that are bound literals (for the
/// constant-zero divisor check).
SqlFragment lower_operation(const std::string& op, const std::vector<SqlFragment>& args, const Dialect& dialect,
                            const std::vector<bool>& literal_args = {});

/// Whether `op` has a lowering rule.
bool has_lowering(const std::string& op);

/// Compiles one subplan. Subplans it reads through pseudo-entities are
/// compiled recursively into derived tables.
CompiledQuery compile_subplan(const CheckedPlan& checked, const Subplan& subplan, const DomainLabeling& labeling,
                              const Dialect& dialect = Dialect::sqlite());

/// Compiles the subplan of the last return step.
CompiledQuery compile_plan(const CheckedPlan& checked, const DomainLabeling& labeling,
                           const Dialect& dialect = Dialect::sqlite());

struct PreparedPlan {
  CheckedPlan checked;
  CompiledQuery query;
};

/// check_plan followed by compile_plan.
PreparedPlan prepare_plan(const PlanGraph& plan, const OperationRegistry& registry, const DomainLabeling& labeling,
                          const Dialect& dialect = Dialect::sqlite());

std::string quote_identifier(const std::string& name);

/// Text form used by the `compile` subcommand: SQL, then a `params:` line.
std::string describe(const CompiledQuery& query);

}  // namespace infospace
