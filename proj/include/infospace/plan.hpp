// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "infospace/error.hpp"
#include "infospace/labeling.hpp"
#include "infospace/taxonomy.hpp"

namespace infospace {

struct StepRef {
  int id = 0;
  friend bool operator==(const StepRef&, const StepRef&) = default;
};

struct StringLit {
  std::string text;
  friend bool operator==(const StringLit&, const StringLit&) = default;
};

struct NumberLit {
  double value = 0.0;
  friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

using PlanArg = std::variant<StepRef, StringLit, NumberLit>;

struct PlanStep {
  int id = 0;
  std::string op;
  std::vector<PlanArg> args;
  int line = 0;  // source position, not part of equality
  int column = 0;

  friend bool operator==(const PlanStep& a, const PlanStep& b) {
    return a.id == b.id && a.op == b.op && a.args == b.args;
  }
};

/// A DAG of numbered steps. References point strictly backwards, so the
/// document order is a topological order.
struct PlanGraph {
  std::vector<PlanStep> steps;
  std::vector<int> returns;
  std::vector<Diagnostic> warnings;

  const PlanStep* step(int id) const noexcept;
  const PlanStep& step_or_throw(int id) const;

  friend bool operator==(const PlanGraph& a, const PlanGraph& b) {
    return a.steps == b.steps && a.returns == b.returns;
  }
};

/// Grammar, one step per line:
///   |<int>| <op>(<arg>, ...)    # comment
/// where an arg is a step reference `|<int>|`, a double-quoted string
/// (escapes \" \\ \n \t) or a decimal number.
PlanGraph parse_plan(std::string_view text);

/// Canonical text: ids renumbered consecutively from 1.
std::string render_text(const PlanGraph& plan);

/// Renumbers step ids consecutively from 1, rewriting references.
PlanGraph renumbered(const PlanGraph& plan);

std::string format_number(double value);

/// Name under which a value appears as an output column: the attribute name
/// for retrievals, otherwise `<op>_<labels of attribute arguments>`.
std::string value_label(const PlanGraph& plan, int step_id);

/// Labels of a collect step's items, made unique with `_2`, `_3` suffixes.
std::vector<std::string> collected_labels(const PlanGraph& plan, int collect_step);

/// Entity name under which a later subplan reads the columns collected by
/// the return step `return_step`.
std::string pseudo_entity_name(int return_step);
std::optional<int> parse_pseudo_entity(std::string_view name) noexcept;

struct AttributeBinding {
  std::string entity;
  std::string attribute;
  friend bool operator==(const AttributeBinding&, const AttributeBinding&) = default;
};

struct TypedValue {
  TypeSet types;
  int origin = 0;
  std::optional<std::string> entity_context;
  std::optional<AttributeBinding> attribute_ref;
  /// Attribute-valued (a retrieved column or a value computed from columns);
  /// such values also satisfy slots that ask for the Attribute type.
  bool attribute_like = false;

  TypeSet effective_types() const noexcept;
};

/// Per-step argument-to-slot assignment: slot index for each argument.
struct CheckedPlan {
  PlanGraph plan;
  std::map<int, TypedValue> types;
  std::map<int, std::vector<int>> arg_slots;
  std::vector<Diagnostic> warnings;

  const TypedValue& type_of(int step) const;
};

/// Types every step against the registry and labeling. Throws PlanError
/// (ErrorCode::Type) carrying every problem found.
CheckedPlan check_plan(const PlanGraph& plan, const OperationRegistry& registry, const DomainLabeling& labeling);

/// Type of a literal argument: strings are {String} (plus Datetime when the
/// text is an ISO date), numbers are {Arithmetic}.
TypeSet literal_types(const PlanArg& arg);

struct Subplan {
  int return_step = 0;
  std::vector<int> steps;  // ascending ids, ending with return_step
  std::vector<int> depends_on;  // earlier return steps read through pseudo-entities
};

/// One subplan per return step in id order, each holding the steps reachable
/// backwards from its return. Unreachable steps produce warnings.
std::vector<Subplan> split_subplans(const CheckedPlan& checked, std::vector<Diagnostic>* warnings = nullptr);

}  // namespace infospace
