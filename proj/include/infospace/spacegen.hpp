// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "infospace/database.hpp"
#include "infospace/labeling.hpp"
#include "infospace/plan.hpp"
#include "infospace/taxonomy.hpp"

namespace infospace {

/// Fills `{name}` with an entity name.
struct EntitySlot {
  std::string name;
  /// When set, only this entity or entities reachable from it through relationships.
  std::optional<std::string> related_to;
  bool require_identifier = false;
  /// An absent optional entity removes every step that mentions it or its
  /// dependent slots.
  bool optional = false;
};

enum class AttributeRole { Any, IdentifierOnly, NonIdentifier };

/// Fills `{name}` with an attribute of the entity bound to `entity`.
struct AttributeSlot {
  std::string name;
  std::string entity;
  TypeSet types;
  AttributeRole role = AttributeRole::Any;
  bool text_only = false;
  /// Must differ from the attribute bound to this slot.
  std::optional<std::string> distinct_from;
  /// Must come after the attribute bound to this slot (unordered pairs).
  std::optional<std::string> after;
};

/// Fills `{name}` with an operation of `category` whose first input slot
/// takes `value_args` arguments and whose other inputs are optional.
struct OperationSlot {
  std::string name;
  OperationCategory category = OperationCategory::Aggregation;
  int value_args = 1;
  /// Restricts candidates to these names when non-empty.
  std::vector<std::string> allowed;
};

enum class InstanceMode { Exact, Token };

/// Fills `{name}` with a value harvested from the attribute bound to
/// `attribute`: whole distinct values, or lowercase word tokens of them.
struct InstanceSlot {
  std::string name;
  std::string attribute;
  InstanceMode mode = InstanceMode::Exact;
  std::optional<std::string> distinct_from;
};

using SlotSpec = std::variant<EntitySlot, AttributeSlot, OperationSlot, InstanceSlot>;

const std::string& slot_name(const SlotSpec& slot);

/// Plan text with `{slot}` placeholders. `"{@n}"` inside a string literal is
/// replaced by the output label of step n once the slots are filled.
struct PlanTemplate {
  std::string id;
  std::string description;
  std::string skeleton;
  std::vector<SlotSpec> slots;
};

/// T1..T7 plus T8 (aggregate under two instance filters).
const std::vector<PlanTemplate>& builtin_templates();

/// Throws ConfigError when a placeholder has no slot, a slot is unused, or a
/// slot refers to an undeclared or later slot.
void validate_template(const PlanTemplate& tpl);

struct GenerationCaps {
  std::size_t max_per_template = 50000;
  std::size_t max_instances = 200;
};

struct HarvestResult {
  std::vector<Scalar> values;
  bool truncated = false;
};

/// Distinct non-null values of an Identifier or Categorical attribute,
/// ascending, at most `cap`.
HarvestResult harvest_instances(const Database& db, const DomainLabeling& labeling, const AttributeBinding& attribute,
                                std::size_t cap);

/// Distinct lowercase alphabetic words of at least three letters, sorted.
std::vector<std::string> word_tokens(const std::vector<Scalar>& values);

struct GeneratedQuestion {
  std::string question_id;
  std::string template_id;
  std::string question_text;
  PlanGraph plan;  // canonical numbering
};

/// FNV-1a 64-bit of `domain_id + "\n" + canonical_plan_text`, 16 hex digits.
std::string question_id(const std::string& domain_id, const std::string& canonical_plan_text);

struct TemplateReport {
  std::string template_id;
  std::size_t emitted = 0;
  std::size_t rejected = 0;    // filled plans that failed checking or compilation
  std::size_t duplicates = 0;  // already emitted by an earlier template
  bool capped = false;
  bool instances_truncated = false;
};

struct GenerationReport {
  std::vector<TemplateReport> templates;
  std::size_t total() const;
};

/// Calls `sink` for every filled plan that type-checks and compiles, in a
/// deterministic order. `sink` returning false stops the enumeration.
void enumerate_plans(const DomainLabeling& labeling, const OperationRegistry& registry,
                     const std::vector<PlanTemplate>& templates, const Database& db, const GenerationCaps& caps,
                     const std::function<bool(GeneratedQuestion&&)>& sink, GenerationReport* report = nullptr);

std::vector<GeneratedQuestion> enumerate_plans(const DomainLabeling& labeling, const OperationRegistry& registry,
                                               const std::vector<PlanTemplate>& templates, const Database& db,
                                               const GenerationCaps& caps = {}, GenerationReport* report = nullptr);

}  // namespace infospace
