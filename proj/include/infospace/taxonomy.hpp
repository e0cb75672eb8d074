// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace infospace {

/// Semantic type of a value. The first six kinds may label columns of a
/// domain labeling; the remaining kinds only describe values produced by
/// operations.
enum class AttributeType : std::uint8_t {
  Arithmetic,
  Categorical,
  Datetime,
  Document,
  Identifier,
  Metric,
  Entity,
  Attribute,
  AttributeCollection,
  Grouping,
  Filter,
  Sort,
  Limit,
  String,
};

inline constexpr int kBaseTypeCount = 6;
inline constexpr int kDerivedTypeCount = 8;

constexpr bool is_base(AttributeType t) noexcept {
  return static_cast<int>(t) < kBaseTypeCount;
}

std::string_view to_string(AttributeType t) noexcept;
std::optional<AttributeType> parse_attribute_type(std::string_view name) noexcept;

/// Small bit set over AttributeType, ordered by enum value when iterated.
class TypeSet {
 public:
  constexpr TypeSet() = default;
  constexpr TypeSet(std::initializer_list<AttributeType> types) {
    for (auto t : types) insert(t);
  }

  constexpr void insert(AttributeType t) noexcept { bits_ |= bit(t); }
  constexpr bool contains(AttributeType t) const noexcept { return (bits_ & bit(t)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool intersects(TypeSet other) const noexcept { return (bits_ & other.bits_) != 0; }
  constexpr bool only_base() const noexcept { return (bits_ >> kBaseTypeCount) == 0; }
  constexpr TypeSet united(TypeSet other) const noexcept { return TypeSet(bits_ | other.bits_); }
  constexpr std::uint16_t bits() const noexcept { return bits_; }

  std::vector<AttributeType> members() const;
  std::string to_string() const;

  friend constexpr bool operator==(TypeSet, TypeSet) = default;

 private:
  constexpr explicit TypeSet(std::uint16_t bits) : bits_(bits) {}
  static constexpr std::uint16_t bit(AttributeType t) noexcept {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(t));
  }
  std::uint16_t bits_ = 0;
};

/// An argument is admissible for a slot when it carries at least one of the
/// slot's types.
constexpr bool types_accept(TypeSet slot_types, TypeSet value_types) noexcept {
  return slot_types.intersects(value_types);
}

struct Arity {
  enum class Form : std::uint8_t { Exactly, AtLeast, AtMost };

  Form form = Form::Exactly;
  int n = 1;

  bool optional() const noexcept { return form == Form::AtMost; }
  int min_args() const noexcept { return form == Form::AtMost ? 0 : n; }
  /// Upper bound on arguments, or nullopt when unbounded.
  std::optional<int> max_args() const noexcept {
    if (form == Form::AtLeast) return std::nullopt;
    return n;
  }

  /// Accepts exactly the surface forms "1", "2", ">=1", ">=2", "<=1".
  static Arity parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const Arity&, const Arity&) = default;
};

struct Slot {
  Arity arity;
  TypeSet types;

  friend bool operator==(const Slot&, const Slot&) = default;
};

enum class OperationCategory : std::uint8_t {
  Aggregation,
  Boolean,
  Arithmetic,
  DataOperation,
  Retrieval,
};

std::string_view to_string(OperationCategory c) noexcept;
std::optional<OperationCategory> parse_category(std::string_view name) noexcept;

struct OperationSignature {
  std::string name;
  OperationCategory category = OperationCategory::DataOperation;
  std::vector<Slot> inputs;
  std::vector<Slot> outputs;
  std::string language_template;

  /// Number of mandatory input slots (Exactly/AtLeast).
  int mandatory_slot_count() const noexcept;
  TypeSet output_types() const noexcept;

  friend bool operator==(const OperationSignature&, const OperationSignature&) = default;
};

/// Immutable map from canonical (lowercase) operation name to signature.
class OperationRegistry {
 public:
  /// The built-in operations.
  static const OperationRegistry& builtin();

  /// Built-ins merged with `documents`; each document is one operation
  /// definition (`name`, `input_args`, `output_args`, `language_template`,
  /// optional `category`) or an array of them. A document whose name matches
  /// a built-in replaces it.
  static OperationRegistry load(std::span<const std::string> documents);

  /// Throws NotFoundError naming the closest known operation.
  const OperationSignature& signature_of(std::string_view name) const;
  const OperationSignature* find(std::string_view name) const noexcept;

  const std::map<std::string, OperationSignature>& operations() const noexcept { return ops_; }
  std::size_t size() const noexcept { return ops_.size(); }

  friend bool operator==(const OperationRegistry&, const OperationRegistry&) = default;

 private:
  std::map<std::string, OperationSignature> ops_;
};

/// Parses a single operation-definition object (JSON text). Exposed for
/// tests and tooling; `load` is the normal entry point.
OperationSignature parse_operation_definition(std::string_view json_text);

/// Substitutes `{i}` placeholders with `args[i]`; missing arguments render empty.
std::string fill_language_template(std::string_view tpl, const std::vector<std::string>& args);

/// Lowercase copy, used for operation names.
std::string to_lower(std::string_view s);

}  // namespace infospace
