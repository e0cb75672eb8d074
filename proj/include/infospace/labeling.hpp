// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "infospace/taxonomy.hpp"

namespace infospace {

class Database;

enum class StorageType { Integer, Float, Text, Datetime, Boolean };

std::string_view to_string(StorageType t) noexcept;
std::optional<StorageType> parse_storage_type(std::string_view name) noexcept;

struct ColumnSchema {
  std::string name;
  StorageType type = StorageType::Text;

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

struct TableSchema {
  std::string name;
  std::string primary_key;
  std::vector<ColumnSchema> columns;

  const ColumnSchema* column(std::string_view name) const noexcept;

  friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

struct JoinDef {
  std::string name;
  std::string from_table;
  std::string to_table;
  std::vector<std::pair<std::string, std::string>> on;

  friend bool operator==(const JoinDef&, const JoinDef&) = default;
};

struct ColumnRef {
  std::string table;
  std::string column;

  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

struct AttributeDef {
  std::string name;
  std::string nicename;
  std::optional<std::string> units;
  StorageType storage = StorageType::Text;
  TypeSet types;
  ColumnRef source;
  std::vector<std::string> via_joins;

  /// The nicename, or the column-style name with underscores as spaces.
  std::string display_name() const;

  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

struct EntityDef {
  std::string name;
  std::string nicename;
  std::string primary_table;
  std::vector<AttributeDef> attributes;
  std::optional<std::string> identifier_attribute;

  const AttributeDef* attribute(std::string_view name) const noexcept;
  const AttributeDef* identifier() const noexcept;

  friend bool operator==(const EntityDef&, const EntityDef&) = default;
};

enum class Cardinality { OneToOne, OneToMany, ManyToMany };

std::string_view to_string(Cardinality c) noexcept;

struct RelationshipDef {
  std::string name;
  std::string from_entity;
  std::string to_entity;
  Cardinality cardinality = Cardinality::OneToMany;
  std::vector<std::string> join_chain;

  friend bool operator==(const RelationshipDef&, const RelationshipDef&) = default;
};

struct DataSource {
  std::vector<TableSchema> tables;
  std::vector<JoinDef> joins;

  friend bool operator==(const DataSource&, const DataSource&) = default;
};

struct DomainLabeling {
  std::string id;
  std::string name;
  std::string description;
  DataSource data_source;
  std::vector<EntityDef> entities;
  std::vector<RelationshipDef> relationships;

  const TableSchema* table(std::string_view name) const noexcept;
  const JoinDef* join(std::string_view name) const noexcept;
  const EntityDef* entity(std::string_view name) const noexcept;
  /// Throws NotFoundError.
  const EntityDef& entity_or_throw(std::string_view name) const;

  friend bool operator==(const DomainLabeling&, const DomainLabeling&) = default;
};

/// Parses and validates a labeling document. Structural and referential
/// problems throw ConfigError with the path of the offending element.
DomainLabeling parse_labeling(std::string_view document);
DomainLabeling load_labeling_file(const std::string& path);

/// Canonical document text; `parse_labeling(serialize_labeling(l)) == l`.
std::string serialize_labeling(const DomainLabeling& labeling);

struct ValidationIssue {
  std::string table;
  std::string column;  // empty for table-level issues
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> discrepancies;
  std::vector<std::string> warnings;

  std::string to_string() const;
};

/// Compares the labeling's data source against the live schema.
ValidationReport validate_against_database(const DomainLabeling& labeling, const Database& db);

/// Attributes of `entity` carrying at least one of `wanted`, in declaration order.
std::vector<const AttributeDef*> attributes_of_type(const DomainLabeling& labeling, std::string_view entity,
                                                    TypeSet wanted);

/// Shortest chain of relationships between two entities over the undirected
/// relationship graph. Ties go to the lexicographically smallest sequence of
/// relationship names, computed from the lexicographically smaller endpoint
/// so that path(b, a) is path(a, b) reversed.
std::vector<const RelationshipDef*> relationship_path(const DomainLabeling& labeling, std::string_view a,
                                                      std::string_view b);

}  // namespace infospace
