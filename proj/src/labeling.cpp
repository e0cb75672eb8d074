// SPDX-License-Identifier: Apache-2.0

#include "infospace/labeling.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "infospace/database.hpp"
#include "infospace/error.hpp"

namespace infospace {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string at(const std::string& path, std::string_view field) {
  return path.empty() ? std::string(field) : path + "." + std::string(field);
}
std::string at(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

class Reader {
 public:
  Reader(const json& obj, std::string path, std::initializer_list<std::string_view> allowed) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        throw ConfigError(path_, "unknown field \"" + it.key() + "\"");
      }
    }
  }

  const json& field(std::string_view name) const {
    auto it = obj_.find(std::string(name));
    if (it == obj_.end()) throw ConfigError(path_, "missing field \"" + std::string(name) + "\"");
    return *it;
  }

  bool has(std::string_view name) const { return obj_.contains(std::string(name)); }

  std::string string(std::string_view name, bool allow_empty = false) const {
    const json& v = field(name);
    if (!v.is_string()) throw ConfigError(at(path_, name), "expected a string");
    auto s = v.get<std::string>();
    if (s.empty() && !allow_empty) throw ConfigError(at(path_, name), "must not be empty");
    return s;
  }

  std::optional<std::string> optional_string(std::string_view name) const {
    if (!has(name) || field(name).is_null()) return std::nullopt;
    return string(name);
  }

  const json& array(std::string_view name) const {
    const json& v = field(name);
    if (!v.is_array()) throw ConfigError(at(path_, name), "expected an array");
    return v;
  }

  std::vector<std::string> strings(std::string_view name) const {
    const json& arr = array(name);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) throw ConfigError(at(at(path_, name), i), "expected a string");
      out.push_back(arr[i].get<std::string>());
    }
    return out;
  }

  std::string path(std::string_view name) const { return at(path_, name); }

 private:
  const json& obj_;
  std::string path_;
};

Cardinality parse_relation(const std::string& text, const std::string& path) {
  if (text == "o2o") return Cardinality::OneToOne;
  if (text == "o2m") return Cardinality::OneToMany;
  if (text == "m2m") return Cardinality::ManyToMany;
  throw ConfigError(path, "relation must be one of o2o, o2m, m2m");
}

std::string relation_code(Cardinality c) {
  switch (c) {
    case Cardinality::OneToOne: return "o2o";
    case Cardinality::OneToMany: return "o2m";
    case Cardinality::ManyToMany: return "m2m";
  }
  return {};
}

// Walks a join chain from `start`; returns the table reached, or throws
// with the path of the first join that does not continue the chain.
std::string walk_chain(const DomainLabeling& l, const std::string& start, const std::vector<std::string>& chain,
                       const std::string& path) {
  std::string current = start;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const JoinDef* j = l.join(chain[i]);
    if (!j) throw ConfigError(at(path, i), "unknown join \"" + chain[i] + "\"");
    if (j->from_table == current) {
      current = j->to_table;
    } else if (j->to_table == current) {
      current = j->from_table;
    } else {
      throw ConfigError(at(path, i), "join \"" + chain[i] + "\" does not continue from table \"" + current + "\"");
    }
  }
  return current;
}

void validate(const DomainLabeling& l) {
  std::set<std::string> names;
  for (std::size_t t = 0; t < l.data_source.tables.size(); ++t) {
    const auto& table = l.data_source.tables[t];
    const std::string p = at("dataSource.tables", t);
    if (!names.insert(table.name).second) throw ConfigError(at(p, "name"), "duplicate table \"" + table.name + "\"");
    std::set<std::string> cols;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (!cols.insert(table.columns[c].name).second) {
        throw ConfigError(at(at(at(p, "columns"), c), "name"), "duplicate column \"" + table.columns[c].name + "\"");
      }
    }
    if (!table.column(table.primary_key)) {
      throw ConfigError(at(p, "primaryKey"), "primary key \"" + table.primary_key + "\" is not a column");
    }
  }

  names.clear();
  for (std::size_t j = 0; j < l.data_source.joins.size(); ++j) {
    const auto& join = l.data_source.joins[j];
    const std::string p = at("dataSource.joins", j);
    if (!names.insert(join.name).second) throw ConfigError(at(p, "name"), "duplicate join \"" + join.name + "\"");
    const TableSchema* from = l.table(join.from_table);
    const TableSchema* to = l.table(join.to_table);
    if (!from) throw ConfigError(at(p, "from"), "unknown table \"" + join.from_table + "\"");
    if (!to) throw ConfigError(at(p, "to"), "unknown table \"" + join.to_table + "\"");
    if (join.on.empty()) throw ConfigError(at(p, "on"), "join needs at least one column pair");
    for (std::size_t k = 0; k < join.on.size(); ++k) {
      if (!from->column(join.on[k].first)) {
        throw ConfigError(at(at(at(p, "on"), k), 0), "table \"" + from->name + "\" has no column \"" + join.on[k].first + "\"");
      }
      if (!to->column(join.on[k].second)) {
        throw ConfigError(at(at(at(p, "on"), k), 1), "table \"" + to->name + "\" has no column \"" + join.on[k].second + "\"");
      }
    }
  }

  names.clear();
  for (std::size_t e = 0; e < l.entities.size(); ++e) {
    const auto& entity = l.entities[e];
    const std::string p = at("dataAbstraction.entities", e);
    if (!names.insert(entity.name).second) throw ConfigError(at(p, "name"), "duplicate entity \"" + entity.name + "\"");
    if (!l.table(entity.primary_table)) {
      throw ConfigError(at(p, "primaryTable"), "unknown table \"" + entity.primary_table + "\"");
    }
    std::set<std::string> attrs;
    for (std::size_t a = 0; a < entity.attributes.size(); ++a) {
      const auto& attr = entity.attributes[a];
      const std::string ap = at(at(p, "attributes"), a);
      if (!attrs.insert(attr.name).second) throw ConfigError(at(ap, "name"), "duplicate attribute \"" + attr.name + "\"");
      if (attr.types.empty()) throw ConfigError(at(ap, "isa"), "at least one attribute type is required");
      if (!attr.types.only_base()) throw ConfigError(at(ap, "isa"), "labeling attributes may only use base attribute types");
      const TableSchema* table = l.table(attr.source.table);
      if (!table) throw ConfigError(at(at(ap, "source"), "table"), "unknown table \"" + attr.source.table + "\"");
      const ColumnSchema* col = table->column(attr.source.column);
      if (!col) {
        throw ConfigError(at(at(ap, "source"), "column"),
                          "table \"" + table->name + "\" has no column \"" + attr.source.column + "\"");
      }
      if (col->type != attr.storage) {
        throw ConfigError(at(ap, "type"), "declared type " + std::string(to_string(attr.storage)) + " does not match column type " +
                                              std::string(to_string(col->type)));
      }
      std::string reached = walk_chain(l, entity.primary_table, attr.via_joins, at(ap, "viaJoins"));
      if (reached != attr.source.table) {
        throw ConfigError(attr.via_joins.empty() ? at(at(ap, "source"), "table") : at(ap, "viaJoins"),
                          "source table \"" + attr.source.table + "\" is not reached from primary table \"" +
                              entity.primary_table + "\"");
      }
    }
    if (entity.identifier_attribute) {
      const AttributeDef* id = entity.attribute(*entity.identifier_attribute);
      if (!id) throw ConfigError(at(p, "identifierAttribute"), "unknown attribute \"" + *entity.identifier_attribute + "\"");
      if (!id->types.contains(AttributeType::Identifier)) {
        throw ConfigError(at(p, "identifierAttribute"), "identifier attribute must be typed Identifier");
      }
    }
  }

  names.clear();
  for (std::size_t r = 0; r < l.relationships.size(); ++r) {
    const auto& rel = l.relationships[r];
    const std::string p = at("dataAbstraction.relationships", r);
    if (!names.insert(rel.name).second) throw ConfigError(at(p, "name"), "duplicate relationship \"" + rel.name + "\"");
    const EntityDef* from = l.entity(rel.from_entity);
    const EntityDef* to = l.entity(rel.to_entity);
    if (!from) throw ConfigError(at(p, "from"), "unknown entity \"" + rel.from_entity + "\"");
    if (!to) throw ConfigError(at(p, "to"), "unknown entity \"" + rel.to_entity + "\"");
    std::size_t minimum = rel.cardinality == Cardinality::ManyToMany ? 2 : 1;
    for (std::size_t i = 0; i < rel.join_chain.size(); ++i) {
      if (!l.join(rel.join_chain[i])) {
        throw ConfigError(at(at(p, "joinChain"), i), "unknown join \"" + rel.join_chain[i] + "\"");
      }
    }
    if (rel.join_chain.size() < minimum) {
      throw ConfigError(at(p, "joinChain"), std::string(to_string(rel.cardinality)) + " relationships need at least " +
                                                std::to_string(minimum) + " join(s)");
    }
    std::string reached = walk_chain(l, from->primary_table, rel.join_chain, at(p, "joinChain"));
    if (reached != to->primary_table) {
      throw ConfigError(at(p, "joinChain"), "chain ends at \"" + reached + "\", not at \"" + to->primary_table + "\"");
    }
  }
}

}  // namespace

std::string_view to_string(StorageType t) noexcept {
  switch (t) {
    case StorageType::Integer: return "integer";
    case StorageType::Float: return "float";
    case StorageType::Text: return "text";
    case StorageType::Datetime: return "datetime";
    case StorageType::Boolean: return "boolean";
  }
  return "text";
}

std::optional<StorageType> parse_storage_type(std::string_view name) noexcept {
  for (auto t : {StorageType::Integer, StorageType::Float, StorageType::Text, StorageType::Datetime, StorageType::Boolean}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view to_string(Cardinality c) noexcept {
  switch (c) {
    case Cardinality::OneToOne: return "one_to_one";
    case Cardinality::OneToMany: return "one_to_many";
    case Cardinality::ManyToMany: return "many_to_many";
  }
  return {};
}

const ColumnSchema* TableSchema::column(std::string_view n) const noexcept {
  for (const auto& c : columns) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

std::string AttributeDef::display_name() const {
  if (!nicename.empty()) return nicename;
  std::string out = to_lower(name);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

const AttributeDef* EntityDef::attribute(std::string_view n) const noexcept {
  for (const auto& a : attributes) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

const AttributeDef* EntityDef::identifier() const noexcept {
  return identifier_attribute ? attribute(*identifier_attribute) : nullptr;
}

const TableSchema* DomainLabeling::table(std::string_view n) const noexcept {
  for (const auto& t : data_source.tables) {
    if (t.name == n) return &t;
  }
  return nullptr;
}

const JoinDef* DomainLabeling::join(std::string_view n) const noexcept {
  for (const auto& j : data_source.joins) {
    if (j.name == n) return &j;
  }
  return nullptr;
}

const EntityDef* DomainLabeling::entity(std::string_view n) const noexcept {
  for (const auto& e : entities) {
    if (e.name == n) return &e;
  }
  return nullptr;
}

const EntityDef& DomainLabeling::entity_or_throw(std::string_view n) const {
  if (const auto* e = entity(n)) return *e;
  throw NotFoundError("unknown entity \"" + std::string(n) + "\"");
}

DomainLabeling parse_labeling(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed labeling document: ") + e.what());
  }
  Reader top(doc, "", {"id", "name", "description", "dataSource", "dataAbstraction"});
  DomainLabeling l;
  l.id = top.string("id");
  l.name = top.string("name");
  l.description = top.has("description") ? top.string("description", true) : std::string();

  Reader ds(top.field("dataSource"), "dataSource", {"tables", "joins"});
  const json& tables = ds.array("tables");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    Reader t(tables[i], at("dataSource.tables", i), {"name", "primaryKey", "columns"});
    TableSchema table;
    table.name = t.string("name");
    table.primary_key = t.string("primaryKey");
    const json& cols = t.array("columns");
    for (std::size_t c = 0; c < cols.size(); ++c) {
      Reader col(cols[c], at(t.path("columns"), c), {"name", "type"});
      ColumnSchema cs;
      cs.name = col.string("name");
      auto type = parse_storage_type(col.string("type"));
      if (!type) throw ConfigError(col.path("type"), "unknown storage type \"" + col.string("type") + "\"");
      cs.type = *type;
      table.columns.push_back(std::move(cs));
    }
    l.data_source.tables.push_back(std::move(table));
  }
  if (ds.has("joins")) {
    const json& joins = ds.array("joins");
    for (std::size_t i = 0; i < joins.size(); ++i) {
      Reader j(joins[i], at("dataSource.joins", i), {"name", "from", "to", "on"});
      JoinDef join;
      join.name = j.string("name");
      join.from_table = j.string("from");
      join.to_table = j.string("to");
      const json& on = j.array("on");
      for (std::size_t k = 0; k < on.size(); ++k) {
        const json& pair = on[k];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          throw ConfigError(at(j.path("on"), k), "expected a [fromColumn, toColumn] pair");
        }
        join.on.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
      l.data_source.joins.push_back(std::move(join));
    }
  }

  Reader da(top.field("dataAbstraction"), "dataAbstraction", {"entities", "relationships"});
  const json& entities = da.array("entities");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    Reader e(entities[i], at("dataAbstraction.entities", i),
             {"name", "nicename", "primaryTable", "identifierAttribute", "attributes"});
    EntityDef entity;
    entity.name = e.string("name");
    entity.nicename = e.has("nicename") ? e.string("nicename") : entity.name;
    entity.primary_table = e.string("primaryTable");
    entity.identifier_attribute = e.optional_string("identifierAttribute");
    const json& attrs = e.array("attributes");
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      Reader r(attrs[a], at(e.path("attributes"), a), {"name", "nicename", "units", "type", "isa", "source", "viaJoins"});
      AttributeDef attr;
      attr.name = r.string("name");
      attr.nicename = r.has("nicename") ? r.string("nicename") : std::string();
      attr.units = r.optional_string("units");
      auto storage = parse_storage_type(r.string("type"));
      if (!storage) throw ConfigError(r.path("type"), "unknown storage type \"" + r.string("type") + "\"");
      attr.storage = *storage;
      auto isa = r.strings("isa");
      for (std::size_t k = 0; k < isa.size(); ++k) {
        auto t = parse_attribute_type(isa[k]);
        if (!t) throw ConfigError(at(r.path("isa"), k), "unknown attribute type \"" + isa[k] + "\"");
        if (!is_base(*t)) throw ConfigError(at(r.path("isa"), k), "\"" + isa[k] + "\" is reserved for derived attributes");
        attr.types.insert(*t);
      }
      Reader src(r.field("source"), r.path("source"), {"table", "column"});
      attr.source = {src.string("table"), src.string("column")};
      if (r.has("viaJoins")) attr.via_joins = r.strings("viaJoins");
      entity.attributes.push_back(std::move(attr));
    }
    l.entities.push_back(std::move(entity));
  }
  if (da.has("relationships")) {
    const json& rels = da.array("relationships");
    for (std::size_t i = 0; i < rels.size(); ++i) {
      Reader r(rels[i], at("dataAbstraction.relationships", i), {"name", "from", "to", "relation", "joinChain"});
      RelationshipDef rel;
      rel.name = r.string("name");
      rel.from_entity = r.string("from");
      rel.to_entity = r.string("to");
      rel.cardinality = parse_relation(r.string("relation"), r.path("relation"));
      rel.join_chain = r.strings("joinChain");
      l.relationships.push_back(std::move(rel));
    }
  }
  validate(l);
  return l;
}

DomainLabeling load_labeling_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read labeling file \"" + path + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_labeling(ss.str());
}

std::string serialize_labeling(const DomainLabeling& l) {
  ordered_json doc;
  doc["id"] = l.id;
  doc["name"] = l.name;
  doc["description"] = l.description;
  ordered_json tables = ordered_json::array();
  for (const auto& t : l.data_source.tables) {
    ordered_json cols = ordered_json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
    tables.push_back({{"name", t.name}, {"primaryKey", t.primary_key}, {"columns", cols}});
  }
  ordered_json joins = ordered_json::array();
  for (const auto& j : l.data_source.joins) {
    ordered_json on = ordered_json::array();
    for (const auto& [a, b] : j.on) on.push_back({a, b});
    joins.push_back({{"name", j.name}, {"from", j.from_table}, {"to", j.to_table}, {"on", on}});
  }
  doc["dataSource"] = {{"tables", tables}, {"joins", joins}};

  ordered_json entities = ordered_json::array();
  for (const auto& e : l.entities) {
    ordered_json entity;
    entity["name"] = e.name;
    entity["nicename"] = e.nicename;
    entity["primaryTable"] = e.primary_table;
    if (e.identifier_attribute) entity["identifierAttribute"] = *e.identifier_attribute;
    ordered_json attrs = ordered_json::array();
    for (const auto& a : e.attributes) {
      ordered_json attr;
      attr["name"] = a.name;
      if (!a.nicename.empty()) attr["nicename"] = a.nicename;
      if (a.units) attr["units"] = *a.units;
      attr["type"] = std::string(to_string(a.storage));
      ordered_json isa = ordered_json::array();
      for (auto t : a.types.members()) isa.push_back(std::string(to_string(t)));
      attr["isa"] = isa;
      attr["source"] = {{"table", a.source.table}, {"column", a.source.column}};
      if (!a.via_joins.empty()) attr["viaJoins"] = a.via_joins;
      attrs.push_back(std::move(attr));
    }
    entity["attributes"] = attrs;
    entities.push_back(std::move(entity));
  }
  ordered_json rels = ordered_json::array();
  for (const auto& r : l.relationships) {
    rels.push_back({{"name", r.name}, {"from", r.from_entity}, {"to", r.to_entity},
                    {"relation", relation_code(r.cardinality)}, {"joinChain", r.join_chain}});
  }
  doc["dataAbstraction"] = {{"entities", entities}, {"relationships", rels}};
  return doc.dump(2) + "\n";
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  os << (ok ? "ok" : "mismatch") << "\n";
  for (const auto& d : discrepancies) {
    os << "  " << d.table;
    if (!d.column.empty()) os << "." << d.column;
    os << ": " << d.message << "\n";
  }
  for (const auto& w : warnings) os << "  warning: " << w << "\n";
  return os.str();
}

namespace {

// Maps a declared column type to a storage type by the engine's affinity rules.
std::optional<StorageType> storage_of_declared(std::string declared) {
  declared = to_lower(declared);
  auto has = [&](std::string_view s) { return declared.find(s) != std::string::npos; };
  if (has("bool")) return StorageType::Boolean;
  if (has("date") || has("time")) return StorageType::Datetime;
  if (has("int")) return StorageType::Integer;
  if (has("char") || has("clob") || has("text")) return StorageType::Text;
  if (has("real") || has("floa") || has("doub") || has("num") || has("dec")) return StorageType::Float;
  return std::nullopt;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

ValidationReport validate_against_database(const DomainLabeling& labeling, const Database& db) {
  ValidationReport report;
  if (labeling.entities.empty()) report.warnings.push_back("no entities");
  for (const auto& table : labeling.data_source.tables) {
    auto live = db.table_columns(table.name);
    if (!live) {
      report.discrepancies.push_back({table.name, "", "table does not exist in the database"});
      continue;
    }
    for (const auto& col : table.columns) {
      auto it = std::find_if(live->begin(), live->end(), [&](const LiveColumn& c) { return to_lower(c.name) == to_lower(col.name); });
      if (it == live->end()) {
        std::string message = "column \"" + col.name + "\" does not exist";
        const LiveColumn* closest = nullptr;
        std::size_t best = 3;
        for (const auto& c : *live) {
          std::size_t d = edit_distance(to_lower(c.name), to_lower(col.name));
          if (d < best) {
            best = d;
            closest = &c;
          }
        }
        if (closest) message += "; the table has \"" + closest->name + "\"";
        report.discrepancies.push_back({table.name, col.name, message});
        continue;
      }
      auto actual = storage_of_declared(it->declared_type);
      bool compatible = actual == col.type || (col.type == StorageType::Float && actual == StorageType::Integer) ||
                        (col.type == StorageType::Boolean && actual == StorageType::Integer) ||
                        (col.type == StorageType::Datetime && actual == StorageType::Text);
      if (!compatible) {
        report.discrepancies.push_back({table.name, col.name,
                                        "declared " + std::string(to_string(col.type)) + " but the database column is \"" +
                                            it->declared_type + "\""});
      }
    }
  }
  report.ok = report.discrepancies.empty();
  return report;
}

std::vector<const AttributeDef*> attributes_of_type(const DomainLabeling& labeling, std::string_view entity,
                                                    TypeSet wanted) {
  if (wanted.empty()) throw Error(ErrorCode::InvalidArgument, "empty type set");
  const EntityDef& e = labeling.entity_or_throw(entity);
  std::vector<const AttributeDef*> out;
  for (const auto& a : e.attributes) {
    if (a.types.intersects(wanted)) out.push_back(&a);
  }
  return out;
}

std::vector<const RelationshipDef*> relationship_path(const DomainLabeling& labeling, std::string_view a,
                                                      std::string_view b) {
  labeling.entity_or_throw(a);
  labeling.entity_or_throw(b);
  if (a == b) return {};
  if (b < a) {
    auto path = relationship_path(labeling, b, a);
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Distances to `b`, then a greedy walk from `a` that always takes the
  // smallest-named relationship staying on a shortest path.
  std::map<std::string, int> dist;
  std::deque<std::string> queue{std::string(b)};
  dist[std::string(b)] = 0;
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (const auto& r : labeling.relationships) {
      std::string next;
      if (r.from_entity == cur) next = r.to_entity;
      else if (r.to_entity == cur) next = r.from_entity;
      else continue;
      if (!dist.count(next)) {
        dist[next] = dist[cur] + 1;
        queue.push_back(next);
      }
    }
  }
  if (!dist.count(std::string(a))) {
    throw Error(ErrorCode::NotFound, "entities not connected: \"" + std::string(a) + "\" and \"" + std::string(b) + "\"");
  }
  std::vector<const RelationshipDef*> path;
  std::string cur(a);
  while (cur != b) {
    const RelationshipDef* best = nullptr;
    std::string best_next;
    for (const auto& r : labeling.relationships) {
      std::string next;
      if (r.from_entity == cur) next = r.to_entity;
      else if (r.to_entity == cur) next = r.from_entity;
      else continue;
      auto it = dist.find(next);
      if (it == dist.end() || it->second != dist[cur] - 1) continue;
      if (!best || r.name < best->name) {
        best = &r;
        best_next = next;
      }
    }
    path.push_back(best);
    cur = best_next;
  }
  return path;
}

}  // namespace infospace
