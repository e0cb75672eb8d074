// SPDX-License-Identifier: Apache-2.0

#include "infospace/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include <json.hpp>

#include "infospace/error.hpp"

namespace infospace {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kBaseTypeCount + kDerivedTypeCount> kTypeNames = {
    "Arithmetic", "Categorical", "Datetime", "Document", "Identifier", "Metric",
    "Entity", "Attribute", "AttributeCollection", "Grouping", "Filter", "Sort", "Limit", "String",
};

constexpr std::array<std::string_view, 5> kCategoryNames = {
    "Aggregation", "Boolean", "Arithmetic", "DataOperation", "Retrieval",
};

// Built-in operation table. Documents use the same structure a user supplies,
// plus the category. `contains` takes (attribute, string pattern), `limit`
// takes a numeric count, and `lessthan_eq` mirrors `greaterthan_eq`.
constexpr const char* kBuiltinOperations = R"json([
  {"name": "average", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}],
   "language_template": "average {0}"},
  {"name": "correlation", "category": "Aggregation",
   "input_args": [{"arity": "2", "types": ["Arithmetic", "Metric", "Datetime"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "correlation between {0} and {1}"},
  {"name": "count", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}],
   "language_template": "count of {0}"},
  {"name": "count_unique", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}],
   "language_template": "count of unique {0}"},
  {"name": "get_one", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "one {0}"},
  {"name": "max", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "max {0}"},
  {"name": "median", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "median {0}"},
  {"name": "min", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "min {0}"},
  {"name": "standard_deviation", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}],
   "language_template": "standard deviation of {0}"},
  {"name": "string_aggregation", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "list of {0}"},
  {"name": "sum", "category": "Aggregation",
   "input_args": [{"arity": "1", "types": ["Arithmetic"]}, {"arity": "<=1", "types": ["Grouping"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}],
   "language_template": "sum of {0}"},

  {"name": "and", "category": "Boolean",
   "input_args": [{"arity": ">=1", "types": ["Filter"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} and {1}"},
  {"name": "contains", "category": "Boolean",
   "input_args": [{"arity": "1", "types": ["Attribute"]}, {"arity": "1", "types": ["String"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} containing \"{1}\""},
  {"name": "exact", "category": "Boolean",
   "input_args": [{"arity": "2", "types": ["Arithmetic", "Metric", "Categorical", "String", "Datetime", "Identifier"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} of {1}"},
  {"name": "greaterthan", "category": "Boolean",
   "input_args": [{"arity": "2", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} greater than {1}"},
  {"name": "greaterthan_eq", "category": "Boolean",
   "input_args": [{"arity": "2", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} greater than or equal to {1}"},
  {"name": "lessthan", "category": "Boolean",
   "input_args": [{"arity": "2", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} less than {1}"},
  {"name": "lessthan_eq", "category": "Boolean",
   "input_args": [{"arity": "2", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} less than or equal to {1}"},
  {"name": "not", "category": "Boolean",
   "input_args": [{"arity": "1", "types": ["Filter"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "not {0}"},
  {"name": "or", "category": "Boolean",
   "input_args": [{"arity": ">=1", "types": ["Filter"]}],
   "output_args": [{"arity": "1", "types": ["Filter"]}],
   "language_template": "{0} or {1}"},

  {"name": "add", "category": "Arithmetic",
   "input_args": [{"arity": ">=2", "types": ["Arithmetic", "Metric"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "{0} plus {1}"},
  {"name": "divide", "category": "Arithmetic",
   "input_args": [{"arity": ">=2", "types": ["Arithmetic", "Metric"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "{0} divided by {1}"},
  {"name": "multiply", "category": "Arithmetic",
   "input_args": [{"arity": ">=2", "types": ["Arithmetic", "Metric"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "{0} multiplied by {1}"},
  {"name": "percent_change", "category": "Arithmetic",
   "input_args": [{"arity": "2", "types": ["Arithmetic", "Metric"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric"]}],
   "language_template": "percent change from {0} to {1}"},
  {"name": "square_root", "category": "Arithmetic",
   "input_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "square root of {0}"},
  {"name": "subtract", "category": "Arithmetic",
   "input_args": [{"arity": ">=2", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "output_args": [{"arity": "1", "types": ["Arithmetic", "Metric", "Datetime"]}],
   "language_template": "{0} minus {1}"},

  {"name": "collect", "category": "DataOperation",
   "input_args": [{"arity": ">=1", "types": ["Attribute"]}],
   "output_args": [{"arity": "1", "types": ["AttributeCollection"]}],
   "language_template": "{0}"},
  {"name": "groupby", "category": "DataOperation",
   "input_args": [{"arity": ">=1", "types": ["Categorical", "Datetime"]}],
   "output_args": [{"arity": "1", "types": ["Grouping"]}],
   "language_template": "grouped by {0}"},
  {"name": "limit", "category": "DataOperation",
   "input_args": [{"arity": "1", "types": ["Arithmetic"]}],
   "output_args": [{"arity": "1", "types": ["Limit"]}],
   "language_template": "limited to the top results"},
  {"name": "return", "category": "DataOperation",
   "input_args": [{"arity": "1", "types": ["AttributeCollection"]}, {"arity": "<=1", "types": ["Filter"]},
                  {"arity": "<=1", "types": ["Sort"]}, {"arity": "<=1", "types": ["Limit"]}],
   "output_args": [{"arity": "1", "types": ["Entity"]}],
   "language_template": "{0}"},
  {"name": "sort", "category": "DataOperation",
   "input_args": [{"arity": ">=1", "types": ["Attribute"]}, {"arity": "1", "types": ["String"]}],
   "output_args": [{"arity": "1", "types": ["Sort"]}],
   "language_template": "{0} sorted in {1}"},

  {"name": "retrieve_attribute", "category": "Retrieval",
   "input_args": [{"arity": "1", "types": ["Entity"]}, {"arity": "1", "types": ["String"]}],
   "output_args": [{"arity": "1", "types": ["Attribute"]}],
   "language_template": "{1} of {0}"},
  {"name": "retrieve_entity", "category": "Retrieval",
   "input_args": [{"arity": "1", "types": ["String"]}],
   "output_args": [{"arity": "1", "types": ["Entity"]}],
   "language_template": "{0}"}
])json";

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string at(const std::string& path, std::string_view field) {
  return path.empty() ? std::string(field) : path + "." + std::string(field);
}

std::string at(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const json& require(const json& obj, std::string_view field, const std::string& path) {
  auto it = obj.find(std::string(field));
  if (it == obj.end()) throw ConfigError(path, "missing field \"" + std::string(field) + "\"");
  return *it;
}

std::vector<Slot> parse_slots(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path, "expected an array of argument specs");
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& spec = arr[i];
    const std::string p = at(path, i);
    if (!spec.is_object()) throw ConfigError(p, "expected an object");
    for (auto it = spec.begin(); it != spec.end(); ++it) {
      if (it.key() != "arity" && it.key() != "types") throw ConfigError(p, "unknown field \"" + it.key() + "\"");
    }
    const auto& arity = require(spec, "arity", p);
    if (!arity.is_string()) throw ConfigError(at(p, "arity"), "arity must be a string");
    Slot slot;
    try {
      slot.arity = Arity::parse(arity.get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(at(p, "arity"), e.what());
    }
    const auto& types = require(spec, "types", p);
    if (!types.is_array() || types.empty()) throw ConfigError(at(p, "types"), "types must be a non-empty array");
    for (std::size_t k = 0; k < types.size(); ++k) {
      if (!types[k].is_string()) throw ConfigError(at(at(p, "types"), k), "type must be a string");
      auto t = parse_attribute_type(types[k].get<std::string>());
      if (!t) throw ConfigError(at(at(p, "types"), k), "unknown attribute type \"" + types[k].get<std::string>() + "\"");
      slot.types.insert(*t);
    }
    slots.push_back(slot);
  }
  return slots;
}

// Placeholders {k} must be dense from 0 and addressable by some argument.
void check_template(const OperationSignature& sig, const std::string& path) {
  std::set<int> used;
  const std::string& tpl = sig.language_template;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl[i] != '{') continue;
    std::size_t close = tpl.find('}', i);
    if (close == std::string::npos) throw ConfigError(path, "unterminated placeholder in language template");
    std::string_view digits(tpl.data() + i + 1, close - i - 1);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ConfigError(path, "malformed placeholder \"{" + std::string(digits) + "}\"");
    }
    used.insert(std::stoi(std::string(digits)));
    i = close;
  }
  int max_args = 0;
  bool bounded = true;
  for (const auto& slot : sig.inputs) {
    auto m = slot.arity.max_args();
    if (!m) {
      bounded = false;
      break;
    }
    max_args += *m;
  }
  int expected = 0;
  for (int idx : used) {
    if (idx != expected) throw ConfigError(path, "placeholder indices must be dense from {0}; missing {" + std::to_string(expected) + "}");
    ++expected;
  }
  if (!used.empty() && bounded && *used.rbegin() >= max_args) {
    throw ConfigError(path, "placeholder index {" + std::to_string(*used.rbegin()) + "} out of range for " +
                                std::to_string(max_args) + " argument(s)");
  }
}

OperationSignature parse_definition(const json& doc, const std::string& path,
                                    const std::map<std::string, OperationSignature>* fallback) {
  if (!doc.is_object()) throw ConfigError(path, "operation definition must be an object");
  static const std::set<std::string> known = {"name", "category", "input_args", "output_args", "language_template"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError(path, "unknown field \"" + it.key() + "\"");
  }
  OperationSignature sig;
  const auto& name = require(doc, "name", path);
  if (!name.is_string() || name.get<std::string>().empty()) throw ConfigError(at(path, "name"), "name must be a non-empty string");
  sig.name = to_lower(name.get<std::string>());
  for (char c : sig.name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) throw ConfigError(at(path, "name"), "name must be an identifier");
  }
  if (auto it = doc.find("category"); it != doc.end()) {
    auto cat = it->is_string() ? parse_category(it->get<std::string>()) : std::nullopt;
    if (!cat) throw ConfigError(at(path, "category"), "unknown operation category");
    sig.category = *cat;
  } else if (fallback && fallback->count(sig.name)) {
    sig.category = fallback->at(sig.name).category;
  } else {
    throw ConfigError(at(path, "category"), "category is required for operation \"" + sig.name + "\"");
  }
  sig.inputs = parse_slots(require(doc, "input_args", path), at(path, "input_args"));
  sig.outputs = parse_slots(require(doc, "output_args", path), at(path, "output_args"));
  if (sig.outputs.empty()) throw ConfigError(at(path, "output_args"), "at least one output is required");
  const auto& tpl = require(doc, "language_template", path);
  if (!tpl.is_string()) throw ConfigError(at(path, "language_template"), "language_template must be a string");
  sig.language_template = tpl.get<std::string>();
  check_template(sig, at(path, "language_template"));
  return sig;
}

json parse_json(std::string_view text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("malformed document: ") + e.what());
  }
}

void add_documents(std::map<std::string, OperationSignature>& ops, const json& doc, const std::string& path,
                   const std::map<std::string, OperationSignature>* fallback, std::set<std::string>& seen) {
  auto add_one = [&](const json& d, const std::string& p) {
    auto sig = parse_definition(d, p, fallback);
    if (!seen.insert(sig.name).second) throw ConfigError(at(p, "name"), "duplicate operation \"" + sig.name + "\"");
    ops[sig.name] = std::move(sig);
  };
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) add_one(doc[i], at(path, i));
  } else {
    add_one(doc, path);
  }
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view to_string(AttributeType t) noexcept { return kTypeNames[static_cast<std::size_t>(t)]; }

std::optional<AttributeType> parse_attribute_type(std::string_view name) noexcept {
  // "Group" is the spelling used in some prose for the grouping type.
  if (name == "Group") return AttributeType::Grouping;
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<AttributeType>(i);
  }
  return std::nullopt;
}

std::vector<AttributeType> TypeSet::members() const {
  std::vector<AttributeType> out;
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    auto t = static_cast<AttributeType>(i);
    if (contains(t)) out.push_back(t);
  }
  return out;
}

std::string TypeSet::to_string() const {
  std::string out = "{";
  bool first = true;
  for (auto t : members()) {
    if (!first) out += ", ";
    out += infospace::to_string(t);
    first = false;
  }
  return out + "}";
}

Arity Arity::parse(std::string_view text) {
  if (text == "1") return {Form::Exactly, 1};
  if (text == "2") return {Form::Exactly, 2};
  if (text == ">=1") return {Form::AtLeast, 1};
  if (text == ">=2") return {Form::AtLeast, 2};
  if (text == "<=1") return {Form::AtMost, 1};
  throw Error(ErrorCode::Config, "malformed arity \"" + std::string(text) + "\"");
}

std::string Arity::to_string() const {
  switch (form) {
    case Form::Exactly: return std::to_string(n);
    case Form::AtLeast: return ">=" + std::to_string(n);
    case Form::AtMost: return "<=" + std::to_string(n);
  }
  return {};
}

std::string_view to_string(OperationCategory c) noexcept { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<OperationCategory> parse_category(std::string_view name) noexcept {
  if (name == "Data Operation") return OperationCategory::DataOperation;
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<OperationCategory>(i);
  }
  return std::nullopt;
}

int OperationSignature::mandatory_slot_count() const noexcept {
  return static_cast<int>(std::count_if(inputs.begin(), inputs.end(), [](const Slot& s) { return !s.arity.optional(); }));
}

TypeSet OperationSignature::output_types() const noexcept {
  return outputs.empty() ? TypeSet{} : outputs.front().types;
}

OperationSignature parse_operation_definition(std::string_view json_text) {
  return parse_definition(parse_json(json_text, ""), "", &OperationRegistry::builtin().operations());
}

const OperationRegistry& OperationRegistry::builtin() {
  static const OperationRegistry registry = [] {
    OperationRegistry r;
    std::set<std::string> seen;
    add_documents(r.ops_, json::parse(kBuiltinOperations), "builtin", nullptr, seen);
    return r;
  }();
  return registry;
}

OperationRegistry OperationRegistry::load(std::span<const std::string> documents) {
  OperationRegistry r = builtin();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const std::string path = "documents[" + std::to_string(i) + "]";
    add_documents(r.ops_, parse_json(documents[i], path), path, &builtin().ops_, seen);
  }
  return r;
}

const OperationSignature* OperationRegistry::find(std::string_view name) const noexcept {
  auto it = ops_.find(to_lower(name));
  return it == ops_.end() ? nullptr : &it->second;
}

const OperationSignature& OperationRegistry::signature_of(std::string_view name) const {
  if (const auto* sig = find(name)) return *sig;
  const std::string wanted = to_lower(name);
  std::string best;
  std::size_t best_distance = std::string::npos;
  for (const auto& [candidate, _] : ops_) {
    std::size_t d = edit_distance(wanted, candidate);
    if (d < best_distance) {
      best_distance = d;
      best = candidate;
    }
  }
  std::string message = "unknown operation \"" + std::string(name) + "\"";
  if (!best.empty()) message += "; did you mean \"" + best + "\"?";
  throw NotFoundError(message);
}

std::string fill_language_template(std::string_view tpl, const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    std::size_t close = tpl[i] == '{' ? tpl.find('}', i) : std::string_view::npos;
    std::size_t idx = 0;
    if (close != std::string_view::npos &&
        std::from_chars(tpl.data() + i + 1, tpl.data() + close, idx).ptr == tpl.data() + close && close > i + 1) {
      if (idx < args.size()) out += args[idx];
      i = close;
    } else {
      out += tpl[i];
    }
  }
  return out;
}

}  // namespace infospace
