// SPDX-License-Identifier: Apache-2.0

#include "infospace/compiler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace infospace {

namespace {

const std::set<std::string, std::less<>> kUnitPreserving = {"average", "max", "min", "median", "sum",
                                                            "get_one", "standard_deviation", "string_aggregation"};

SqlFragment join_fragments(const std::vector<SqlFragment>& parts, std::string_view sep, std::string_view open = "(",
                           std::string_view close = ")") {
  SqlFragment out;
  out.text = std::string(open);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.text += sep;
    out.text += parts[i].text;
    out.params.insert(out.params.end(), parts[i].params.begin(), parts[i].params.end());
  }
  out.text += close;
  return out;
}

SqlFragment call(std::string_view fn, const std::vector<SqlFragment>& args, std::string_view prefix = "") {
  SqlFragment f = join_fragments(args, ", ", "(", ")");
  f.text = std::string(fn) + "(" + std::string(prefix) + f.text.substr(1);
  return f;
}

std::string escape_like(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '%' || c == '_' || c == '\\') out += '\\';
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

void append(SqlFragment& into, const SqlFragment& part) {
  into.text += part.text;
  into.params.insert(into.params.end(), part.params.begin(), part.params.end());
}

Scalar literal_value(const PlanArg& arg) {
  if (auto s = std::get_if<StringLit>(&arg)) return s->text;
  double v = std::get<NumberLit>(arg).value;
  if (v == std::floor(v) && std::fabs(v) < 9e15) return static_cast<std::int64_t>(v);
  return v;
}

bool is_structural(std::string_view op) {
  return op == "retrieve_entity" || op == "groupby" || op == "sort" || op == "limit" || op == "collect" ||
         op == "return";
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

class SubplanCompiler {
 public:
  SubplanCompiler(const CheckedPlan& checked, const Subplan& subplan, const DomainLabeling& labeling,
                  const Dialect& dialect)
      : c_(checked), plan_(checked.plan), sp_(subplan), l_(labeling), d_(dialect) {}

  CompiledQuery compile() {
    const PlanStep& ret = plan_.step_or_throw(sp_.return_step);
    const auto& slots = c_.arg_slots.at(ret.id);
    for (std::size_t i = 0; i < ret.args.size(); ++i) {
      int id = std::get<StepRef>(ret.args[i]).id;
      switch (slots[i]) {
        case 0: collect_ = id; break;
        case 1: filter_ = id; break;
        case 2: sort_ = id; break;
        case 3: limit_ = id; break;
      }
    }
    gather();

    std::vector<int> items;
    for (const auto& a : plan_.step_or_throw(collect_).args) items.push_back(std::get<StepRef>(a).id);
    auto labels = collected_labels(plan_, collect_);

    bool any_aggregate = std::any_of(items.begin(), items.end(), [&](int id) { return aggregated(id); });
    std::vector<int> conjuncts;
    if (filter_) flatten_and(filter_, conjuncts);
    std::vector<int> where, having;
    for (int id : conjuncts) (aggregated(id) ? having : where).push_back(id);
    if (!having.empty()) any_aggregate = true;

    std::vector<std::pair<int, std::string>> sort_keys;
    if (sort_) {
      const PlanStep& s = plan_.step_or_throw(sort_);
      std::string dir = std::get<StringLit>(s.args.back()).text == "desc" ? "DESC" : "ASC";
      for (std::size_t i = 0; i + 1 < s.args.size(); ++i) sort_keys.emplace_back(std::get<StepRef>(s.args[i]).id, dir);
    }

    // Grouped queries may only collect, sort by and filter on group keys or aggregates.
    if (grouping_) {
      for (int id : items) {
        if (!aggregated(id) && !is_group_key(id)) {
          throw CompileError("\"" + value_label(plan_, id) + "\" is collected next to grouped aggregates but is not a group key");
        }
      }
      for (auto& [id, dir] : sort_keys) {
        if (!aggregated(id) && !is_group_key(id)) {
          throw CompileError("cannot sort grouped results by \"" + value_label(plan_, id) + "\"");
        }
      }
    } else if (any_aggregate) {
      for (int id : items) {
        if (!aggregated(id)) {
          throw CompileError("\"" + value_label(plan_, id) + "\" is collected next to aggregates without a grouping");
        }
      }
    }

    bool sorted_by_rows = std::any_of(sort_keys.begin(), sort_keys.end(), [&](const auto& k) { return !aggregated(k.first); });
    bool nested = any_aggregate && !grouping_ && (limit_ || sorted_by_rows);

    CompiledQuery q;
    SqlFragment from = from_clause();

    SqlFragment select;
    if (nested) {
      // Sort and limit pick the rows the aggregates run over.
      SqlFragment inner{"SELECT ", {}};
      int k = 0;
      for (int id : sp_.steps) {
        if (plan_.step_or_throw(id).op != "retrieve_attribute") continue;
        std::string alias = "c" + std::to_string(k++);
        if (k > 1) inner.text += ", ";
        append(inner, expr(id));
        inner.text += " AS " + quote_identifier(alias);
        rebound_[id] = quote_identifier("r") + "." + quote_identifier(alias);
      }
      inner.text += " FROM ";
      append(inner, from);
      append_where(inner, where);
      append_order(inner, sort_keys, /*use_rebound=*/false);
      append_limit(inner);
      use_rebound_ = true;
      from = SqlFragment{"(" + inner.text + ") AS " + quote_identifier("r"), inner.params};
      where.clear();
      sort_keys.erase(std::remove_if(sort_keys.begin(), sort_keys.end(), [&](const auto& k) { return !aggregated(k.first); }),
                      sort_keys.end());
    }

    for (std::size_t i = 0; i < items.size(); ++i) {
      host_used_.clear();
      SqlFragment e = expr(items[i]);
      if (i) select.text += ", ";
      append(select, e);
      select.text += " AS " + quote_identifier(labels[i]);
      q.columns.push_back(column_info(items[i], labels[i]));
      for (HostFunction h : host_used_) {
        PostAggregation pa;
        pa.kind = h;
        pa.value_columns = {static_cast<int>(i)};
        pa.value_arity = h == HostFunction::Correlation ? 2 : 1;
        q.post_aggregation.push_back(pa);
      }
    }
    for (auto& pa : q.post_aggregation) {
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (is_group_key(items[i])) pa.group_key_columns.push_back(static_cast<int>(i));
      }
    }

    SqlFragment sql{"SELECT ", {}};
    append(sql, select);
    bool wrap_having = !having.empty() && !grouping_;
    std::vector<std::string> having_aliases;
    if (wrap_having) {
      // Engines without HAVING on ungrouped aggregates filter one level up.
      for (std::size_t i = 0; i < having.size(); ++i) {
        std::string alias = "__having" + std::to_string(i);
        sql.text += ", ";
        append(sql, expr(having[i]));
        sql.text += " AS " + quote_identifier(alias);
        having_aliases.push_back(alias);
      }
    }
    sql.text += " FROM ";
    append(sql, from);
    append_where(sql, where);
    if (grouping_) {
      sql.text += " GROUP BY ";
      const PlanStep& g = plan_.step_or_throw(grouping_);
      for (std::size_t i = 0; i < g.args.size(); ++i) {
        if (i) sql.text += ", ";
        append(sql, expr(std::get<StepRef>(g.args[i]).id));
      }
      if (!having.empty()) {
        sql.text += " HAVING ";
        std::vector<SqlFragment> parts;
        for (int id : having) parts.push_back(expr(id));
        append(sql, parts.size() == 1 ? parts[0] : join_fragments(parts, " AND "));
      }
    }
    if (wrap_having) {
      SqlFragment outer{"SELECT ", {}};
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) outer.text += ", ";
        outer.text += quote_identifier("h") + "." + quote_identifier(labels[i]);
      }
      outer.text += " FROM (";
      append(outer, sql);
      outer.text += ") AS " + quote_identifier("h") + " WHERE ";
      for (std::size_t i = 0; i < having_aliases.size(); ++i) {
        if (i) outer.text += " AND ";
        outer.text += quote_identifier("h") + "." + quote_identifier(having_aliases[i]);
      }
      sql = std::move(outer);
      // Remaining ORDER BY keys are aggregates; order by their output labels.
      if (!sort_keys.empty()) {
        sql.text += " ORDER BY ";
        for (std::size_t i = 0; i < sort_keys.size(); ++i) {
          if (i) sql.text += ", ";
          auto it = std::find(items.begin(), items.end(), sort_keys[i].first);
          if (it == items.end()) throw CompileError("sorting by an aggregate that is not collected is not supported here");
          sql.text += quote_identifier("h") + "." + quote_identifier(labels[it - items.begin()]) + " " + sort_keys[i].second;
        }
      }
      if (!nested) append_limit(sql);
    } else {
      append_order(sql, sort_keys, true);
      if (!nested) append_limit(sql);
    }

    q.sql_text = std::move(sql.text);
    q.params = std::move(sql.params);
    return q;
  }

 private:
  void gather() {
    for (int id : sp_.steps) {
      const PlanStep& s = plan_.step_or_throw(id);
      if (s.op == "retrieve_entity") {
        const auto& name = std::get<StringLit>(s.args[0]).text;
        if (parse_pseudo_entity(name)) continue;
        if (std::find(entities_.begin(), entities_.end(), name) == entities_.end()) entities_.push_back(name);
      } else if (s.op == "retrieve_attribute") {
        const auto& t = c_.type_of(id);
        if (t.attribute_ref) attributes_.push_back(*t.attribute_ref);
      } else if (auto sig = c_.types.count(id) ? category_of(s.op) : std::nullopt;
                 sig && *sig == OperationCategory::Aggregation) {
        int group = grouping_arg(id);
        if (group && grouping_ && group != grouping_) throw CompileError("aggregates in one query use different groupings");
        if (group) grouping_ = group;
        has_ungrouped_aggregate_ |= group == 0;
      }
    }
    if (grouping_ && has_ungrouped_aggregate_) {
      throw CompileError("grouped and ungrouped aggregates cannot be mixed in one query");
    }
    if (grouping_) {
      for (const auto& a : plan_.step_or_throw(grouping_).args) group_keys_.push_back(std::get<StepRef>(a).id);
    }
  }

  std::optional<OperationCategory> category_of(const std::string& op) const {
    static const OperationRegistry& builtin = OperationRegistry::builtin();
    if (const auto* sig = builtin.find(op)) return sig->category;
    return std::nullopt;
  }

  // Step id of the groupby an aggregation is grouped by, or 0.
  int grouping_arg(int id) const {
    const PlanStep& s = plan_.step_or_throw(id);
    for (const auto& a : s.args) {
      if (auto ref = std::get_if<StepRef>(&a); ref && plan_.step_or_throw(ref->id).op == "groupby") return ref->id;
    }
    return 0;
  }

  bool is_group_key(int id) const {
    const auto& t = c_.type_of(id);
    for (int key : group_keys_) {
      if (key == id) return true;
      const auto& kt = c_.type_of(key);
      if (t.attribute_ref && kt.attribute_ref && *t.attribute_ref == *kt.attribute_ref) return true;
    }
    return false;
  }

  bool aggregated(int id) {
    if (auto it = aggregated_.find(id); it != aggregated_.end()) return it->second;
    const PlanStep& s = plan_.step_or_throw(id);
    bool result = false;
    if (category_of(s.op) == OperationCategory::Aggregation) {
      result = true;
    } else if (s.op != "retrieve_attribute" && s.op != "retrieve_entity") {
      for (const auto& a : s.args) {
        if (auto ref = std::get_if<StepRef>(&a); ref && aggregated(ref->id)) result = true;
      }
    }
    aggregated_[id] = result;
    return result;
  }

  void flatten_and(int id, std::vector<int>& out) const {
    const PlanStep& s = plan_.step_or_throw(id);
    if (s.op == "and") {
      for (const auto& a : s.args) flatten_and(std::get<StepRef>(a).id, out);
    } else {
      out.push_back(id);
    }
  }

  SqlFragment from_clause() {
    SqlFragment from;
    if (!entities_.empty()) {
      JoinPlan jp = resolve_joins(l_, entities_, attributes_);
      from.text = quote_identifier(jp.root_table);
      for (const auto& j : jp.joins) {
        from.text += " INNER JOIN " + quote_identifier(j.table) + " ON ";
        for (std::size_t i = 0; i < j.on.size(); ++i) {
          if (i) from.text += " AND ";
          from.text += quote_identifier(j.on[i].first.table) + "." + quote_identifier(j.on[i].first.column) + " = " +
                       quote_identifier(j.on[i].second.table) + "." + quote_identifier(j.on[i].second.column);
        }
      }
    }
    for (int dep : sp_.depends_on) {
      Subplan child;
      child.return_step = dep;
      for (const auto& candidate : split_subplans(c_)) {
        if (candidate.return_step == dep) child = candidate;
      }
      CompiledQuery sub = SubplanCompiler(c_, child, l_, d_).compile();
      dependency_columns_[dep] = sub.columns;
      if (!from.text.empty()) from.text += " CROSS JOIN ";
      from.text += "(" + sub.sql_text + ") AS " + quote_identifier("s" + std::to_string(dep));
      from.params.insert(from.params.end(), sub.params.begin(), sub.params.end());
    }
    if (from.text.empty()) throw CompileError("subplan of return |" + std::to_string(sp_.return_step) + "| reads no data");
    return from;
  }

  void append_where(SqlFragment& sql, const std::vector<int>& where) {
    if (where.empty()) return;
    sql.text += " WHERE ";
    std::vector<SqlFragment> parts;
    for (int id : where) parts.push_back(expr(id));
    append(sql, parts.size() == 1 ? parts[0] : join_fragments(parts, " AND "));
  }

  void append_order(SqlFragment& sql, const std::vector<std::pair<int, std::string>>& keys, bool use_rebound) {
    if (keys.empty()) return;
    bool saved = use_rebound_;
    use_rebound_ = use_rebound && saved;
    sql.text += " ORDER BY ";
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i) sql.text += ", ";
      append(sql, expr(keys[i].first));
      sql.text += " " + keys[i].second;
    }
    use_rebound_ = saved;
  }

  void append_limit(SqlFragment& sql) {
    if (!limit_) return;
    const PlanStep& s = plan_.step_or_throw(limit_);
    sql.text += " LIMIT ?";
    sql.params.push_back(literal_value(s.args[0]));
  }

  SqlFragment expr(int id) {
    const PlanStep& s = plan_.step_or_throw(id);
    if (s.op == "retrieve_attribute") {
      if (use_rebound_) {
        if (auto it = rebound_.find(id); it != rebound_.end()) return {it->second, {}};
      }
      const auto& t = c_.type_of(id);
      if (t.attribute_ref) {
        const AttributeDef* a = l_.entity_or_throw(t.attribute_ref->entity).attribute(t.attribute_ref->attribute);
        return {quote_identifier(a->source.table) + "." + quote_identifier(a->source.column), {}};
      }
      int dep = *parse_pseudo_entity(*t.entity_context);
      return {quote_identifier("s" + std::to_string(dep)) + "." + quote_identifier(std::get<StringLit>(s.args[1]).text), {}};
    }
    if (is_structural(s.op)) throw CompileError("step |" + std::to_string(id) + "| (" + s.op + ") is not a value");
    std::vector<SqlFragment> args;
    std::vector<bool> literal;
    for (const auto& a : s.args) {
      if (auto ref = std::get_if<StepRef>(&a)) {
        if (plan_.step_or_throw(ref->id).op == "groupby") continue;
        args.push_back(expr(ref->id));
        literal.push_back(false);
      } else {
        args.push_back({"?", {literal_value(a)}});
        literal.push_back(true);
      }
    }
    SqlFragment out = lower_operation(s.op, args, d_, literal);
    note_host_functions(s.op);
    return out;
  }

  void note_host_functions(const std::string& op) {
    if (op == "median") host_used_.push_back(HostFunction::Median);
    else if (op == "correlation") host_used_.push_back(HostFunction::Correlation);
    else if (op == "standard_deviation" && !d_.native_stddev) host_used_.push_back(HostFunction::StddevFallback);
    else if (op == "string_aggregation" && !d_.native_group_concat) host_used_.push_back(HostFunction::StringAggFallback);
    else if (op == "square_root" && !d_.native_sqrt) host_used_.push_back(HostFunction::SqrtFallback);
  }

  std::pair<std::string, std::optional<std::string>> describe_value(int id) {
    const PlanStep& s = plan_.step_or_throw(id);
    const auto& t = c_.type_of(id);
    if (s.op == "retrieve_attribute") {
      if (t.attribute_ref) {
        const AttributeDef* a = l_.entity_or_throw(t.attribute_ref->entity).attribute(t.attribute_ref->attribute);
        return {a->display_name(), a->units};
      }
      int dep = *parse_pseudo_entity(*t.entity_context);
      const auto& label = std::get<StringLit>(s.args[1]).text;
      for (const auto& col : dependency_columns_[dep]) {
        if (col.label == label) return {col.nicename, col.units};
      }
      return {label, std::nullopt};
    }
    std::vector<std::string> names;
    std::vector<std::optional<std::string>> units;
    for (const auto& a : s.args) {
      if (auto ref = std::get_if<StepRef>(&a)) {
        if (plan_.step_or_throw(ref->id).op == "groupby") continue;
        auto [n, u] = describe_value(ref->id);
        names.push_back(n);
        units.push_back(u);
      } else if (auto str = std::get_if<StringLit>(&a)) {
        names.push_back(str->text);
        units.emplace_back();
      } else {
        names.push_back(format_number(std::get<NumberLit>(a).value));
        units.emplace_back();
      }
    }
    const auto* sig = OperationRegistry::builtin().find(s.op);
    std::string nice = sig ? fill_language_template(sig->language_template, names) : s.op;
    std::optional<std::string> unit;
    if (!units.empty() && kUnitPreserving.count(s.op)) unit = units[0];
    if ((s.op == "add" || s.op == "subtract") && !units.empty() &&
        std::all_of(units.begin(), units.end(), [&](const auto& u) { return u == units[0]; })) {
      unit = units[0];
    }
    return {nice, unit};
  }

  OutputColumn column_info(int id, const std::string& label) {
    OutputColumn col;
    col.label = label;
    col.types = c_.type_of(id).types;
    // The concatenated list is text whatever the inputs were.
    if (plan_.step_or_throw(id).op == "string_aggregation") col.types = TypeSet{AttributeType::String};
    auto [nice, units] = describe_value(id);
    col.nicename = capitalize(nice);
    col.units = units;
    return col;
  }

  const CheckedPlan& c_;
  const PlanGraph& plan_;
  const Subplan& sp_;
  const DomainLabeling& l_;
  const Dialect& d_;

  int collect_ = 0, filter_ = 0, sort_ = 0, limit_ = 0;
  int grouping_ = 0;
  bool has_ungrouped_aggregate_ = false;
  std::vector<int> group_keys_;
  std::vector<std::string> entities_;
  std::vector<AttributeBinding> attributes_;
  std::map<int, bool> aggregated_;
  std::map<int, std::string> rebound_;
  bool use_rebound_ = false;
  std::vector<HostFunction> host_used_;
  std::map<int, std::vector<OutputColumn>> dependency_columns_;
};

}  // namespace

bool JoinPlan::contains_table(const std::string& table) const {
  if (table == root_table) return true;
  return std::any_of(joins.begin(), joins.end(), [&](const JoinStep& j) { return j.table == table; });
}

JoinPlan resolve_joins(const DomainLabeling& labeling, const std::vector<std::string>& entities_used,
                       const std::vector<AttributeBinding>& attributes_used) {
  if (entities_used.empty()) throw CompileError("no entities to join");
  JoinPlan jp;
  jp.root_table = labeling.entity_or_throw(entities_used.front()).primary_table;

  struct Pending {
    const JoinDef* join;
    std::string provenance;
  };
  std::vector<Pending> pending;
  std::set<std::string> queued;
  auto queue_chain = [&](const std::vector<std::string>& chain, const std::string& provenance) {
    for (const auto& name : chain) {
      const JoinDef* j = labeling.join(name);
      if (!j) throw CompileError("join \"" + name + "\" is not declared");
      if (!labeling.table(j->from_table) || !labeling.table(j->to_table)) {
        throw CompileError("join \"" + name + "\" references a missing table");
      }
      if (queued.insert(name).second) pending.push_back({j, provenance});
    }
  };

  // Intra-entity chains, root entity first.
  std::vector<std::string> order = entities_used;
  for (const auto& entity : order) {
    for (const auto& binding : attributes_used) {
      if (binding.entity != entity) continue;
      const AttributeDef* a = labeling.entity_or_throw(entity).attribute(binding.attribute);
      if (!a) throw CompileError("unknown attribute \"" + binding.attribute + "\"");
      if (!a->via_joins.empty()) queue_chain(a->via_joins, "entity:" + entity);
    }
  }
  for (std::size_t i = 1; i < entities_used.size(); ++i) {
    std::vector<const RelationshipDef*> path;
    try {
      path = relationship_path(labeling, entities_used.front(), entities_used[i]);
    } catch (const Error& e) {
      throw CompileError(e.what());
    }
    for (const auto* rel : path) queue_chain(rel->join_chain, "relationship:" + rel->name);
  }

  std::set<std::string> joined{jp.root_table};
  bool progress = true;
  while (!pending.empty() && progress) {
    progress = false;
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      const JoinDef* j = it->join;
      bool has_from = joined.count(j->from_table) > 0;
      bool has_to = joined.count(j->to_table) > 0;
      if (has_from && has_to) {
        pending.erase(it);
        progress = true;
        break;
      }
      if (!has_from && !has_to) continue;
      JoinStep step;
      step.table = has_from ? j->to_table : j->from_table;
      step.joined_from = has_from ? j->from_table : j->to_table;
      step.join_name = j->name;
      step.provenance = it->provenance;
      for (const auto& [a, b] : j->on) step.on.push_back({{j->from_table, a}, {j->to_table, b}});
      joined.insert(step.table);
      jp.joins.push_back(std::move(step));
      pending.erase(it);
      progress = true;
      break;
    }
  }
  if (!pending.empty()) {
    throw CompileError("join \"" + pending.front().join->name + "\" cannot be connected to the joined tables");
  }
  // An entity whose primary table is still missing (no relationship path) is unconnected.
  for (const auto& entity : entities_used) {
    if (!joined.count(labeling.entity_or_throw(entity).primary_table)) {
      throw CompileError("entities not connected: \"" + entities_used.front() + "\" and \"" + entity + "\"");
    }
  }
  for (const auto& binding : attributes_used) {
    const AttributeDef* a = labeling.entity_or_throw(binding.entity).attribute(binding.attribute);
    if (!joined.count(a->source.table)) throw CompileError("table \"" + a->source.table + "\" is not reachable");
  }
  return jp;
}

std::string_view to_string(HostFunction f) noexcept {
  switch (f) {
    case HostFunction::Median: return "median";
    case HostFunction::Correlation: return "correlation";
    case HostFunction::StddevFallback: return "stddev_fallback";
    case HostFunction::StringAggFallback: return "string_agg_fallback";
    case HostFunction::SqrtFallback: return "sqrt_fallback";
  }
  return {};
}

std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool has_lowering(const std::string& op) {
  static const std::set<std::string, std::less<>> ops = {
      "count", "count_unique", "sum", "average", "max", "min", "get_one", "standard_deviation", "median",
      "correlation", "string_aggregation", "add", "subtract", "multiply", "divide", "square_root", "percent_change",
      "and", "or", "not", "exact", "contains", "greaterthan", "greaterthan_eq", "lessthan", "lessthan_eq"};
  return ops.count(op) > 0;
}

SqlFragment lower_operation(const std::string& op, const std::vector<SqlFragment>& args, const Dialect& dialect,
                            const std::vector<bool>& literal_args) {
  auto need = [&](std::size_t n) {
    if (args.size() < n) throw CompileError(op + " needs " + std::to_string(n) + " argument(s)");
  };
  auto binary = [&](std::string_view sql_op) {
    need(2);
    return join_fragments({args[0], args[1]}, " " + std::string(sql_op) + " ");
  };

  if (op == "count") return need(1), call("COUNT", {args[0]});
  if (op == "count_unique") return need(1), call("COUNT", {args[0]}, "DISTINCT ");
  if (op == "sum") return need(1), call("SUM", {args[0]});
  if (op == "average") return need(1), call("AVG", {args[0]});
  if (op == "max") return need(1), call("MAX", {args[0]});
  if (op == "min" || op == "get_one") return need(1), call("MIN", {args[0]});
  if (op == "standard_deviation") {
    need(1);
    return call(dialect.native_stddev ? "STDDEV_POP" : "infospace_stddev", {args[0]});
  }
  if (op == "median") return need(1), call("infospace_median", {args[0]});
  if (op == "correlation") return need(2), call("infospace_corr", {args[0], args[1]});
  if (op == "string_aggregation") {
    need(1);
    if (dialect.native_group_concat) {
      SqlFragment cast{"CAST(" + args[0].text + " AS TEXT)", args[0].params};
      SqlFragment f = call("GROUP_CONCAT", {cast});
      f.text.insert(f.text.size() - 1, ", ', '");
      return f;
    }
    return call("infospace_string_agg", {args[0]});
  }
  if (op == "square_root") {
    need(1);
    return call(dialect.native_sqrt ? "SQRT" : "infospace_sqrt", {args[0]});
  }
  if (op == "add") return need(2), join_fragments(args, " + ");
  if (op == "subtract") return need(2), join_fragments(args, " - ");
  if (op == "multiply") return need(2), join_fragments(args, " * ");
  if (op == "divide") {
    need(2);
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (i < literal_args.size() && literal_args[i] && args[i].params.size() == 1) {
        const Scalar& v = args[i].params[0];
        bool zero = (std::holds_alternative<std::int64_t>(v) && std::get<std::int64_t>(v) == 0) ||
                    (std::holds_alternative<double>(v) && std::get<double>(v) == 0.0);
        if (zero) throw CompileError("division by the constant zero");
      }
    }
    std::vector<SqlFragment> parts = args;
    parts[0] = SqlFragment{"CAST(" + args[0].text + " AS REAL)", args[0].params};
    return join_fragments(parts, " / ");
  }
  if (op == "percent_change") {
    need(2);
    // 100 * (b - a) / a; the base appears twice, so its parameters are bound twice.
    SqlFragment f{"(100.0 * (", {}};
    append(f, args[1]);
    f.text += " - ";
    append(f, args[0]);
    f.text += ") / ";
    append(f, args[0]);
    f.text += ")";
    return f;
  }
  if (op == "and") return need(1), args.size() == 1 ? args[0] : join_fragments(args, " AND ");
  if (op == "or") return need(1), args.size() == 1 ? args[0] : join_fragments(args, " OR ");
  if (op == "not") return need(1), SqlFragment{"(NOT " + args[0].text + ")", args[0].params};
  if (op == "exact") return binary("=");
  if (op == "greaterthan") return binary(">");
  if (op == "greaterthan_eq") return binary(">=");
  if (op == "lessthan") return binary("<");
  if (op == "lessthan_eq") return binary("<=");
  if (op == "contains") {
    need(2);
    SqlFragment f{"(LOWER(CAST(" + args[0].text + " AS TEXT)) LIKE ", args[0].params};
    bool literal = literal_args.size() > 1 && literal_args[1] && args[1].params.size() == 1 &&
                   std::holds_alternative<std::string>(args[1].params[0]);
    if (literal) {
      f.text += "? ESCAPE '\\')";
      f.params.push_back("%" + escape_like(std::get<std::string>(args[1].params[0])) + "%");
    } else {
      f.text += "'%' || LOWER(CAST(" + args[1].text + " AS TEXT)) || '%')";
      f.params.insert(f.params.end(), args[1].params.begin(), args[1].params.end());
    }
    return f;
  }
  throw CompileError("operation \"" + op + "\" has no SQL lowering and no host-side fallback");
}

CompiledQuery compile_subplan(const CheckedPlan& checked, const Subplan& subplan, const DomainLabeling& labeling,
                              const Dialect& dialect) {
  for (int id : subplan.steps) {
    const PlanStep& s = checked.plan.step_or_throw(id);
    if (!is_structural(s.op) && s.op != "retrieve_attribute" && !has_lowering(s.op)) {
      throw CompileError("operation \"" + s.op + "\" has no SQL lowering and no host-side fallback");
    }
  }
  return SubplanCompiler(checked, subplan, labeling, dialect).compile();
}

CompiledQuery compile_plan(const CheckedPlan& checked, const DomainLabeling& labeling, const Dialect& dialect) {
  auto subplans = split_subplans(checked);
  if (subplans.empty()) throw CompileError("plan has no return step");
  return compile_subplan(checked, subplans.back(), labeling, dialect);
}

PreparedPlan prepare_plan(const PlanGraph& plan, const OperationRegistry& registry, const DomainLabeling& labeling,
                          const Dialect& dialect) {
  PreparedPlan out{check_plan(plan, registry, labeling), {}};
  out.query = compile_plan(out.checked, labeling, dialect);
  return out;
}

std::string describe(const CompiledQuery& query) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : query.params) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::monostate>) params.push_back(nullptr);
          else if constexpr (std::is_same_v<T, Datetime>) params.push_back(v.iso);
          else params.push_back(v);
        },
        p);
  }
  return query.sql_text + "\nparams: " + params.dump() + "\n";
}

}  // namespace infospace
