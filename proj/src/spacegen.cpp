// SPDX-License-Identifier: Apache-2.0

#include "infospace/spacegen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "infospace/compiler.hpp"
#include "infospace/error.hpp"
#include "infospace/questions.hpp"

namespace infospace {

namespace {

constexpr TypeSet kMeasure{AttributeType::Arithmetic, AttributeType::Metric};
constexpr TypeSet kAnyBase{AttributeType::Arithmetic, AttributeType::Categorical, AttributeType::Datetime,
                           AttributeType::Document,   AttributeType::Identifier,  AttributeType::Metric};

EntitySlot entity(std::string name, std::optional<std::string> related_to = std::nullopt, bool identifier = false,
                  bool optional = false) {
  return EntitySlot{std::move(name), std::move(related_to), identifier, optional};
}

AttributeSlot attribute(std::string name, std::string owner, TypeSet types, AttributeRole role = AttributeRole::Any) {
  AttributeSlot s;
  s.name = std::move(name);
  s.entity = std::move(owner);
  s.types = types;
  s.role = role;
  return s;
}

OperationSlot aggregation(std::string name, std::vector<std::string> allowed = {}) {
  return OperationSlot{std::move(name), OperationCategory::Aggregation, 1, std::move(allowed)};
}

InstanceSlot instance(std::string name, std::string attr, InstanceMode mode = InstanceMode::Exact) {
  return InstanceSlot{std::move(name), std::move(attr), mode, std::nullopt};
}

std::vector<PlanTemplate> make_builtin_templates() {
  std::vector<PlanTemplate> out;

  {
    PlanTemplate t{"T1", "aggregate of a metric for one instance", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{M}")
|3| {AGG}(|2|)
|4| retrieve_entity("{F}")
|5| retrieve_attribute(|4|, "{K}")
|6| exact(|5|, "{V}")
|7| collect(|3|)
|8| return(|7|, |6|)
)", {}};
    auto k = attribute("K", "F", kAnyBase, AttributeRole::IdentifierOnly);
    k.distinct_from = "M";
    t.slots = {entity("E"), attribute("M", "E", kMeasure), aggregation("AGG"), entity("F", "E", true), k,
               instance("V", "K")};
    out.push_back(std::move(t));
  }
  {
    PlanTemplate t{"T2", "aggregate of a metric grouped by a categorical attribute", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{M}")
|3| retrieve_attribute(|1|, "{G}")
|4| groupby(|3|)
|5| {AGG}(|2|, |4|)
|6| retrieve_entity("{F}")
|7| retrieve_attribute(|6|, "{K}")
|8| exact(|7|, "{V}")
|9| collect(|3|, |5|)
|10| return(|9|, |8|)
)", {}};
    auto g = attribute("G", "E", {AttributeType::Categorical, AttributeType::Datetime}, AttributeRole::NonIdentifier);
    g.distinct_from = "M";
    t.slots = {entity("E"),
               attribute("M", "E", kMeasure),
               g,
               aggregation("AGG"),
               entity("F", "E", true, true),
               attribute("K", "F", kAnyBase, AttributeRole::IdentifierOnly),
               instance("V", "K")};
    out.push_back(std::move(t));
  }
  {
    PlanTemplate t{"T3", "attribute of one instance looked up by identifier", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{A}")
|3| retrieve_attribute(|1|, "{K}")
|4| exact(|3|, "{V}")
|5| collect(|2|)
|6| return(|5|, |4|)
)", {}};
    t.slots = {entity("E", std::nullopt, true), attribute("A", "E", kAnyBase, AttributeRole::NonIdentifier),
               attribute("K", "E", kAnyBase, AttributeRole::IdentifierOnly), instance("V", "K")};
    out.push_back(std::move(t));
  }
  {
    PlanTemplate t{"T4", "count over rows whose text attribute contains a word", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{M}")
|3| retrieve_attribute(|1|, "{K}")
|4| contains(|3|, "{V}")
|5| {AGG}(|2|)
|6| collect(|5|)
|7| return(|6|, |4|)
)", {}};
    auto k = attribute("K", "E", {AttributeType::Categorical}, AttributeRole::NonIdentifier);
    k.text_only = true;
    t.slots = {entity("E"), attribute("M", "E", kMeasure), k, aggregation("AGG", {"count", "count_unique"}),
               instance("V", "K", InstanceMode::Token)};
    out.push_back(std::move(t));
  }
  {
    PlanTemplate t{"T5", "comparison of two filtered counts", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{M}")
|3| retrieve_attribute(|1|, "{K}")
|4| contains(|3|, "{V1}")
|5| {AGG}(|2|)
|6| collect(|5|)
|7| return(|6|, |4|)
|8| retrieve_entity("{E}")
|9| retrieve_attribute(|8|, "{M}")
|10| retrieve_attribute(|8|, "{K}")
|11| contains(|10|, "{V2}")
|12| {AGG}(|9|)
|13| collect(|12|)
|14| return(|13|, |11|)
|15| retrieve_entity("|7|")
|16| retrieve_attribute(|15|, "{@5}")
|17| retrieve_entity("|14|")
|18| retrieve_attribute(|17|, "{@12}")
|19| greaterthan(|16|, |18|)
|20| collect(|19|)
|21| return(|20|)
)", {}};
    auto k = attribute("K", "E", {AttributeType::Categorical}, AttributeRole::NonIdentifier);
    k.text_only = true;
    auto v2 = instance("V2", "K", InstanceMode::Token);
    v2.distinct_from = "V1";
    t.slots = {entity("E"), attribute("M", "E", kMeasure), k, aggregation("AGG", {"count", "count_unique"}),
               instance("V1", "K", InstanceMode::Token), v2};
    out.push_back(std::move(t));
  }
  {
    PlanTemplate t{"T6", "correlation between two metrics", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{M1}")
|3| retrieve_attribute(|1|, "{M2}")
|4| correlation(|2|, |3|)
|5| retrieve_entity("{F}")
|6| retrieve_attribute(|5|, "{K}")
|7| exact(|6|, "{V}")
|8| collect(|4|)
|9| return(|8|, |7|)
)", {}};
    auto m2 = attribute("M2", "E", kMeasure, AttributeRole::NonIdentifier);
    m2.after = "M1";
    t.slots = {entity("E"),
               attribute("M1", "E", kMeasure, AttributeRole::NonIdentifier),
               m2,
               entity("F", "E", true, true),
               attribute("K", "F", kAnyBase, AttributeRole::IdentifierOnly),
               instance("V", "K")};
    out.push_back(std::move(t));
  }
  {
    PlanTemplate t{"T7", "aggregate over the latest rows", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{M}")
|3| retrieve_attribute(|1|, "{D}")
|4| sort(|3|, "desc")
|5| limit(5)
|6| {AGG}(|2|)
|7| retrieve_entity("{F}")
|8| retrieve_attribute(|7|, "{K}")
|9| exact(|8|, "{V}")
|10| collect(|6|)
|11| return(|10|, |9|, |4|, |5|)
)", {}};
    auto d = attribute("D", "E", {AttributeType::Datetime}, AttributeRole::NonIdentifier);
    d.distinct_from = "M";
    t.slots = {entity("E"),
               attribute("M", "E", kMeasure, AttributeRole::NonIdentifier),
               d,
               aggregation("AGG"),
               entity("F", "E", true, true),
               attribute("K", "F", kAnyBase, AttributeRole::IdentifierOnly),
               instance("V", "K")};
    out.push_back(std::move(t));
  }
  {
    PlanTemplate t{"T8", "aggregate of a metric under an instance and a category filter", R"(
|1| retrieve_entity("{E}")
|2| retrieve_attribute(|1|, "{M}")
|3| {AGG}(|2|)
|4| retrieve_entity("{F}")
|5| retrieve_attribute(|4|, "{K}")
|6| exact(|5|, "{V}")
|7| retrieve_attribute(|1|, "{C}")
|8| exact(|7|, "{W}")
|9| and(|6|, |8|)
|10| collect(|3|)
|11| return(|10|, |9|)
)", {}};
    auto k = attribute("K", "F", kAnyBase, AttributeRole::IdentifierOnly);
    k.distinct_from = "M";
    auto c = attribute("C", "E", {AttributeType::Categorical}, AttributeRole::NonIdentifier);
    c.distinct_from = "K";
    t.slots = {entity("E"), attribute("M", "E", kMeasure, AttributeRole::NonIdentifier), aggregation("AGG"),
               entity("F", "E", true), k, instance("V", "K"), c, instance("W", "C")};
    out.push_back(std::move(t));
  }
  for (const auto& t : out) validate_template(t);
  return out;
}

const std::regex& placeholder_pattern() {
  static const std::regex re(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
  return re;
}

std::string escape_plan_string(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

// What a slot is bound to during enumeration. `absent` marks an optional
// slot left empty (and everything depending on it).
struct Binding {
  bool absent = false;
  std::string text;
  std::string entity;              // attribute slots
  const AttributeDef* attr = nullptr;
  std::size_t order = 0;           // declaration position, for `after`

  static Binding none() {
    Binding b;
    b.absent = true;
    return b;
  }
  static Binding of(std::string text, std::string entity = {}, const AttributeDef* attr = nullptr,
                    std::size_t order = 0) {
    Binding b;
    b.text = std::move(text);
    b.entity = std::move(entity);
    b.attr = attr;
    b.order = order;
    return b;
  }
};

struct SkeletonLine {
  int id = 0;
  std::string op_and_args;          // text after the `|n| ` prefix
  std::set<std::string> placeholders;
};

std::vector<SkeletonLine> split_skeleton(const std::string& skeleton) {
  std::vector<SkeletonLine> out;
  std::istringstream in(skeleton);
  std::string line;
  static const std::regex head(R"(^\s*\|(\d+)\|\s*(.*)$)");
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, head)) continue;
    SkeletonLine s;
    s.id = std::stoi(m[1]);
    s.op_and_args = m[2];
    for (std::sregex_iterator it(s.op_and_args.begin(), s.op_and_args.end(), placeholder_pattern()), end; it != end; ++it) {
      s.placeholders.insert((*it)[1]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Top-level comma split of an argument list, respecting string literals.
std::vector<std::string> split_args(const std::string& args) {
  std::vector<std::string> out;
  std::string cur;
  bool in_string = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    char c = args[i];
    if (in_string) {
      cur += c;
      if (c == '\\' && i + 1 < args.size()) cur += args[++i];
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
      cur += c;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  for (auto& a : out) {
    auto b = a.find_first_not_of(' ');
    auto e = a.find_last_not_of(' ');
    a = b == std::string::npos ? "" : a.substr(b, e - b + 1);
  }
  return out;
}

class Enumerator {
 public:
  Enumerator(const DomainLabeling& l, const OperationRegistry& r, const Database& db, const GenerationCaps& caps,
             const std::function<bool(GeneratedQuestion&&)>& sink)
      : l_(l), r_(r), db_(db), caps_(caps), sink_(sink) {}

  bool run(const PlanTemplate& tpl, TemplateReport& report) {
    tpl_ = &tpl;
    report_ = &report;
    lines_ = split_skeleton(tpl.skeleton);
    bindings_.clear();
    return fill(0);
  }

 private:
  bool fill(std::size_t index) {
    if (index == tpl_->slots.size()) return emit();
    const SlotSpec& spec = tpl_->slots[index];
    const std::string& name = slot_name(spec);
    for (Binding& b : candidates(spec)) {
      bindings_[name] = std::move(b);
      if (!fill(index + 1)) return false;
      if (report_->capped) return true;
    }
    bindings_.erase(name);
    return true;
  }

  std::vector<Binding> candidates(const SlotSpec& spec) {
    std::vector<Binding> out;
    if (const auto* s = std::get_if<EntitySlot>(&spec)) {
      if (s->optional) out.push_back(Binding::none());
      const Binding* anchor = s->related_to ? &bindings_.at(*s->related_to) : nullptr;
      for (std::size_t i = 0; i < l_.entities.size(); ++i) {
        const EntityDef& e = l_.entities[i];
        if (s->require_identifier && !e.identifier()) continue;
        if (anchor && !anchor->absent && e.name != anchor->text && !connected(anchor->text, e.name)) continue;
        out.push_back(Binding::of(e.name, e.name, nullptr, i));
      }
    } else if (const auto* s = std::get_if<AttributeSlot>(&spec)) {
      const Binding& owner = bindings_.at(s->entity);
      if (owner.absent) return {Binding::none()};
      const EntityDef& e = l_.entity_or_throw(owner.text);
      const Binding* differ = s->distinct_from ? &bindings_.at(*s->distinct_from) : nullptr;
      const Binding* after = s->after ? &bindings_.at(*s->after) : nullptr;
      for (std::size_t i = 0; i < e.attributes.size(); ++i) {
        const AttributeDef& a = e.attributes[i];
        if (!a.types.intersects(s->types)) continue;
        bool is_id = e.identifier_attribute && *e.identifier_attribute == a.name;
        if (s->role == AttributeRole::IdentifierOnly && !is_id) continue;
        if (s->role == AttributeRole::NonIdentifier && is_id) continue;
        if (s->text_only && a.storage != StorageType::Text) continue;
        if (differ && !differ->absent && differ->attr == &a) continue;
        std::size_t order = owner.order * 10000 + i;
        if (after && !after->absent && order <= after->order) continue;
        out.push_back(Binding::of(a.name, e.name, &a, order));
      }
    } else if (const auto* s = std::get_if<OperationSlot>(&spec)) {
      for (const auto& [name, sig] : r_.operations()) {
        if (sig.category != s->category) continue;
        if (!s->allowed.empty() && std::find(s->allowed.begin(), s->allowed.end(), name) == s->allowed.end()) continue;
        if (!fits_shape(sig, s->value_args)) continue;
        out.push_back(Binding::of(name));
      }
    } else {
      const auto& slot = std::get<InstanceSlot>(spec);
      const Binding& attr = bindings_.at(slot.attribute);
      if (attr.absent) return {Binding::none()};
      const Binding* differ = slot.distinct_from ? &bindings_.at(*slot.distinct_from) : nullptr;
      for (const auto& v : instances(attr, slot.mode)) {
        if (differ && !differ->absent && differ->text == v) continue;
        out.push_back(Binding::of(v));
      }
    }
    return out;
  }

  static bool fits_shape(const OperationSignature& sig, int value_args) {
    if (sig.inputs.empty()) return false;
    const Arity& first = sig.inputs[0].arity;
    if (first.optional() || first.min_args() > value_args) return false;
    if (auto max = first.max_args(); max && *max < value_args) return false;
    for (std::size_t i = 1; i < sig.inputs.size(); ++i) {
      if (!sig.inputs[i].arity.optional()) return false;
    }
    return true;
  }

  bool connected(const std::string& a, const std::string& b) {
    auto key = a < b ? a + "\n" + b : b + "\n" + a;
    if (auto it = connected_.find(key); it != connected_.end()) return it->second;
    bool ok = true;
    try {
      relationship_path(l_, a, b);
    } catch (const Error&) {
      ok = false;
    }
    connected_[key] = ok;
    return ok;
  }

  const std::vector<std::string>& instances(const Binding& attr, InstanceMode mode) {
    auto key = attr.entity + "\n" + attr.text + (mode == InstanceMode::Token ? "\nT" : "\nE");
    if (auto it = instances_.find(key); it != instances_.end()) return it->second;
    std::vector<std::string> values;
    if (mode == InstanceMode::Exact) {
      HarvestResult h = harvest_instances(db_, l_, {attr.entity, attr.text}, caps_.max_instances);
      report_->instances_truncated |= h.truncated;
      for (const auto& v : h.values) values.push_back(to_display(v));
    } else {
      HarvestResult h = harvest_instances(db_, l_, {attr.entity, attr.text}, 100000);
      values = word_tokens(h.values);
      if (values.size() > caps_.max_instances) {
        values.resize(caps_.max_instances);
        report_->instances_truncated = true;
      }
    }
    return instances_[key] = std::move(values);
  }

  std::string instantiate_text() const {
    std::set<int> dropped;
    std::map<int, std::string> kept;
    for (const auto& line : lines_) {
      bool absent = std::any_of(line.placeholders.begin(), line.placeholders.end(),
                                [&](const std::string& p) { return bindings_.at(p).absent; });
      if (absent) dropped.insert(line.id);
    }
    // Remove references to dropped steps; a step left without arguments goes too.
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& line : lines_) {
        if (dropped.count(line.id)) continue;
        auto open = line.op_and_args.find('(');
        auto close = line.op_and_args.rfind(')');
        auto args = split_args(line.op_and_args.substr(open + 1, close - open - 1));
        std::vector<std::string> remaining;
        for (const auto& a : args) {
          if (a.size() > 2 && a.front() == '|' && a.back() == '|' && dropped.count(std::stoi(a.substr(1, a.size() - 2)))) continue;
          remaining.push_back(a);
        }
        if (remaining.empty() && !args.empty()) {
          dropped.insert(line.id);
          changed = true;
          continue;
        }
        std::string text = line.op_and_args.substr(0, open + 1);
        for (std::size_t i = 0; i < remaining.size(); ++i) text += (i ? ", " : "") + remaining[i];
        kept[line.id] = text + ")";
      }
    }
    std::string out;
    for (const auto& line : lines_) {
      if (dropped.count(line.id)) continue;
      std::string text = kept.at(line.id);
      std::string filled;
      std::sregex_iterator it(text.begin(), text.end(), placeholder_pattern()), end;
      std::size_t last = 0;
      for (; it != end; ++it) {
        filled += text.substr(last, it->position() - last);
        filled += escape_plan_string(bindings_.at((*it)[1]).text);
        last = it->position() + it->length();
      }
      filled += text.substr(last);
      out += "|" + std::to_string(line.id) + "| " + filled + "\n";
    }
    return out;
  }

  // Resolves "{@n}" labels, then merges repeated retrievals within each subplan.
  static PlanGraph normalize(PlanGraph g) {
    static const std::regex label_ref(R"(^\{@(\d+)\}$)");
    for (auto& s : g.steps) {
      for (auto& a : s.args) {
        auto str = std::get_if<StringLit>(&a);
        std::smatch m;
        if (str && std::regex_match(str->text, m, label_ref)) str->text = value_label(g, std::stoi(m[1]));
      }
    }
    PlanGraph out;
    std::map<int, int> alias;
    std::map<std::string, int> seen;
    for (auto s : g.steps) {
      for (auto& a : s.args) {
        if (auto ref = std::get_if<StepRef>(&a); ref && alias.count(ref->id)) ref->id = alias[ref->id];
      }
      if (s.op == "retrieve_entity" || s.op == "retrieve_attribute") {
        std::string key = s.op;
        for (const auto& a : s.args) {
          if (auto ref = std::get_if<StepRef>(&a)) key += "|" + std::to_string(ref->id);
          else if (auto str = std::get_if<StringLit>(&a)) key += "\"" + str->text;
        }
        if (auto it = seen.find(key); it != seen.end()) {
          alias[s.id] = it->second;
          continue;
        }
        seen[key] = s.id;
      }
      if (s.op == "return") seen.clear();
      out.steps.push_back(s);
    }
    for (int r : g.returns) out.returns.push_back(r);
    return renumbered(out);
  }

  bool emit() {
    GeneratedQuestion q;
    q.template_id = tpl_->id;
    try {
      PlanGraph plan = normalize(parse_plan(instantiate_text()));
      CheckedPlan checked = check_plan(plan, r_, l_);
      split_subplans(checked);
      compile_plan(checked, l_);
      q.question_text = render_question(checked, l_, r_);
      q.plan = std::move(plan);
    } catch (const Error&) {
      ++report_->rejected;
      return true;
    }
    q.question_id = question_id(l_.id, render_text(q.plan));
    if (!emitted_ids_.insert(q.question_id).second) {
      ++report_->duplicates;
      return true;
    }
    ++report_->emitted;
    if (report_->emitted >= caps_.max_per_template) report_->capped = true;
    return sink_(std::move(q));
  }

  const DomainLabeling& l_;
  const OperationRegistry& r_;
  const Database& db_;
  const GenerationCaps& caps_;
  const std::function<bool(GeneratedQuestion&&)>& sink_;

  const PlanTemplate* tpl_ = nullptr;
  TemplateReport* report_ = nullptr;
  std::vector<SkeletonLine> lines_;
  std::map<std::string, Binding> bindings_;
  std::map<std::string, bool> connected_;
  std::map<std::string, std::vector<std::string>> instances_;
  std::set<std::string> emitted_ids_;
};

}  // namespace

const std::string& slot_name(const SlotSpec& slot) {
  return std::visit([](const auto& s) -> const std::string& { return s.name; }, slot);
}

const std::vector<PlanTemplate>& builtin_templates() {
  static const std::vector<PlanTemplate> templates = make_builtin_templates();
  return templates;
}

void validate_template(const PlanTemplate& tpl) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < tpl.slots.size(); ++i) {
    const auto& name = slot_name(tpl.slots[i]);
    if (!position.emplace(name, i).second) throw ConfigError(tpl.id, "slot \"" + name + "\" declared twice");
  }
  auto require_earlier = [&](const std::string& ref, std::size_t i, const char* what) {
    auto it = position.find(ref);
    if (it == position.end() || it->second >= i) {
      throw ConfigError(tpl.id, std::string(what) + " \"" + ref + "\" must name an earlier slot");
    }
  };
  for (std::size_t i = 0; i < tpl.slots.size(); ++i) {
    const SlotSpec& s = tpl.slots[i];
    if (const auto* e = std::get_if<EntitySlot>(&s); e && e->related_to) require_earlier(*e->related_to, i, "related_to");
    if (const auto* a = std::get_if<AttributeSlot>(&s)) {
      require_earlier(a->entity, i, "entity");
      if (!std::holds_alternative<EntitySlot>(tpl.slots[position[a->entity]])) {
        throw ConfigError(tpl.id, "attribute slot \"" + a->name + "\" must be bound to an entity slot");
      }
      if (a->types.empty()) throw ConfigError(tpl.id, "attribute slot \"" + a->name + "\" has no types");
      if (a->distinct_from) require_earlier(*a->distinct_from, i, "distinct_from");
      if (a->after) require_earlier(*a->after, i, "after");
    }
    if (const auto* v = std::get_if<InstanceSlot>(&s)) {
      require_earlier(v->attribute, i, "attribute");
      if (!std::holds_alternative<AttributeSlot>(tpl.slots[position[v->attribute]])) {
        throw ConfigError(tpl.id, "instance slot \"" + v->name + "\" must be bound to an attribute slot");
      }
      if (v->distinct_from) require_earlier(*v->distinct_from, i, "distinct_from");
    }
  }
  std::set<std::string> used;
  for (const auto& line : split_skeleton(tpl.skeleton)) {
    for (const auto& p : line.placeholders) {
      if (!position.count(p)) throw ConfigError(tpl.id, "placeholder {" + p + "} has no slot");
      used.insert(p);
    }
  }
  for (const auto& [name, i] : position) {
    if (!used.count(name)) throw ConfigError(tpl.id, "slot \"" + name + "\" is not used by the skeleton");
  }
}

HarvestResult harvest_instances(const Database& db, const DomainLabeling& labeling, const AttributeBinding& binding,
                                std::size_t cap) {
  const AttributeDef* a = labeling.entity_or_throw(binding.entity).attribute(binding.attribute);
  if (!a) throw NotFoundError("entity \"" + binding.entity + "\" has no attribute \"" + binding.attribute + "\"");
  if (!a->types.contains(AttributeType::Identifier) && !a->types.contains(AttributeType::Categorical)) {
    throw Error(ErrorCode::InvalidArgument,
                "instances can only be harvested from Identifier or Categorical attributes, not \"" + a->name + "\"");
  }
  std::string col = quote_identifier(a->source.column);
  std::string sql = "SELECT DISTINCT " + col + " FROM " + quote_identifier(a->source.table) + " WHERE " + col +
                    " IS NOT NULL ORDER BY " + col + " ASC LIMIT ?";
  RawResult raw = db.query(sql, {static_cast<std::int64_t>(cap) + 1}, cap + 1);
  HarvestResult out;
  for (auto& row : raw.rows) out.values.push_back(std::move(row[0]));
  if (out.values.size() > cap) {
    out.values.resize(cap);
    out.truncated = true;
  }
  return out;
}

std::vector<std::string> word_tokens(const std::vector<Scalar>& values) {
  std::set<std::string> tokens;
  for (const auto& v : values) {
    auto s = std::get_if<std::string>(&v);
    if (!s) continue;
    std::string cur;
    for (char c : *s + " ") {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else {
        if (cur.size() >= 3) tokens.insert(cur);
        cur.clear();
      }
    }
  }
  return {tokens.begin(), tokens.end()};
}

std::string question_id(const std::string& domain_id, const std::string& canonical_plan_text) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(domain_id);
  mix("\n");
  mix(canonical_plan_text);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t GenerationReport::total() const {
  std::size_t n = 0;
  for (const auto& t : templates) n += t.emitted;
  return n;
}

void enumerate_plans(const DomainLabeling& labeling, const OperationRegistry& registry,
                     const std::vector<PlanTemplate>& templates, const Database& db, const GenerationCaps& caps,
                     const std::function<bool(GeneratedQuestion&&)>& sink, GenerationReport* report) {
  GenerationReport local;
  GenerationReport& rep = report ? *report : local;
  rep.templates.clear();
  Enumerator en(labeling, registry, db, caps, sink);
  for (const auto& tpl : templates) {
    validate_template(tpl);
    rep.templates.push_back({tpl.id});
    if (!en.run(tpl, rep.templates.back())) return;
  }
}

std::vector<GeneratedQuestion> enumerate_plans(const DomainLabeling& labeling, const OperationRegistry& registry,
                                               const std::vector<PlanTemplate>& templates, const Database& db,
                                               const GenerationCaps& caps, GenerationReport* report) {
  std::vector<GeneratedQuestion> out;
  enumerate_plans(
      labeling, registry, templates, db, caps,
      [&](GeneratedQuestion&& q) {
        out.push_back(std::move(q));
        return true;
      },
      report);
  return out;
}

}  // namespace infospace
