// SPDX-License-Identifier: Apache-2.0

#include "infospace/questions.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "infospace/error.hpp"

namespace infospace {

const std::map<std::string, std::string>& filter_nicenames() {
  static const std::map<std::string, std::string> names = {
      {"exact", "of"},
      {"contains", "containing"},
      {"greaterthan", "greater than"},
      {"greaterthan_eq", "greater than or equal to"},
      {"lessthan", "less than"},
      {"lessthan_eq", "less than or equal to"},
      {"not", "not"},
      {"and", "and"},
      {"or", "or"},
      {"asc", "in ascending order"},
      {"desc", "in descending order"},
      {"limit", "limited to the top results"},
  };
  return names;
}

namespace {

struct ReturnParts {
  int collect = 0;
  int filter = 0;
  int sort = 0;
  int limit = 0;
};

class Renderer {
 public:
  Renderer(const CheckedPlan& c, const DomainLabeling& l, const OperationRegistry& r) : c_(c), plan_(c.plan), l_(l), r_(r) {}

  std::string question() {
    if (plan_.returns.empty()) throw Error(ErrorCode::Validation, "plan has no return step");
    int ret = plan_.returns.back();
    ReturnParts parts = parts_of(ret);
    auto items = collect_items(parts.collect);

    std::vector<int> shown;
    for (int id : items) {
      if (!is_group_key(id, items)) shown.push_back(id);
    }
    if (shown.empty()) shown = items;

    bool boolean = shown.size() == 1 && c_.type_of(shown[0]).types.contains(AttributeType::Filter);
    if (boolean) {
      return "Is the " + render(shown[0]) + filters_suffix(parts) + "?";
    }
    auto [prefix, body] = body_with_ordering(parts, items, shown);
    std::string lead = prefix.empty() ? "What is the " : "For " + prefix + ", what is the ";
    return lead + body + filters_suffix(parts) + "?";
  }

 private:
  ReturnParts parts_of(int ret) const {
    ReturnParts p;
    const PlanStep& s = plan_.step_or_throw(ret);
    const auto& slots = c_.arg_slots.at(ret);
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      int id = std::get<StepRef>(s.args[i]).id;
      switch (slots[i]) {
        case 0: p.collect = id; break;
        case 1: p.filter = id; break;
        case 2: p.sort = id; break;
        case 3: p.limit = id; break;
      }
    }
    return p;
  }

  std::vector<int> collect_items(int collect) const {
    std::vector<int> items;
    for (const auto& a : plan_.step_or_throw(collect).args) items.push_back(std::get<StepRef>(a).id);
    return items;
  }

  std::vector<int> group_keys_of(int id) const {
    std::vector<int> keys;
    for (const auto& a : plan_.step_or_throw(id).args) {
      auto ref = std::get_if<StepRef>(&a);
      if (!ref) continue;
      const PlanStep& g = plan_.step_or_throw(ref->id);
      if (g.op != "groupby") continue;
      for (const auto& k : g.args) keys.push_back(std::get<StepRef>(k).id);
    }
    return keys;
  }

  bool same_value(int a, int b) const {
    if (a == b) return true;
    const auto& ta = c_.type_of(a);
    const auto& tb = c_.type_of(b);
    return ta.attribute_ref && tb.attribute_ref && *ta.attribute_ref == *tb.attribute_ref;
  }

  bool is_group_key(int id, const std::vector<int>& items) const {
    for (int item : items) {
      for (int key : group_keys_of(item)) {
        if (same_value(key, id)) return true;
      }
    }
    return false;
  }

  std::pair<std::string, std::string> body_with_ordering(const ReturnParts& parts, const std::vector<int>& items,
                                                         const std::vector<int>& shown) {
    std::string body;
    for (std::size_t i = 0; i < shown.size(); ++i) {
      if (i) body += " and ";
      body += render(shown[i]);
    }
    const auto& nice = filter_nicenames();
    std::string limit_phrase = parts.limit ? nice.at("limit") : "";
    if (!parts.sort) {
      if (parts.limit) body += " " + limit_phrase;
      return {"", body};
    }
    const PlanStep& s = plan_.step_or_throw(parts.sort);
    const std::string& dir = std::get<StringLit>(s.args.back()).text;
    std::vector<int> keys;
    for (std::size_t i = 0; i + 1 < s.args.size(); ++i) keys.push_back(std::get<StepRef>(s.args[i]).id);
    // Ordering by something the question already names reads as a suffix.
    bool on_group_keys = std::all_of(keys.begin(), keys.end(), [&](int k) {
      return is_group_key(k, items) || std::any_of(items.begin(), items.end(), [&](int i) { return same_value(i, k); });
    });
    std::string order = nice.count(dir) ? nice.at(dir) : dir;
    if (on_group_keys) {
      body += " " + order;
      if (parts.limit) body += " and " + limit_phrase;
      return {"", body};
    }
    std::vector<std::string> names;
    for (int k : keys) names.push_back(render(k));
    std::string prefix = fill(s.op, {join(names, " and "), order.substr(order.find(' ') + 1)});
    if (parts.limit) prefix += " and " + limit_phrase;
    return {prefix, body};
  }

  std::string filters_suffix(const ReturnParts& parts) {
    if (!parts.filter) return "";
    return " for " + render(parts.filter);
  }

  static std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += sep;
      out += parts[i];
    }
    return out;
  }

  std::string fill(const std::string& op, const std::vector<std::string>& args) const {
    const OperationSignature* sig = r_.find(op);
    if (!sig || sig->language_template.empty()) {
      throw Error(ErrorCode::Validation, "operation \"" + op + "\" has no language template");
    }
    return fill_language_template(sig->language_template, args);
  }

  static std::string lower(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
  }

  std::string attribute_phrase(int id) {
    const PlanStep& s = plan_.step_or_throw(id);
    const auto& t = c_.type_of(id);
    if (t.attribute_ref) {
      const AttributeDef* a = l_.entity_or_throw(t.attribute_ref->entity).attribute(t.attribute_ref->attribute);
      return lower(a->display_name());
    }
    // Column of an earlier subplan: that subplan's own phrase for the item.
    int ret = *parse_pseudo_entity(*t.entity_context);
    ReturnParts parts = parts_of(ret);
    auto items = collect_items(parts.collect);
    auto labels = collected_labels(plan_, parts.collect);
    const std::string& label = std::get<StringLit>(s.args[1]).text;
    auto it = std::find(labels.begin(), labels.end(), label);
    int item = items.at(static_cast<std::size_t>(it - labels.begin()));
    auto [prefix, body] = body_with_ordering(parts, items, {item});
    std::string phrase = prefix.empty() ? body : prefix + ", " + body;
    return phrase + filters_suffix(parts);
  }

  std::string render(int id) {
    const PlanStep& s = plan_.step_or_throw(id);
    if (s.op == "retrieve_attribute") return attribute_phrase(id);
    if (s.op == "and" || s.op == "or") {
      std::vector<std::string> parts;
      for (const auto& a : s.args) parts.push_back(render(std::get<StepRef>(a).id));
      return join(parts, " " + filter_nicenames().at(s.op) + " ");
    }
    std::vector<std::string> args;
    std::vector<std::string> grouping;
    for (const auto& a : s.args) {
      if (auto ref = std::get_if<StepRef>(&a)) {
        const PlanStep& arg = plan_.step_or_throw(ref->id);
        if (arg.op == "groupby") {
          std::vector<std::string> keys;
          for (const auto& k : arg.args) keys.push_back(render(std::get<StepRef>(k).id));
          grouping.push_back(fill("groupby", {join(keys, " and ")}));
          continue;
        }
        args.push_back(render(ref->id));
      } else if (auto str = std::get_if<StringLit>(&a)) {
        args.push_back(str->text);
      } else {
        args.push_back(format_number(std::get<NumberLit>(a).value));
      }
    }
    std::string out = fill(s.op, args);
    for (const auto& g : grouping) out += " " + g;
    return out;
  }

  const CheckedPlan& c_;
  const PlanGraph& plan_;
  const DomainLabeling& l_;
  const OperationRegistry& r_;
};

}  // namespace

std::string render_question(const CheckedPlan& checked, const DomainLabeling& labeling,
                            const OperationRegistry& registry) {
  return Renderer(checked, labeling, registry).question();
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void QuestionIndex::add(std::string question_id, std::string question_text) {
  Record r;
  r.question_id = std::move(question_id);
  r.text = std::move(question_text);
  for (auto& t : tokenize(r.text)) ++r.tokens[t];
  records_.push_back(std::move(r));
}

std::vector<SearchHit> QuestionIndex::search(std::string_view query, std::size_t limit) const {
  std::map<std::string, std::size_t> wanted;
  for (auto& t : tokenize(query)) ++wanted[t];
  if (wanted.empty() || limit == 0) return {};

  struct Scored {
    const Record* record;
    std::size_t score;
  };
  std::vector<Scored> scored;
  for (const auto& r : records_) {
    std::size_t score = 0;
    for (const auto& [token, n] : wanted) {
      auto it = r.tokens.find(token);
      if (it != r.tokens.end()) score += std::min(n, it->second);
    }
    if (score > 0) scored.push_back({&r, score});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.record->text.size() != b.record->text.size()) return a.record->text.size() < b.record->text.size();
    return a.record->question_id < b.record->question_id;
  });
  if (scored.size() > limit) scored.resize(limit);
  std::vector<SearchHit> hits;
  for (const auto& s : scored) hits.push_back({s.record->question_id, s.score});
  return hits;
}

}  // namespace infospace
