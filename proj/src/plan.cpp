// SPDX-License-Identifier: Apache-2.0

#include "infospace/plan.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <regex>
#include <set>
#include <sstream>

namespace infospace {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class LineParser {
 public:
  LineParser(std::string_view line, int line_no) : s_(line), line_(line_no) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw PlanError(ErrorCode::Parse, {Diagnostic{0, line_, static_cast<int>(pos_) + 1, message}});
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  int column() const { return static_cast<int>(pos_) + 1; }

  int step_ref() {
    expect('|');
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a step number");
    int value = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, value);
    if (ec != std::errc{} || value <= 0) {
      pos_ = start;
      fail("step numbers must be positive integers");
    }
    if (pos_ >= s_.size() || s_[pos_] != '|') fail("expected '|' closing the step number");
    ++pos_;
    return value;
  }

  std::string identifier() {
    skip_ws();
    if (pos_ >= s_.size() || !is_ident_start(s_[pos_])) fail("expected an operation name");
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string string_literal() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: --pos_; fail(std::string("unknown escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  double number_literal() {
    std::size_t start = pos_;
    if (s_[pos_] == '-' || s_[pos_] == '+') ++pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == 'e' || s_[pos_] == 'E' ||
                                ((s_[pos_] == '-' || s_[pos_] == '+') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    std::string_view text = s_.substr(start, pos_ - start);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
      pos_ = start;
      fail("malformed number");
    }
    return value;
  }

  PlanArg argument() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected an argument");
    char c = s_[pos_];
    if (c == '|') return StepRef{step_ref()};
    if (c == '"') return StringLit{string_literal()};
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') return NumberLit{number_literal()};
    fail("expected a step reference, string or number");
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void advance() { ++pos_; }

 private:
  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

bool is_structural(std::string_view op) {
  return op == "retrieve_entity" || op == "groupby" || op == "sort" || op == "limit" || op == "collect" ||
         op == "return";
}

const std::regex& iso_date() {
  static const std::regex re(R"(^\d{4}-\d{2}-\d{2}([ T]\d{2}:\d{2}(:\d{2}(\.\d+)?)?)?$)");
  return re;
}

struct SlotMatch {
  std::vector<int> slot_of_arg;
  std::optional<std::string> error;
};

// Mandatory slots consume arguments in declaration order; the remaining
// arguments go to the first free optional slot that accepts them.
SlotMatch match_slots(const OperationSignature& sig, const std::vector<TypeSet>& arg_types) {
  SlotMatch m;
  m.slot_of_arg.assign(arg_types.size(), -1);
  std::size_t next = 0;
  for (std::size_t s = 0; s < sig.inputs.size(); ++s) {
    const Slot& slot = sig.inputs[s];
    if (slot.arity.optional()) continue;
    int taken = 0;
    auto max = slot.arity.max_args();
    while (next < arg_types.size() && (!max || taken < *max)) {
      if (!types_accept(slot.types, arg_types[next])) {
        if (taken < slot.arity.min_args()) {
          m.error = "argument " + std::to_string(next + 1) + " has types " + arg_types[next].to_string() +
                    " but the slot accepts " + slot.types.to_string();
          return m;
        }
        break;
      }
      m.slot_of_arg[next++] = static_cast<int>(s);
      ++taken;
    }
    if (taken < slot.arity.min_args()) {
      m.error = "expects " + slot.arity.to_string() + " argument(s) of " + slot.types.to_string() + ", got " +
                std::to_string(taken);
      return m;
    }
  }
  std::vector<int> filled(sig.inputs.size(), 0);
  for (; next < arg_types.size(); ++next) {
    bool placed = false;
    for (std::size_t s = 0; s < sig.inputs.size(); ++s) {
      const Slot& slot = sig.inputs[s];
      if (!slot.arity.optional() || filled[s] >= slot.arity.n) continue;
      if (types_accept(slot.types, arg_types[next])) {
        m.slot_of_arg[next] = static_cast<int>(s);
        ++filled[s];
        placed = true;
        break;
      }
    }
    if (!placed) {
      m.error = "argument " + std::to_string(next + 1) + " (types " + arg_types[next].to_string() +
                ") matches no remaining slot";
      return m;
    }
  }
  return m;
}

std::set<int> reachable_from(const PlanGraph& plan, int root) {
  std::set<int> seen;
  std::deque<int> work{root};
  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    if (!seen.insert(id).second) continue;
    const PlanStep* s = plan.step(id);
    if (!s) continue;
    for (const auto& a : s->args) {
      if (auto ref = std::get_if<StepRef>(&a)) work.push_back(ref->id);
    }
  }
  return seen;
}

}  // namespace

const PlanStep* PlanGraph::step(int id) const noexcept {
  auto it = std::lower_bound(steps.begin(), steps.end(), id, [](const PlanStep& s, int v) { return s.id < v; });
  return (it != steps.end() && it->id == id) ? &*it : nullptr;
}

const PlanStep& PlanGraph::step_or_throw(int id) const {
  if (const auto* s = step(id)) return *s;
  throw NotFoundError("no step |" + std::to_string(id) + "|");
}

PlanGraph parse_plan(std::string_view text) {
  PlanGraph plan;
  std::vector<Diagnostic> errors;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;

    LineParser p(line, line_no);
    if (p.at_end_or_comment()) {
      if (end == text.size()) break;
      continue;
    }
    PlanStep step;
    step.line = line_no;
    step.column = p.column();
    step.id = p.step_ref();
    step.op = to_lower(p.identifier());
    p.expect('(');
    if (!p.peek(')')) {
      while (true) {
        int col = p.column();
        PlanArg arg = p.argument();
        if (auto ref = std::get_if<StepRef>(&arg)) {
          if (ref->id >= step.id) {
            errors.push_back({step.id, line_no, col,
                              "forward reference to |" + std::to_string(ref->id) + "| from step |" +
                                  std::to_string(step.id) + "|"});
          } else if (!plan.step(ref->id)) {
            errors.push_back({step.id, line_no, col, "reference to undefined step |" + std::to_string(ref->id) + "|"});
          }
        }
        step.args.push_back(std::move(arg));
        if (p.peek(',')) {
          p.advance();
          continue;
        }
        break;
      }
    }
    p.expect(')');
    if (!p.at_end_or_comment()) p.fail("unexpected text after step");
    if (!plan.steps.empty() && step.id <= plan.steps.back().id) {
      errors.push_back({step.id, step.line, step.column,
                        plan.step(step.id) ? "duplicate step id |" + std::to_string(step.id) + "|"
                                           : "step ids must increase; |" + std::to_string(step.id) + "| follows |" +
                                                 std::to_string(plan.steps.back().id) + "|"});
      continue;
    }
    if (step.op == "return") plan.returns.push_back(step.id);
    plan.steps.push_back(std::move(step));
    if (end == text.size()) break;
  }
  if (!errors.empty()) throw PlanError(ErrorCode::Parse, std::move(errors));
  if (plan.steps.empty()) throw PlanError(ErrorCode::Parse, {Diagnostic{0, 1, 1, "plan has no steps"}});
  if (plan.returns.empty()) plan.warnings.push_back({0, 0, 0, "plan has no return step"});
  return plan;
}

std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

PlanGraph renumbered(const PlanGraph& plan) {
  std::map<int, int> remap;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) remap[plan.steps[i].id] = static_cast<int>(i) + 1;
  PlanGraph out;
  for (const auto& s : plan.steps) {
    PlanStep n = s;
    n.id = remap.at(s.id);
    for (auto& a : n.args) {
      if (auto ref = std::get_if<StepRef>(&a)) ref->id = remap.at(ref->id);
      if (auto str = std::get_if<StringLit>(&a)) {
        if (auto p = parse_pseudo_entity(str->text); p && remap.count(*p) && n.op == "retrieve_entity") {
          str->text = pseudo_entity_name(remap.at(*p));
        }
      }
    }
    out.steps.push_back(std::move(n));
  }
  for (int r : plan.returns) out.returns.push_back(remap.at(r));
  out.warnings = plan.warnings;
  return out;
}

std::string render_text(const PlanGraph& plan) {
  PlanGraph canon = renumbered(plan);
  std::ostringstream os;
  for (const auto& s : canon.steps) {
    os << '|' << s.id << "| " << s.op << '(';
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      if (i) os << ", ";
      std::visit(
          [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, StepRef>) os << '|' << a.id << '|';
            else if constexpr (std::is_same_v<T, StringLit>) os << quote(a.text);
            else os << format_number(a.value);
          },
          s.args[i]);
    }
    os << ")\n";
  }
  return os.str();
}

std::string pseudo_entity_name(int return_step) { return "|" + std::to_string(return_step) + "|"; }

std::optional<int> parse_pseudo_entity(std::string_view name) noexcept {
  if (name.size() < 3 || name.front() != '|' || name.back() != '|') return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size() - 1, value);
  if (ec != std::errc{} || ptr != name.data() + name.size() - 1 || value <= 0) return std::nullopt;
  return value;
}

std::string value_label(const PlanGraph& plan, int step_id) {
  const PlanStep& s = plan.step_or_throw(step_id);
  if (s.op == "retrieve_attribute" || s.op == "retrieve_entity") {
    for (auto it = s.args.rbegin(); it != s.args.rend(); ++it) {
      if (auto str = std::get_if<StringLit>(&*it)) return str->text;
    }
    return s.op;
  }
  std::string label = s.op;
  for (const auto& a : s.args) {
    auto ref = std::get_if<StepRef>(&a);
    if (!ref) continue;
    const PlanStep* arg = plan.step(ref->id);
    if (!arg || is_structural(arg->op)) continue;
    label += "_" + value_label(plan, ref->id);
  }
  return label;
}

std::vector<std::string> collected_labels(const PlanGraph& plan, int collect_step) {
  const PlanStep& s = plan.step_or_throw(collect_step);
  std::vector<std::string> out;
  std::map<std::string, int> seen;
  for (const auto& a : s.args) {
    auto ref = std::get_if<StepRef>(&a);
    std::string label = ref ? value_label(plan, ref->id) : "value";
    int n = ++seen[label];
    if (n > 1) label += "_" + std::to_string(n);
    out.push_back(std::move(label));
  }
  return out;
}

TypeSet TypedValue::effective_types() const noexcept {
  return attribute_like ? types.united({AttributeType::Attribute}) : types;
}

const TypedValue& CheckedPlan::type_of(int step) const {
  auto it = types.find(step);
  if (it == types.end()) throw NotFoundError("step |" + std::to_string(step) + "| has no type");
  return it->second;
}

TypeSet literal_types(const PlanArg& arg) {
  if (auto s = std::get_if<StringLit>(&arg)) {
    TypeSet t{AttributeType::String};
    if (std::regex_match(s->text, iso_date())) t.insert(AttributeType::Datetime);
    return t;
  }
  if (std::holds_alternative<NumberLit>(arg)) return {AttributeType::Arithmetic};
  return {};
}

CheckedPlan check_plan(const PlanGraph& plan, const OperationRegistry& registry, const DomainLabeling& labeling) {
  CheckedPlan out;
  out.plan = plan;
  out.warnings = plan.warnings;
  std::vector<Diagnostic> errors;
  std::set<int> failed;

  for (const auto& step : plan.steps) {
    auto error = [&](const std::string& message) {
      errors.push_back({step.id, step.line, step.column, "|" + std::to_string(step.id) + "| " + step.op + ": " + message});
      failed.insert(step.id);
    };

    const OperationSignature* sig = registry.find(step.op);
    if (!sig) {
      try {
        registry.signature_of(step.op);
      } catch (const Error& e) {
        error(e.what());
      }
      continue;
    }

    std::vector<TypeSet> arg_types;
    bool upstream_failed = false;
    for (const auto& a : step.args) {
      if (auto ref = std::get_if<StepRef>(&a)) {
        auto it = out.types.find(ref->id);
        if (it == out.types.end()) {
          upstream_failed = true;
          break;
        }
        arg_types.push_back(it->second.effective_types());
      } else {
        arg_types.push_back(literal_types(a));
      }
    }
    if (upstream_failed) {
      failed.insert(step.id);
      continue;
    }

    SlotMatch match = match_slots(*sig, arg_types);
    if (match.error) {
      error(*match.error);
      continue;
    }

    TypedValue value;
    value.origin = step.id;
    value.types = sig->output_types();
    for (const auto& a : step.args) {
      if (auto ref = std::get_if<StepRef>(&a)) {
        const auto& t = out.types.at(ref->id);
        if (t.entity_context) {
          value.entity_context = t.entity_context;
          break;
        }
      }
    }

    if (step.op == "retrieve_entity") {
      const auto* name = std::get_if<StringLit>(&step.args[0]);
      if (!name) {
        error("entity name must be a string");
        continue;
      }
      if (auto ret = parse_pseudo_entity(name->text)) {
        const PlanStep* r = plan.step(*ret);
        if (!r || r->op != "return" || *ret >= step.id) {
          error("\"" + name->text + "\" does not name an earlier return step");
          continue;
        }
      } else if (!labeling.entity(name->text)) {
        error("unknown entity \"" + name->text + "\"");
        continue;
      }
      value.entity_context = name->text;
    } else if (step.op == "retrieve_attribute") {
      const auto* ref = std::get_if<StepRef>(&step.args[0]);
      const auto* name = std::get_if<StringLit>(&step.args[1]);
      const PlanStep* source = ref ? plan.step(ref->id) : nullptr;
      if (!source || source->op != "retrieve_entity" || !name) {
        error("expects a retrieve_entity step and an attribute name");
        continue;
      }
      const std::string& entity = *out.types.at(ref->id).entity_context;
      value.entity_context = entity;
      value.attribute_like = true;
      if (auto ret = parse_pseudo_entity(entity)) {
        const PlanStep& r = plan.step_or_throw(*ret);
        const auto* collect_ref = std::get_if<StepRef>(&r.args[0]);
        if (!collect_ref || out.types.count(collect_ref->id) == 0) {
          failed.insert(step.id);
          continue;
        }
        auto labels = collected_labels(plan, collect_ref->id);
        auto it = std::find(labels.begin(), labels.end(), name->text);
        if (it == labels.end()) {
          error("\"" + name->text + "\" is not collected by return step |" + std::to_string(*ret) + "|");
          continue;
        }
        const PlanStep& collect = plan.step_or_throw(collect_ref->id);
        const auto& item = collect.args[static_cast<std::size_t>(it - labels.begin())];
        value.types = out.types.at(std::get<StepRef>(item).id).types;
      } else {
        const EntityDef& e = labeling.entity_or_throw(entity);
        const AttributeDef* attr = e.attribute(name->text);
        if (!attr) {
          error("entity \"" + entity + "\" has no attribute \"" + name->text + "\"");
          continue;
        }
        value.types = attr->types;
        value.attribute_ref = AttributeBinding{entity, attr->name};
      }
    } else if (step.op == "sort") {
      const auto* dir = std::get_if<StringLit>(&step.args.back());
      if (!dir || (dir->text != "asc" && dir->text != "desc")) {
        error("sort direction must be \"asc\" or \"desc\"");
        continue;
      }
    } else if (step.op == "limit") {
      const auto* n = std::get_if<NumberLit>(&step.args[0]);
      if (!n || n->value < 1 || n->value != std::floor(n->value)) {
        error("limit expects a positive integer count");
        continue;
      }
    } else if (step.op == "return") {
      const auto* ref = std::get_if<StepRef>(&step.args[0]);
      if (!ref || plan.step_or_throw(ref->id).op != "collect") {
        error("first argument must be a collect step");
        continue;
      }
    } else if (sig->category == OperationCategory::Aggregation || sig->category == OperationCategory::Arithmetic ||
               sig->category == OperationCategory::Boolean) {
      value.attribute_like = true;
    }

    out.types.emplace(step.id, std::move(value));
    out.arg_slots.emplace(step.id, std::move(match.slot_of_arg));
  }

  if (!errors.empty()) throw PlanError(ErrorCode::Type, std::move(errors));

  std::set<int> live;
  for (int r : plan.returns) {
    auto reach = reachable_from(plan, r);
    live.insert(reach.begin(), reach.end());
  }
  if (!plan.returns.empty()) {
    for (const auto& s : plan.steps) {
      if (!live.count(s.id)) out.warnings.push_back({s.id, s.line, s.column, "step |" + std::to_string(s.id) + "| is not used by any return"});
    }
  }
  return out;
}

std::vector<Subplan> split_subplans(const CheckedPlan& checked, std::vector<Diagnostic>* warnings) {
  const PlanGraph& plan = checked.plan;
  std::vector<Subplan> out;
  std::map<int, int> owner;
  std::vector<Diagnostic> errors;
  for (int r : plan.returns) {
    Subplan sp;
    sp.return_step = r;
    auto reach = reachable_from(plan, r);
    sp.steps.assign(reach.begin(), reach.end());
    for (int id : sp.steps) {
      auto [it, inserted] = owner.emplace(id, r);
      if (!inserted) {
        const PlanStep& s = plan.step_or_throw(id);
        errors.push_back({id, s.line, s.column,
                          "step |" + std::to_string(id) + "| is shared by the subplans of returns |" +
                              std::to_string(it->second) + "| and |" + std::to_string(r) + "|"});
      }
      const PlanStep& s = plan.step_or_throw(id);
      if (s.op != "retrieve_attribute") continue;
      const auto& entity = checked.types.count(id) ? checked.types.at(id).entity_context : std::nullopt;
      auto dep = entity ? parse_pseudo_entity(*entity) : std::nullopt;
      if (!dep) continue;
      const PlanStep& ret = plan.step_or_throw(*dep);
      auto labels = collected_labels(plan, std::get<StepRef>(ret.args[0]).id);
      const auto& name = std::get<StringLit>(s.args[1]).text;
      if (std::find(labels.begin(), labels.end(), name) == labels.end()) {
        errors.push_back({id, s.line, s.column, "\"" + name + "\" is not collected by any earlier subplan"});
      }
      if (std::find(sp.depends_on.begin(), sp.depends_on.end(), *dep) == sp.depends_on.end()) {
        sp.depends_on.push_back(*dep);
      }
    }
    std::sort(sp.depends_on.begin(), sp.depends_on.end());
    out.push_back(std::move(sp));
  }
  if (!errors.empty()) throw PlanError(ErrorCode::Type, std::move(errors));
  if (warnings) {
    for (const auto& s : plan.steps) {
      if (!owner.count(s.id)) warnings->push_back({s.id, s.line, s.column, "step |" + std::to_string(s.id) + "| belongs to no subplan"});
    }
  }
  return out;
}

}  // namespace infospace
