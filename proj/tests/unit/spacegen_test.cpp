// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "infospace/compiler.hpp"
#include "infospace/error.hpp"
#include "infospace/questions.hpp"
#include "infospace/spacegen.hpp"
#include "test_support.hpp"

using namespace infospace;
using namespace infospace::testing;

namespace {

const OperationRegistry& reg() { return OperationRegistry::builtin(); }

struct Toy {
  DomainLabeling labeling;
  std::string db_path;
};

Toy make_toy(bool with_visits = true) {
  Toy t{parse_labeling(toy_labeling_document()), scratch_dir("toy") + "/toy.db"};
  create_database(t.db_path, toy_seed_sql(with_visits));
  return t;
}

std::vector<GeneratedQuestion> generate(const std::string& domain, const GenerationCaps& caps = {},
                                        GenerationReport* report = nullptr) {
  auto db = Database::open_readonly(fixture(domain).database);
  return enumerate_plans(fixture_labeling_of(domain), reg(), builtin_templates(), db, caps, report);
}

}  // namespace

TEST(Spacegen, BuiltinTemplatesAreWellFormed) {
  std::vector<std::string> ids;
  for (const auto& t : builtin_templates()) {
    EXPECT_NO_THROW(validate_template(t)) << t.id;
    ids.push_back(t.id);
  }
  EXPECT_EQ(ids, (std::vector<std::string>{"T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8"}));
}

TEST(Spacegen, TemplateValidationErrors) {
  auto t = toy_template({"sum"});
  t.skeleton += "|8| exact(|3|, \"{X}\")\n";
  EXPECT_THROW(validate_template(t), ConfigError);

  t = toy_template({"sum"});
  EntitySlot unused;
  unused.name = "Unused";
  t.slots.push_back(unused);
  EXPECT_THROW(validate_template(t), ConfigError);

  t = toy_template({"sum"});
  std::get<AttributeSlot>(t.slots[1]).entity = "G";
  EXPECT_THROW(validate_template(t), ConfigError);

  t = toy_template({"sum"});
  std::swap(t.slots[0], t.slots[1]);  // attribute slot before its entity
  EXPECT_THROW(validate_template(t), ConfigError);
}

TEST(Spacegen, ToyEnumerationMatchesBruteForce) {
  auto toy = make_toy();
  auto db = Database::open_readonly(toy.db_path);
  for (const auto& ops : std::vector<std::vector<std::string>>{
           {"sum", "average", "max"}, {"sum"}, {"median", "count", "min"}, {"standard_deviation", "get_one"}}) {
    SCOPED_TRACE(ops.front());
    GenerationReport report;
    auto out = enumerate_plans(toy.labeling, reg(), {toy_template(ops)}, db, {}, &report);
    EXPECT_EQ(out.size(), brute_force_fillings(toy.labeling, reg(), ops));
    EXPECT_GT(out.size(), 0u);
    std::set<std::string> ids;
    for (const auto& q : out) {
      EXPECT_NO_THROW(check_plan(q.plan, reg(), toy.labeling)) << render_text(q.plan);
      EXPECT_TRUE(ids.insert(q.question_id).second);
      EXPECT_EQ(q.template_id, "toy");
    }
    ASSERT_EQ(report.templates.size(), 1u);
    EXPECT_EQ(report.templates[0].emitted, out.size());
  }
  // sum accepts only Arithmetic: rating (Metric only) never appears under it.
  auto sums = enumerate_plans(toy.labeling, reg(), {toy_template({"sum"})}, db);
  for (const auto& q : sums) EXPECT_EQ(render_text(q.plan).find("\"rating\""), std::string::npos);
}

TEST(Spacegen, MetricSlotOnEntityWithoutMetricsYieldsNothing) {
  auto doc = nlohmann::json::parse(toy_labeling_document());
  auto& shop = doc["dataAbstraction"]["entities"][0];
  nlohmann::json kept = nlohmann::json::array();
  for (const auto& a : shop["attributes"]) {
    if (a["name"] == "region" || a["name"] == "opened") kept.push_back(a);
  }
  shop["attributes"] = kept;
  doc["dataAbstraction"]["entities"].erase(1);
  doc["dataAbstraction"]["relationships"] = nlohmann::json::array();
  auto l = parse_labeling(doc.dump());
  auto toy = make_toy();
  auto db = Database::open_readonly(toy.db_path);
  EXPECT_TRUE(enumerate_plans(l, reg(), {toy_template({"sum", "average", "max"})}, db).empty());
  EXPECT_EQ(brute_force_fillings(l, reg(), {"sum", "average", "max"}), 0u);
}

TEST(Spacegen, HarvestDistinctSortedValues) {
  auto db = Database::open_readonly(fixture("legal").database);
  const auto& l = fixture_labeling_of("legal");
  auto got = harvest_instances(db, l, {"Judge", "name"}, 200);
  auto oracle = db.query("SELECT DISTINCT name FROM judges WHERE name IS NOT NULL ORDER BY name", {}, 1000);
  ASSERT_EQ(got.values.size(), oracle.rows.size());
  for (std::size_t i = 0; i < got.values.size(); ++i) EXPECT_EQ(got.values[i], oracle.rows[i][0]);
  EXPECT_FALSE(got.truncated);

  auto one = harvest_instances(db, l, {"Judge", "name"}, 1);
  ASSERT_EQ(one.values.size(), 1u);
  EXPECT_EQ(one.values[0], oracle.rows[0][0]);
  EXPECT_TRUE(one.truncated);

  EXPECT_THROW(harvest_instances(db, l, {"Case", "duration"}, 10), Error);
}

TEST(Spacegen, HarvestFromEmptyTable) {
  auto toy = make_toy(false);
  auto db = Database::open_readonly(toy.db_path);
  auto got = harvest_instances(db, toy.labeling, {"Visit", "kind"}, 200);
  EXPECT_TRUE(got.values.empty());
  EXPECT_FALSE(got.truncated);
}

TEST(Spacegen, WordTokens) {
  auto tokens = word_tokens({std::string("Handgun, semi-auto"), std::string("Rifle"), std::string("a handgun"),
                             std::int64_t{42}});
  EXPECT_EQ(tokens, (std::vector<std::string>{"auto", "handgun", "rifle", "semi"}));
}

TEST(Spacegen, QuestionIdIsStableHex) {
  auto a = question_id("legal", "|1| retrieve_entity(\"Case\")\n");
  EXPECT_EQ(a.size(), 16u);
  EXPECT_EQ(a.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(a, question_id("legal", "|1| retrieve_entity(\"Case\")\n"));
  EXPECT_NE(a, question_id("other", "|1| retrieve_entity(\"Case\")\n"));
}

TEST(Spacegen, EmittedPlansCheckCompileAndRender) {
  for (const auto& f : fixtures()) {
    SCOPED_TRACE(f.name);
    const auto& l = fixture_labeling_of(f.name);
    auto out = generate(f.name);
    EXPECT_FALSE(out.empty());
    std::set<std::string> ids;
    for (const auto& q : out) {
      auto prepared = prepare_plan(q.plan, reg(), l);
      EXPECT_EQ(q.question_text, render_question(prepared.checked, l, reg()));
      EXPECT_EQ(q.question_id, question_id(l.id, render_text(q.plan)));
      EXPECT_EQ(render_text(q.plan), render_text(renumbered(q.plan)));
      EXPECT_TRUE(ids.insert(q.question_id).second) << q.question_text;
      for (const auto& s : q.plan.steps) EXPECT_FALSE(reg().signature_of(s.op).language_template.empty()) << s.op;
    }
  }
}

TEST(Spacegen, EnumerationIsDeterministic) {
  auto a = generate("legal");
  auto b = generate("legal");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].question_id, b[i].question_id);
    ASSERT_EQ(a[i].question_text, b[i].question_text);
  }
}

TEST(Spacegen, IdsSurviveUnrelatedLabelingEdit) {
  auto before = generate("legal");
  auto doc = nlohmann::json::parse(fixture_labeling("legal"));
  doc["description"] = "edited";
  doc["dataAbstraction"]["entities"].push_back(nlohmann::json::parse(R"({
    "name": "CaseKind", "nicename": "Case Kind", "primaryTable": "case_type",
    "attributes": [{"name": "label", "nicename": "Kind", "type": "text", "isa": ["Categorical"],
                    "source": {"table": "case_type", "column": "label"}}]})"));
  auto edited = parse_labeling(doc.dump());
  auto db = Database::open_readonly(fixture("legal").database);
  auto after = enumerate_plans(edited, reg(), builtin_templates(), db);
  std::set<std::string> ids;
  for (const auto& q : after) ids.insert(q.question_id);
  for (const auto& q : before) EXPECT_TRUE(ids.count(q.question_id)) << q.question_text;
}

TEST(Spacegen, PerTemplateCap) {
  GenerationReport report;
  auto out = generate("legal", GenerationCaps{5, 200}, &report);
  std::map<std::string, std::size_t> per;
  for (const auto& q : out) per[q.template_id]++;
  for (const auto& [id, n] : per) EXPECT_LE(n, 5u) << id;
  bool any_capped = false;
  for (const auto& t : report.templates) any_capped = any_capped || t.capped;
  EXPECT_TRUE(any_capped);
  EXPECT_EQ(report.total(), out.size());
}

TEST(Spacegen, InstanceCapTruncatesFilters) {
  GenerationReport full_report, capped_report;
  auto full = generate("legal", {}, &full_report);
  auto capped = generate("legal", GenerationCaps{50000, 1}, &capped_report);
  EXPECT_LT(capped.size(), full.size());
  bool truncated = false;
  for (const auto& t : capped_report.templates) truncated = truncated || t.instances_truncated;
  EXPECT_TRUE(truncated);
}

TEST(Spacegen, LegalSpaceContainsWorkedQuestions) {
  std::set<std::string> texts;
  for (const auto& q : generate("legal")) texts.insert(q.question_text);
  EXPECT_TRUE(texts.count("What is the average case duration grouped by case type?"));
  EXPECT_TRUE(texts.count("What is the average case duration grouped by year for name of colleen kollar-kotelly?"));
  EXPECT_TRUE(texts.count("What is the max case duration grouped by case type?"));
  // duration is Metric only, so it is never summed.
  for (const auto& t : texts) EXPECT_EQ(t.find("sum of case duration"), std::string::npos) << t;
}
