// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "infospace/compiler.hpp"
#include "infospace/error.hpp"
#include "infospace/fixtures.hpp"
#include "test_support.hpp"

using namespace infospace;
using namespace infospace::testing;

namespace {

const OperationRegistry& reg() { return OperationRegistry::builtin(); }

CompiledQuery compile_text(const std::string& domain, const std::string& text, const Dialect& d = Dialect::sqlite()) {
  return prepare_plan(parse_plan(text), reg(), fixture_labeling_of(domain), d).query;
}

std::vector<std::pair<std::string, ManifestEntry>> all_manifest_entries() {
  std::vector<std::pair<std::string, ManifestEntry>> out;
  for (const auto& name : fixture_names()) {
    for (auto& e : parse_manifest(fixture_manifest(name))) out.emplace_back(name, std::move(e));
  }
  return out;
}

void expect_join_invariants(const JoinPlan& jp) {
  std::set<std::string> present{jp.root_table};
  for (const auto& j : jp.joins) {
    EXPECT_TRUE(present.count(j.joined_from)) << j.table << " attaches to " << j.joined_from;
    EXPECT_TRUE(present.insert(j.table).second) << j.table << " joined twice";
    for (const auto& [a, b] : j.on) {
      EXPECT_TRUE((a.table == j.table && b.table == j.joined_from) || (b.table == j.table && a.table == j.joined_from));
    }
  }
}

int placeholders(const std::string& sql) {
  int n = 0;
  bool in_string = false;
  for (char c : sql) {
    if (c == '\'') in_string = !in_string;
    if (c == '?' && !in_string) ++n;
  }
  return n;
}

}  // namespace

TEST(Compiler, CarbonPlanLowersToParameterizedGroupedQuery) {
  auto q = compile_text("emissions", parse_manifest(fixture_manifest("emissions")).at(0).plan);
  EXPECT_EQ(q.sql_text,
            "SELECT \"emissions\".\"year\" AS \"year\", AVG(\"emissions\".\"amount\") AS \"average_amount\" FROM "
            "\"emissions\" WHERE (\"emissions\".\"country\" = ?) GROUP BY \"emissions\".\"year\" ORDER BY "
            "\"emissions\".\"year\" ASC");
  ASSERT_EQ(q.params.size(), 1u);
  EXPECT_EQ(q.params[0], Scalar(std::string("United States of America")));
  ASSERT_EQ(q.columns.size(), 2u);
  EXPECT_EQ(q.columns[0].label, "year");
  EXPECT_EQ(q.columns[1].label, "average_amount");
  EXPECT_EQ(q.columns[1].types, (TypeSet{AttributeType::Arithmetic, AttributeType::Metric}));
  EXPECT_EQ(describe(q), q.sql_text + "\nparams: [\"United States of America\"]\n");
}

TEST(Compiler, PassThroughQueryHasNoAggregates) {
  auto q = compile_text("legal",
                        "|1| retrieve_entity(\"Case\")\n|2| retrieve_attribute(|1|, \"case_name\")\n"
                        "|3| retrieve_attribute(|1|, \"year\")\n|4| collect(|2|, |3|)\n|5| return(|4|)");
  EXPECT_EQ(q.sql_text.rfind("SELECT ", 0), 0u);
  for (const char* kw : {"GROUP BY", "HAVING", "AVG(", "COUNT(", "JOIN", "WHERE", "ORDER BY", "LIMIT"}) {
    EXPECT_EQ(q.sql_text.find(kw), std::string::npos) << kw;
  }
  EXPECT_TRUE(q.params.empty());
  EXPECT_TRUE(q.post_aggregation.empty());
}

TEST(Compiler, FilterOnAggregateBecomesHaving) {
  for (const auto& e : parse_manifest(fixture_manifest("emissions"))) {
    if (e.name != "high_average_years") continue;
    auto q = compile_text("emissions", e.plan);
    auto having = q.sql_text.find("HAVING");
    ASSERT_NE(having, std::string::npos) << q.sql_text;
    EXPECT_GT(having, q.sql_text.find("GROUP BY"));
    EXPECT_EQ(q.sql_text.find("WHERE"), std::string::npos);
    return;
  }
  FAIL() << "manifest entry missing";
}

TEST(Compiler, CompilationIsDeterministicAndParameterized) {
  for (const auto& [domain, e] : all_manifest_entries()) {
    SCOPED_TRACE(e.name);
    auto plan = parse_plan(e.plan);
    auto a = compile_text(domain, e.plan);
    auto b = compile_text(domain, e.plan);
    EXPECT_EQ(a.sql_text, b.sql_text);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(placeholders(a.sql_text), static_cast<int>(a.params.size()));
    std::set<std::string> labels;
    for (const auto& c : a.columns) EXPECT_TRUE(labels.insert(c.label).second) << c.label;
    for (const auto& s : plan.steps) {
      if (s.op == "retrieve_entity" || s.op == "retrieve_attribute" || s.op == "sort") continue;
      for (const auto& arg : s.args) {
        if (auto str = std::get_if<StringLit>(&arg)) {
          EXPECT_EQ(a.sql_text.find(str->text), std::string::npos) << "literal \"" << str->text << "\" spliced";
        }
      }
    }
  }
}

TEST(Compiler, OnlyTablesOfUsedEntitiesAppear) {
  const auto& l = fixture_labeling_of("legal");
  auto q = compile_text("legal",
                        "|1| retrieve_entity(\"Case\")\n|2| retrieve_attribute(|1|, \"duration\")\n"
                        "|3| average(|2|)\n|4| collect(|3|)\n|5| return(|4|)");
  EXPECT_EQ(q.sql_text.find("\"judges\""), std::string::npos);
  EXPECT_EQ(q.sql_text.find("\"judge_on_case\""), std::string::npos);
  EXPECT_EQ(q.sql_text.find("\"case_type\""), std::string::npos);
  (void)l;
}

TEST(Compiler, SingleEntityNeedsNoJoins) {
  const auto& l = fixture_labeling_of("emissions");
  auto jp = resolve_joins(l, {"CarbonEmission"}, {{"CarbonEmission", "amount"}, {"CarbonEmission", "year"}});
  EXPECT_EQ(jp.root_table, "emissions");
  EXPECT_TRUE(jp.joins.empty());
}

TEST(Compiler, ManyToManyJoinsThroughResolutionTable) {
  const auto& l = fixture_labeling_of("legal");
  auto jp = resolve_joins(l, {"Judge", "Case"}, {{"Judge", "name"}, {"Case", "case_name"}});
  EXPECT_EQ(jp.root_table, "judges");
  ASSERT_EQ(jp.joins.size(), 2u);
  EXPECT_EQ(jp.joins[0].table, "judge_on_case");
  EXPECT_EQ(jp.joins[1].table, "cases");
  EXPECT_EQ(jp.joins[0].provenance, "relationship:CaseToJudge");
  expect_join_invariants(jp);
}

TEST(Compiler, IntraEntityJoinComesBeforeRelationshipJoins) {
  const auto& l = fixture_labeling_of("legal");
  auto jp = resolve_joins(l, {"Case", "Judge"}, {{"Case", "case_type"}, {"Judge", "name"}});
  EXPECT_EQ(jp.root_table, "cases");
  ASSERT_EQ(jp.joins.size(), 3u);
  EXPECT_EQ(jp.joins[0].table, "case_type");
  EXPECT_EQ(jp.joins[0].provenance, "entity:Case");
  EXPECT_EQ(jp.joins[1].provenance, "relationship:CaseToJudge");
  expect_join_invariants(jp);

  // Rooted at the other entity, the intra-entity chain attaches once its
  // table is reachable.
  auto other = resolve_joins(l, {"Judge", "Case"}, {{"Case", "case_type"}, {"Judge", "name"}});
  EXPECT_EQ(other.joins.size(), 3u);
  expect_join_invariants(other);
}

TEST(Compiler, ImplicitJoinRowsMatchExplicitJoinQuery) {
  auto rows = run_plan("legal",
                       "|1| retrieve_entity(\"Judge\")\n|2| retrieve_attribute(|1|, \"gender\")\n"
                       "|3| retrieve_entity(\"Case\")\n|4| retrieve_attribute(|3|, \"case_type\")\n"
                       "|5| retrieve_attribute(|3|, \"duration\")\n|6| collect(|2|, |4|, |5|)\n|7| return(|6|)");
  auto db = Database::open_readonly(fixture("legal").database);
  auto oracle = db.query(
      "SELECT j.gender, t.label, c.duration FROM judges j JOIN judge_on_case jc ON jc.judge_id = j.judge_id "
      "JOIN cases c ON c.case_id = jc.case_id JOIN case_type t ON t.case_type_id = c.case_type_id",
      {}, 100000);
  ASSERT_GT(oracle.rows.size(), 0u);
  EXPECT_EQ(compare_rows(rows_to_json(rows.rows), rows_to_json(oracle.rows), false), "");
}

TEST(Compiler, DivideByLiteralZeroIsRejected) {
  auto text = "|1| retrieve_entity(\"CarbonEmission\")\n|2| retrieve_attribute(|1|, \"amount\")\n"
              "|3| divide(|2|, 0)\n|4| collect(|3|)\n|5| return(|4|)";
  try {
    compile_text("emissions", text);
    FAIL() << "expected CompileError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Compile);
  }
  EXPECT_THROW(lower_operation("divide", {{"x", {}}, {"?", {std::int64_t{0}}}}, Dialect::sqlite(), {false, true}),
               CompileError);
  EXPECT_NO_THROW(lower_operation("divide", {{"x", {}}, {"?", {std::int64_t{2}}}}, Dialect::sqlite(), {false, true}));
}

TEST(Compiler, LoweringTable) {
  auto d = Dialect::sqlite();
  SqlFragment x{"x", {}};
  SqlFragment y{"y", {}};
  EXPECT_EQ(lower_operation("count", {x}, d).text, "COUNT(x)");
  EXPECT_EQ(lower_operation("count_unique", {x}, d).text, "COUNT(DISTINCT x)");
  EXPECT_EQ(lower_operation("sum", {x}, d).text, "SUM(x)");
  EXPECT_EQ(lower_operation("average", {x}, d).text, "AVG(x)");
  EXPECT_EQ(lower_operation("max", {x}, d).text, "MAX(x)");
  EXPECT_EQ(lower_operation("min", {x}, d).text, "MIN(x)");
  EXPECT_EQ(lower_operation("get_one", {x}, d).text, "MIN(x)");
  EXPECT_NE(lower_operation("exact", {x, {"?", {std::string("v")}}}, d).text.find("="), std::string::npos);
  auto contains = lower_operation("contains", {x, {"?", {std::string("HandGun")}}}, d, {false, true});
  EXPECT_NE(contains.text.find("LOWER"), std::string::npos);
  ASSERT_EQ(contains.params.size(), 1u);
  EXPECT_EQ(contains.params[0], Scalar(std::string("%handgun%")));
  for (const auto& [op, sym] : std::vector<std::pair<std::string, std::string>>{
           {"greaterthan", ">"}, {"greaterthan_eq", ">="}, {"lessthan", "<"}, {"lessthan_eq", "<="}}) {
    EXPECT_NE(lower_operation(op, {x, y}, d).text.find(" " + sym + " "), std::string::npos) << op;
  }
  for (const auto& op : {"median", "correlation", "standard_deviation", "string_aggregation", "square_root", "add",
                         "subtract", "multiply", "divide", "percent_change", "and", "or", "not"}) {
    EXPECT_TRUE(has_lowering(op)) << op;
  }
  EXPECT_FALSE(has_lowering("collect"));
  EXPECT_THROW(lower_operation("no_such_op", {x}, d), Error);
}

TEST(Compiler, ContainsMatchesCaseInsensitively) {
  auto lower = run_plan("incidents",
                        "|1| retrieve_entity(\"Incident\")\n|2| retrieve_attribute(|1|, \"incident_id\")\n"
                        "|3| retrieve_attribute(|1|, \"weapon_type\")\n|4| contains(|3|, \"handgun\")\n"
                        "|5| count_unique(|2|)\n|6| collect(|5|)\n|7| return(|6|, |4|)");
  auto upper = run_plan("incidents",
                        "|1| retrieve_entity(\"Incident\")\n|2| retrieve_attribute(|1|, \"incident_id\")\n"
                        "|3| retrieve_attribute(|1|, \"weapon_type\")\n|4| contains(|3|, \"HANDGUN\")\n"
                        "|5| count_unique(|2|)\n|6| collect(|5|)\n|7| return(|6|, |4|)");
  EXPECT_EQ(lower.rows, upper.rows);
  auto db = Database::open_readonly(fixture("incidents").database);
  auto oracle = db.query("SELECT COUNT(DISTINCT incident_id) FROM incidents WHERE instr(lower(weapon_type), 'handgun') > 0",
                         {}, 10);
  EXPECT_EQ(compare_rows(rows_to_json(lower.rows), rows_to_json(oracle.rows), true), "");
}

TEST(Compiler, PercentChangeOfEqualValuesIsZero) {
  auto t = run_plan("emissions",
                    "|1| retrieve_entity(\"CarbonEmission\")\n|2| retrieve_attribute(|1|, \"amount\")\n"
                    "|3| percent_change(|2|, |2|)\n|4| collect(|3|)\n|5| return(|4|)");
  ASSERT_EQ(t.rows.size(), 30u);
  for (const auto& r : t.rows) EXPECT_EQ(scalar_to_json(r[0]), 0.0);
}

TEST(Compiler, PercentChangeFollowsDefinition) {
  auto t = run_plan("education",
                    "|1| retrieve_entity(\"School\")\n|2| retrieve_attribute(|1|, \"enrollment\")\n"
                    "|3| retrieve_attribute(|1|, \"expenditure\")\n|4| percent_change(|2|, |3|)\n"
                    "|5| collect(|2|, |3|, |4|)\n|6| return(|5|)");
  ASSERT_FALSE(t.rows.empty());
  for (const auto& r : t.rows) {
    double a = scalar_to_json(r[0]).get<double>();
    double b = scalar_to_json(r[1]).get<double>();
    EXPECT_NEAR(scalar_to_json(r[2]).get<double>(), 100.0 * (b - a) / a, 1e-9);
  }
}

TEST(Compiler, RuntimeDivisionByZeroYieldsNull) {
  auto t = run_plan("emissions",
                    "|1| retrieve_entity(\"CarbonEmission\")\n|2| retrieve_attribute(|1|, \"amount\")\n"
                    "|3| subtract(|2|, |2|)\n|4| divide(|2|, |3|)\n|5| collect(|4|)\n|6| return(|5|)");
  ASSERT_EQ(t.rows.size(), 30u);
  for (const auto& r : t.rows) EXPECT_TRUE(is_null(r[0]));
}

TEST(Compiler, UnconnectedEntitiesFailToCompile) {
  // Two retrievals of unrelated entities cannot share one row source.
  auto doc = nlohmann::json::parse(fixture_labeling("legal"));
  doc["dataAbstraction"]["relationships"] = nlohmann::json::array();
  auto l = parse_labeling(doc.dump());
  EXPECT_THROW(resolve_joins(l, {"Judge", "Case"}, {{"Judge", "name"}, {"Case", "case_name"}}), CompileError);
}
