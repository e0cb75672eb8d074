// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <deque>
#include <filesystem>
#include <json.hpp>
#include <set>

#include "infospace/database.hpp"
#include "infospace/error.hpp"
#include "infospace/labeling.hpp"
#include "test_support.hpp"

using namespace infospace;
using namespace infospace::testing;
using nlohmann::json;

namespace {

json fixture_doc(const std::string& name) { return json::parse(fixture_labeling(name)); }

std::string expect_config_error(const json& doc) {
  try {
    parse_labeling(doc.dump());
  } catch (const ConfigError& e) {
    return e.path();
  }
  ADD_FAILURE() << "expected ConfigError";
  return "";
}

// A - B - C over three tables, one relationship per hop.
json chain_doc() {
  auto table = [](const std::string& name, std::vector<std::string> extra) {
    json cols = json::array({{{"name", "id"}, {"type", "integer"}}, {{"name", "label"}, {"type", "text"}}});
    for (auto& c : extra) cols.push_back({{"name", c}, {"type", "integer"}});
    return json{{"name", name}, {"primaryKey", "id"}, {"columns", cols}};
  };
  auto entity = [](const std::string& name, const std::string& table) {
    return json{{"name", name},
                {"nicename", name},
                {"primaryTable", table},
                {"attributes",
                 json::array({{{"name", "label"},
                               {"nicename", name + " Label"},
                               {"type", "text"},
                               {"isa", {"Categorical"}},
                               {"source", {{"table", table}, {"column", "label"}}}}})}};
  };
  return json{
      {"id", "chain"},
      {"name", "Chain"},
      {"description", "three entities in a row"},
      {"dataSource",
       {{"tables", json::array({table("ta", {}), table("tb", {"a_id"}), table("tc", {"b_id"})})},
        {"joins", json::array({{{"name", "ta_tb"}, {"from", "ta"}, {"to", "tb"}, {"on", json::array({json::array({"id", "a_id"})})}},
                               {{"name", "tb_tc"}, {"from", "tb"}, {"to", "tc"}, {"on", json::array({json::array({"id", "b_id"})})}}})}}},
      {"dataAbstraction",
       {{"entities", json::array({entity("A", "ta"), entity("B", "tb"), entity("C", "tc")})},
        {"relationships",
         json::array({{{"name", "AToB"}, {"from", "A"}, {"to", "B"}, {"relation", "o2m"}, {"joinChain", {"ta_tb"}}},
                      {{"name", "BToC"}, {"from", "B"}, {"to", "C"}, {"relation", "o2m"}, {"joinChain", {"tb_tc"}}}})}}}};
}

// Breadth-first search over the undirected relationship graph, returning
// the relationship count of a shortest path or -1.
int bfs_distance(const DomainLabeling& l, const std::string& a, const std::string& b) {
  std::map<std::string, int> dist{{a, 0}};
  std::deque<std::string> q{a};
  while (!q.empty()) {
    auto cur = q.front();
    q.pop_front();
    if (cur == b) return dist[cur];
    for (const auto& r : l.relationships) {
      for (auto [x, y] : {std::pair{r.from_entity, r.to_entity}, std::pair{r.to_entity, r.from_entity}}) {
        if (x == cur && !dist.count(y)) {
          dist[y] = dist[cur] + 1;
          q.push_back(y);
        }
      }
    }
  }
  return -1;
}

}  // namespace

TEST(Labeling, EmissionsHasOneEntityAndNoRelationships) {
  auto l = parse_labeling(fixture_labeling("emissions"));
  EXPECT_EQ(l.id, "emissions");
  ASSERT_EQ(l.entities.size(), 1u);
  EXPECT_EQ(l.entities[0].name, "CarbonEmission");
  EXPECT_TRUE(l.relationships.empty());
  // Independent walk over the raw document: every attribute source exists.
  auto doc = fixture_doc("emissions");
  std::set<std::pair<std::string, std::string>> columns;
  for (const auto& t : doc["dataSource"]["tables"]) {
    for (const auto& c : t["columns"]) columns.emplace(t["name"].get<std::string>(), c["name"].get<std::string>());
  }
  for (const auto& e : doc["dataAbstraction"]["entities"]) {
    for (const auto& a : e["attributes"]) {
      EXPECT_TRUE(columns.count({a["source"]["table"].get<std::string>(), a["source"]["column"].get<std::string>()}))
          << a.dump();
    }
  }
}

TEST(Labeling, LegalHasManyToManyThroughResolutionTable) {
  auto l = parse_labeling(fixture_labeling("legal"));
  ASSERT_EQ(l.entities.size(), 2u);
  ASSERT_EQ(l.relationships.size(), 1u);
  const auto& r = l.relationships[0];
  EXPECT_EQ(r.cardinality, Cardinality::ManyToMany);
  ASSERT_EQ(r.join_chain.size(), 2u);
  EXPECT_EQ(l.join(r.join_chain[0])->to_table, "judge_on_case");
  EXPECT_EQ(l.join(r.join_chain[1])->from_table, "judge_on_case");
}

TEST(Labeling, RoundTripOnAllFixtures) {
  for (const auto& name : fixture_names()) {
    SCOPED_TRACE(name);
    auto l = parse_labeling(fixture_labeling(name));
    auto text = serialize_labeling(l);
    auto again = parse_labeling(text);
    EXPECT_EQ(again, l);
    EXPECT_EQ(serialize_labeling(again), text);
  }
}

TEST(Labeling, UnknownJoinInRelationshipReportsPath) {
  auto doc = fixture_doc("legal");
  doc["dataAbstraction"]["relationships"][0]["joinChain"][0] = "no_such_join";
  auto path = expect_config_error(doc);
  EXPECT_NE(path.find("relationships[0].joinChain[0]"), std::string::npos) << path;
}

TEST(Labeling, StructuralErrors) {
  auto doc = fixture_doc("emissions");
  doc.erase("dataSource");
  EXPECT_NE(expect_config_error(doc).find(""), std::string::npos);

  doc = fixture_doc("emissions");
  doc["surprise"] = 1;
  expect_config_error(doc);

  doc = fixture_doc("emissions");
  doc["dataAbstraction"]["entities"][0]["attributes"][0]["isa"] = {"Grouping"};
  auto path = expect_config_error(doc);
  EXPECT_NE(path.find("entities[0].attributes[0].isa"), std::string::npos) << path;

  doc = fixture_doc("emissions");
  doc["dataAbstraction"]["entities"][0]["attributes"][0]["source"]["column"] = "nope";
  path = expect_config_error(doc);
  EXPECT_NE(path.find("entities[0].attributes[0].source.column"), std::string::npos) << path;

  doc = fixture_doc("legal");
  doc["dataAbstraction"]["relationships"][0]["joinChain"] = {"judgesTojudge_on_case"};
  path = expect_config_error(doc);
  EXPECT_NE(path.find("relationships[0].joinChain"), std::string::npos) << path;

  EXPECT_THROW(parse_labeling("{not json"), ConfigError);
}

TEST(Labeling, FixturesValidateAgainstTheirDatabases) {
  for (const auto& f : fixtures()) {
    SCOPED_TRACE(f.name);
    auto db = Database::open_readonly(f.database);
    auto report = validate_against_database(fixture_labeling_of(f.name), db);
    EXPECT_TRUE(report.ok) << report.to_string();
    EXPECT_TRUE(report.discrepancies.empty());
  }
}

TEST(Labeling, MisspelledColumnIsADiscrepancyNamingBoth) {
  auto doc = fixture_doc("emissions");
  for (auto& t : doc["dataSource"]["tables"]) {
    for (auto& c : t["columns"]) {
      if (c["name"] == "amount") c["name"] = "amout";
    }
  }
  for (auto& a : doc["dataAbstraction"]["entities"][0]["attributes"]) {
    if (a["source"]["column"] == "amount") a["source"]["column"] = "amout";
  }
  auto l = parse_labeling(doc.dump());
  auto db = Database::open_readonly(fixture("emissions").database);
  auto report = validate_against_database(l, db);
  EXPECT_FALSE(report.ok);
  ASSERT_EQ(report.discrepancies.size(), 1u);
  EXPECT_EQ(report.discrepancies[0].column, "amout");
  EXPECT_NE(report.discrepancies[0].message.find("amout"), std::string::npos);
  EXPECT_NE(report.discrepancies[0].message.find("amount"), std::string::npos);
}

TEST(Labeling, EmptyLabelingWarnsNoEntities) {
  json doc = {{"id", "empty"},
              {"name", "Empty"},
              {"description", ""},
              {"dataSource", {{"tables", json::array()}, {"joins", json::array()}}},
              {"dataAbstraction", {{"entities", json::array()}, {"relationships", json::array()}}}};
  auto l = parse_labeling(doc.dump());
  auto db = Database::open_readonly(fixture("emissions").database);
  auto report = validate_against_database(l, db);
  EXPECT_TRUE(report.ok);
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_EQ(report.warnings[0], "no entities");
}

TEST(Labeling, AttributesOfType) {
  const auto& l = fixture_labeling_of("legal");
  auto metrics = attributes_of_type(l, "Case", TypeSet{AttributeType::Metric});
  ASSERT_EQ(metrics.size(), 1u);
  EXPECT_EQ(metrics[0]->name, "duration");

  EXPECT_THROW(attributes_of_type(l, "Case", TypeSet{}), Error);
  EXPECT_THROW(attributes_of_type(l, "Nope", TypeSet{AttributeType::Metric}), NotFoundError);

  // Linear-scan oracle over every entity and every single base type.
  for (const auto& name : fixture_names()) {
    const auto& fl = fixture_labeling_of(name);
    for (const auto& e : fl.entities) {
      for (int t = 0; t < kBaseTypeCount; ++t) {
        TypeSet wanted{static_cast<AttributeType>(t)};
        std::vector<std::string> expected;
        for (const auto& a : e.attributes) {
          if (a.types.contains(static_cast<AttributeType>(t))) expected.push_back(a.name);
        }
        std::vector<std::string> got;
        for (const auto* a : attributes_of_type(fl, e.name, wanted)) {
          EXPECT_TRUE(a->types.intersects(wanted));
          got.push_back(a->name);
        }
        EXPECT_EQ(got, expected) << name << "." << e.name;
      }
    }
  }
  auto cats = attributes_of_type(l, "Judge", TypeSet{AttributeType::Categorical});
  ASSERT_EQ(cats.size(), 1u);
  EXPECT_EQ(cats[0]->name, "gender");
}

TEST(Labeling, RelationshipPathOnLegal) {
  const auto& l = fixture_labeling_of("legal");
  auto p = relationship_path(l, "Judge", "Case");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0]->name, "CaseToJudge");
  EXPECT_TRUE(relationship_path(l, "Case", "Case").empty());
  EXPECT_EQ(static_cast<int>(p.size()), bfs_distance(l, "Judge", "Case"));
}

TEST(Labeling, RelationshipPathThroughThreeEntityChain) {
  auto l = parse_labeling(chain_doc().dump());
  auto ac = relationship_path(l, "A", "C");
  ASSERT_EQ(ac.size(), 2u);
  EXPECT_EQ(ac[0]->name, "AToB");
  EXPECT_EQ(ac[1]->name, "BToC");
  EXPECT_EQ(static_cast<int>(ac.size()), bfs_distance(l, "A", "C"));

  for (const char* a : {"A", "B", "C"}) {
    for (const char* b : {"A", "B", "C"}) {
      auto ab = relationship_path(l, a, b);
      auto ba = relationship_path(l, b, a);
      std::reverse(ba.begin(), ba.end());
      EXPECT_EQ(ab, ba) << a << "->" << b;
      EXPECT_EQ(static_cast<int>(ab.size()), bfs_distance(l, a, b));
    }
  }
}

TEST(Labeling, DisconnectedEntitiesHaveNoPath) {
  auto doc = chain_doc();
  doc["dataAbstraction"]["relationships"].erase(1);
  auto l = parse_labeling(doc.dump());
  EXPECT_THROW(relationship_path(l, "A", "C"), Error);
}

TEST(Labeling, DisplayNameFallsBackToColumnStyleName) {
  AttributeDef a;
  a.name = "heart_rate";
  EXPECT_EQ(a.display_name(), "heart rate");
  a.nicename = "Heart Rate";
  EXPECT_EQ(a.display_name(), "Heart Rate");
}
