// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>

#include "infospace/error.hpp"
#include "infospace/fixtures.hpp"
#include "test_support.hpp"

using namespace infospace;
using namespace infospace::testing;
namespace fs = std::filesystem;

TEST(Fixtures, NamesAndLookup) {
  auto names = fixture_names();
  EXPECT_EQ(names, (std::vector<std::string>{"emissions", "legal", "incidents", "healthcare", "housing", "education"}));
  EXPECT_THROW(fixture_labeling("nope"), NotFoundError);
  EXPECT_THROW(fixture_seed("nope"), NotFoundError);
  EXPECT_THROW(fixture_manifest("nope"), NotFoundError);
}

TEST(Fixtures, BuildWritesEveryFile) {
  for (const auto& f : fixtures()) {
    SCOPED_TRACE(f.name);
    for (const auto& p : {f.labeling, f.database, f.manifest}) EXPECT_TRUE(fs::is_regular_file(p)) << p;
    EXPECT_TRUE(fs::is_regular_file(f.dir + "/seed.sql"));
    EXPECT_EQ(read_file(f.labeling), fixture_labeling(f.name));
    EXPECT_EQ(read_file(f.manifest), fixture_manifest(f.name));
  }
}

TEST(Fixtures, SeedIsDeterministic) {
  auto a = build_fixtures(scratch_dir("fx-a"));
  auto b = build_fixtures(scratch_dir("fx-b"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto da = Database::open_readonly(a[i].database);
    auto db = Database::open_readonly(b[i].database);
    for (const auto& t : fixture_labeling_of(a[i].name).data_source.tables) {
      auto sql = "SELECT * FROM \"" + t.name + "\" ORDER BY 1";
      EXPECT_EQ(da.query(sql, {}, 100000).rows, db.query(sql, {}, 100000).rows) << a[i].name << "." << t.name;
    }
  }
}

TEST(Fixtures, TablesStayDeskScale) {
  for (const auto& f : fixtures()) {
    auto db = Database::open_readonly(f.database);
    for (const auto& t : fixture_labeling_of(f.name).data_source.tables) {
      auto n = std::get<std::int64_t>(db.query("SELECT COUNT(*) FROM \"" + t.name + "\"", {}, 1).rows.at(0).at(0));
      EXPECT_GT(n, 0) << f.name << "." << t.name;
      EXPECT_LT(n, 100) << f.name << "." << t.name;
    }
  }
}

TEST(Fixtures, EmissionsUsa2019AveragesToTen) {
  auto db = Database::open_readonly(fixture("emissions").database);
  auto rows = db.query("SELECT amount FROM emissions WHERE country = 'United States of America' AND year = 2019", {}, 100);
  double sum = 0;
  for (const auto& r : rows.rows) sum += std::get<double>(r[0]);
  ASSERT_EQ(rows.rows.size(), 2u);
  EXPECT_EQ(sum / 2, 10.0);
}

TEST(Fixtures, ManifestRowsAgreeWithDirectSql) {
  std::size_t total = 0;
  for (const auto& f : fixtures()) {
    auto db = Database::open_readonly(f.database);
    for (const auto& e : parse_manifest(fixture_manifest(f.name))) {
      SCOPED_TRACE(f.name + "/" + e.name);
      EXPECT_EQ(compare_rows(oracle_rows(db, e), e.rows, e.ordered), "");
      ++total;
    }
  }
  EXPECT_GE(total, 25u);
}

TEST(Fixtures, PipelineReproducesManifest) {
  for (const auto& f : fixtures()) {
    for (const auto& e : parse_manifest(fixture_manifest(f.name))) {
      SCOPED_TRACE(f.name + "/" + e.name);
      auto t = run_plan(f.name, e.plan);
      EXPECT_EQ(compare_rows(rows_to_json(t.rows), e.rows, e.ordered), "");
    }
  }
}

TEST(Fixtures, ManifestParsing) {
  auto entries = parse_manifest(
      "{\"name\": \"a\", \"plan\": \"p\", \"oracle_sql\": \"SELECT 1\", \"rows\": [[1]]}\n\n"
      "{\"name\": \"b\", \"template\": \"T6\", \"plan\": \"p\", \"oracle_sql\": \"q\", \"reduce\": \"correlation\","
      " \"ordered\": true, \"rows\": []}\n");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].template_id, "");
  EXPECT_FALSE(entries[0].ordered);
  EXPECT_EQ(entries[1].reduce, "correlation");
  EXPECT_TRUE(entries[1].ordered);
  EXPECT_THROW(parse_manifest("{\"name\": \"a\"}\n"), Error);
  EXPECT_THROW(parse_manifest("{\"name\": \"a\", \"plan\": \"p\", \"oracle_sql\": \"q\", \"rows\": 3}\n"), Error);
}
