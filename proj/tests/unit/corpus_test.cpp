// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "infospace/corpus.hpp"
#include "infospace/error.hpp"
#include "test_support.hpp"

using namespace infospace;
using namespace infospace::testing;
namespace fs = std::filesystem;

namespace {

std::vector<GeneratedQuestion> emissions_corpus() {
  auto db = Database::open_readonly(fixture("emissions").database);
  return enumerate_plans(fixture_labeling_of("emissions"), OperationRegistry::builtin(), builtin_templates(), db);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

TEST(Corpus, SerializeParseRoundTrip) {
  auto qs = emissions_corpus();
  auto text = serialize_corpus(qs);
  EXPECT_EQ(text, serialize_corpus(qs));
  auto back = parse_corpus(text);
  ASSERT_EQ(back.size(), qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_EQ(back[i].question_id, qs[i].question_id);
    EXPECT_EQ(back[i].template_id, qs[i].template_id);
    EXPECT_EQ(back[i].question_text, qs[i].question_text);
    EXPECT_EQ(back[i].plan, qs[i].plan);
  }
  EXPECT_EQ(serialize_corpus(back), text);
}

TEST(Corpus, RecordFieldsInOrder) {
  auto qs = emissions_corpus();
  auto text = serialize_corpus({qs.front()});
  auto j = nlohmann::ordered_json::parse(text.substr(0, text.find('\n')));
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"question_id", "template_id", "question_text", "plan"}));
  EXPECT_EQ(j["plan"], render_text(qs.front().plan));
}

TEST(Corpus, FileRoundTripAndErrors) {
  auto dir = scratch_dir("corpus");
  auto qs = emissions_corpus();
  write_corpus(dir + "/c.questions", qs);
  EXPECT_EQ(read_file(dir + "/c.questions"), serialize_corpus(qs));
  EXPECT_EQ(read_corpus(dir + "/c.questions").size(), qs.size());
  EXPECT_THROW(read_corpus(dir + "/missing"), Error);
  EXPECT_THROW(parse_corpus("{\"question_id\": 1}\n"), Error);
  EXPECT_THROW(parse_corpus("not json\n"), Error);
  EXPECT_TRUE(parse_corpus("\n\n").empty());
}

TEST(Corpus, FingerprintIsFnv1a) {
  auto dir = scratch_dir("fp");
  for (const std::string& content : {std::string(), std::string("a"), std::string("foobar"), fixture_seed("legal")}) {
    write_file(dir + "/f", content);
    EXPECT_EQ(file_fingerprint(dir + "/f"), fnv1a_hex(content));
  }
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Corpus, CacheIsReusedUntilInputsChange) {
  auto dir = scratch_dir("cache");
  auto labeling_path = dir + "/labeling.json";
  auto db_path = dir + "/emissions.db";
  fs::copy_file(fixture("emissions").labeling, labeling_path);
  fs::copy_file(fixture("emissions").database, db_path);
  EXPECT_EQ(default_corpus_path(labeling_path), labeling_path + ".questions");

  auto labeling = load_labeling_file(labeling_path);
  const auto& reg = OperationRegistry::builtin();
  auto first = [&] {
    auto db = Database::open_readonly(db_path);
    return load_or_generate(labeling_path, labeling, reg, db);
  };
  auto a = first();
  ASSERT_FALSE(a.empty());
  auto cache = default_corpus_path(labeling_path);
  ASSERT_TRUE(fs::exists(cache));
  ASSERT_TRUE(fs::exists(cache + ".hash"));

  // A marked cache proves the second call reads it instead of regenerating.
  auto marked = a;
  marked[0].question_text = "marked";
  write_corpus(cache, marked);
  EXPECT_EQ(first()[0].question_text, "marked");

  // Different caps invalidate the stamp.
  {
    auto db = Database::open_readonly(db_path);
    auto capped = load_or_generate(labeling_path, labeling, reg, db, GenerationCaps{3, 200});
    EXPECT_NE(capped[0].question_text, "marked");
    EXPECT_LT(capped.size(), a.size());
  }

  write_corpus(cache, marked);
  first();  // restamps with default caps
  write_corpus(cache, marked);
  write_file(labeling_path, read_file(labeling_path) + "\n");
  auto regenerated = first();
  EXPECT_EQ(regenerated[0].question_text, a[0].question_text);
  EXPECT_EQ(regenerated.size(), a.size());
}
