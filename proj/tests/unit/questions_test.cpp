// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "infospace/compiler.hpp"
#include "infospace/fixtures.hpp"
#include "infospace/questions.hpp"
#include "infospace/spacegen.hpp"
#include "test_support.hpp"

using namespace infospace;
using namespace infospace::testing;

namespace {

const OperationRegistry& reg() { return OperationRegistry::builtin(); }

std::string question_for(const std::string& domain, const std::string& plan) {
  const auto& l = fixture_labeling_of(domain);
  return render_question(check_plan(parse_plan(plan), reg(), l), l, reg());
}

const std::vector<GeneratedQuestion>& corpus(const std::string& domain) {
  static std::map<std::string, std::vector<GeneratedQuestion>> cache;
  auto it = cache.find(domain);
  if (it == cache.end()) {
    auto db = Database::open_readonly(fixture(domain).database);
    it = cache.emplace(domain, enumerate_plans(fixture_labeling_of(domain), reg(), builtin_templates(), db)).first;
  }
  return it->second;
}

QuestionIndex index_of(const std::vector<GeneratedQuestion>& qs) {
  QuestionIndex idx;
  for (const auto& q : qs) idx.add(q.question_id, q.question_text);
  return idx;
}

// Scores every record from scratch: overlap of token multisets.
std::vector<SearchHit> brute_force_search(const std::vector<GeneratedQuestion>& qs, const std::string& query,
                                          std::size_t limit) {
  std::map<std::string, std::size_t> want;
  for (const auto& t : tokenize(query)) want[t]++;
  struct Row {
    SearchHit hit;
    std::size_t len;
  };
  std::vector<Row> rows;
  for (const auto& q : qs) {
    std::map<std::string, std::size_t> have;
    for (const auto& t : tokenize(q.question_text)) have[t]++;
    std::size_t score = 0;
    for (const auto& [t, n] : want) score += std::min(n, have[t]);
    if (score) rows.push_back({{q.question_id, score}, q.question_text.size()});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(b.hit.score, a.len, a.hit.question_id) < std::tie(a.hit.score, b.len, b.hit.question_id);
  });
  std::vector<SearchHit> out;
  for (std::size_t i = 0; i < rows.size() && i < limit; ++i) out.push_back(rows[i].hit);
  return out;
}

}  // namespace

TEST(Questions, FilterNicenames) {
  const auto& n = filter_nicenames();
  std::map<std::string, std::string> required = {
      {"exact", "of"},
      {"greaterthan", "greater than"},
      {"greaterthan_eq", "greater than or equal to"},
      {"lessthan", "less than"},
      {"lessthan_eq", "less than or equal to"},
      {"contains", "containing"},
      {"not", "not"},
      {"and", "and"},
      {"or", "or"},
      {"asc", "in ascending order"},
      {"desc", "in descending order"},
      {"limit", "limited to the top results"},
  };
  for (const auto& [k, v] : required) EXPECT_EQ(n.at(k), v) << k;
}

TEST(Questions, CarbonSentence) {
  auto plan = parse_manifest(fixture_manifest("emissions")).at(0).plan;
  EXPECT_EQ(question_for("emissions", plan),
            "What is the average amount of carbon emissions grouped by year in ascending order for country of United "
            "States of America?");
  EXPECT_EQ(question_for("emissions", plan), question_for("emissions", plan));
}

TEST(Questions, LookupByIdentifier) {
  EXPECT_EQ(question_for("healthcare",
                         "|1| retrieve_entity(\"Stay\")\n|2| retrieve_attribute(|1|, \"disease\")\n"
                         "|3| retrieve_attribute(|1|, \"stay_id\")\n|4| exact(|3|, \"31945330\")\n"
                         "|5| collect(|2|)\n|6| return(|5|, |4|)"),
            "What is the disease for stay id of 31945330?");
}

TEST(Questions, LegalGroupedQuestion) {
  EXPECT_EQ(question_for("legal",
                         "|1| retrieve_entity(\"Case\")\n|2| retrieve_attribute(|1|, \"duration\")\n"
                         "|3| retrieve_attribute(|1|, \"year\")\n|4| groupby(|3|)\n|5| average(|2|, |4|)\n"
                         "|6| retrieve_entity(\"Judge\")\n|7| retrieve_attribute(|6|, \"name\")\n"
                         "|8| exact(|7|, \"colleen kollar-kotelly\")\n|9| collect(|3|, |5|)\n|10| return(|9|, |8|)"),
            "What is the average case duration grouped by year for name of colleen kollar-kotelly?");
}

TEST(Questions, ConnectivesAndMultipleOutputs) {
  EXPECT_EQ(question_for("emissions",
                         "|1| retrieve_entity(\"CarbonEmission\")\n|2| retrieve_attribute(|1|, \"amount\")\n"
                         "|3| max(|2|)\n|4| min(|2|)\n|5| retrieve_attribute(|1|, \"year\")\n"
                         "|6| greaterthan_eq(|5|, 2020)\n|7| collect(|3|, |4|)\n|8| return(|7|, |6|)"),
            "What is the max amount of carbon emissions and min amount of carbon emissions for year greater than or "
            "equal to 2020?");
  EXPECT_EQ(question_for("emissions",
                         "|1| retrieve_entity(\"CarbonEmission\")\n|2| retrieve_attribute(|1|, \"amount\")\n"
                         "|3| retrieve_attribute(|1|, \"country\")\n|4| exact(|3|, \"China\")\n|5| not(|4|)\n"
                         "|6| retrieve_attribute(|1|, \"year\")\n|7| lessthan(|6|, 2021)\n|8| and(|5|, |7|)\n"
                         "|9| count(|2|)\n|10| collect(|9|)\n|11| return(|10|, |8|)"),
            "What is the count of amount of carbon emissions for not country of China and year less than 2021?");
}

TEST(Questions, BooleanComparisonFraming) {
  for (const auto& e : parse_manifest(fixture_manifest("incidents"))) {
    if (e.name != "t5_handgun_vs_rifle") continue;
    EXPECT_EQ(question_for("incidents", e.plan),
              "Is the count of unique incident id for weapon type containing \"handgun\" greater than count of unique "
              "incident id for weapon type containing \"rifle\"?");
  }
}

TEST(Questions, Tokenize) {
  EXPECT_EQ(tokenize("What is the AVERAGE rent, for San-Francisco?"),
            (std::vector<std::string>{"what", "is", "the", "average", "rent", "for", "san", "francisco"}));
  EXPECT_TRUE(tokenize("  ,;  ").empty());
}

TEST(Questions, SearchAverageRentRanksRentQuestionsFirst) {
  const auto& qs = corpus("housing");
  auto idx = index_of(qs);
  std::map<std::string, std::string> text;
  for (const auto& q : qs) text[q.question_id] = q.question_text;
  auto hits = idx.search("average rent", 1000);
  ASSERT_FALSE(hits.empty());
  auto has_both = [&](const SearchHit& h) {
    auto toks = tokenize(text[h.question_id]);
    return std::count(toks.begin(), toks.end(), "average") && std::count(toks.begin(), toks.end(), "rent");
  };
  EXPECT_TRUE(has_both(hits.front()));
  EXPECT_TRUE(std::is_partitioned(hits.begin(), hits.end(), has_both));
  EXPECT_NE(std::find_if(hits.begin(), hits.end(),
                         [&](const SearchHit& h) {
                           return text[h.question_id] == "What is the average rent for region name of San Francisco, CA?";
                         }),
            hits.end());
}

TEST(Questions, SearchMatchesBruteForceScoring) {
  for (const char* domain : {"housing", "emissions", "incidents"}) {
    const auto& qs = corpus(domain);
    auto idx = index_of(qs);
    for (const char* q : {"average rent", "count of unique", "max amount grouped by year", "handgun", "zzz", "",
                          "What is the", "for for for"}) {
      EXPECT_EQ(idx.search(q, 25), brute_force_search(qs, q, 25)) << domain << ": " << q;
    }
  }
}

TEST(Questions, EmptyQueryReturnsNothing) {
  auto idx = index_of(corpus("housing"));
  EXPECT_TRUE(idx.search("", 10).empty());
  EXPECT_TRUE(idx.search("?!", 10).empty());
  EXPECT_TRUE(idx.search("rent", 0).empty());
}

TEST(Questions, SearchIsCaseInsensitive) {
  auto idx = index_of(corpus("housing"));
  EXPECT_EQ(idx.search("RENT", 50), idx.search("rent", 50));
  EXPECT_EQ(idx.search("Average Rent", 50), idx.search("average rent", 50));
}

TEST(Questions, FullQuestionTextRanksAmongTheTopHits) {
  for (const char* domain : {"emissions", "housing", "incidents"}) {
    const auto& qs = corpus(domain);
    auto idx = index_of(qs);
    for (std::size_t i = 0; i < qs.size(); i += std::max<std::size_t>(1, qs.size() / 40)) {
      auto hits = idx.search(qs[i].question_text, qs.size());
      ASSERT_FALSE(hits.empty());
      EXPECT_EQ(hits.front().score, tokenize(qs[i].question_text).size());
      // Comparisons that swap their operands share every token and the
      // length, so the question only has to tie for first place.
      bool tied_first = false;
      for (const auto& h : hits) {
        if (h.score != hits.front().score) break;
        tied_first = tied_first || h.question_id == qs[i].question_id;
      }
      EXPECT_TRUE(tied_first) << qs[i].question_text;
    }
  }
}
