// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "infospace/labeling.hpp"
#include "infospace/plan.hpp"
#include "infospace/taxonomy.hpp"

namespace infospace {

/// Connective phrases for filter, sort and limit operations.
const std::map<std::string, std::string>& filter_nicenames();

/// Renders the question answered by the plan's last return step.
std::string render_question(const CheckedPlan& checked, const DomainLabeling& labeling,
                            const OperationRegistry& registry);

/// Lowercase alphanumeric runs of `text`.
std::vector<std::string> tokenize(std::string_view text);

struct SearchHit {
  std::string question_id;
  std::size_t score = 0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Token-overlap index over question texts.
class QuestionIndex {
 public:
  void add(std::string question_id, std::string question_text);

  /// Records sharing at least one token with `query`, by descending overlap,
  /// then shorter text, then question id.
  std::vector<SearchHit> search(std::string_view query, std::size_t limit) const;

  std::size_t size() const noexcept { return records_.size(); }

 private:
  struct Record {
    std::string question_id;
    std::string text;
    std::map<std::string, std::size_t> tokens;
  };
  std::vector<Record> records_;
};

}  // namespace infospace
