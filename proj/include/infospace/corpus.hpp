// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "infospace/spacegen.hpp"

namespace infospace {

/// One JSON object per line: question_id, template_id, question_text, plan.
void write_corpus(const std::string& path, const std::vector<GeneratedQuestion>& questions);
std::vector<GeneratedQuestion> read_corpus(const std::string& path);

std::string serialize_corpus(const std::vector<GeneratedQuestion>& questions);
std::vector<GeneratedQuestion> parse_corpus(const std::string& text);

/// FNV-1a 64-bit of the file contents, 16 hex digits.
std::string file_fingerprint(const std::string& path);

/// `<labeling_path>.questions`; a `.hash` sidecar next to it records the
/// labeling and database fingerprints it was generated from.
std::string default_corpus_path(const std::string& labeling_path);

/// Reuses the cached corpus when both fingerprints still match, otherwise
/// regenerates and tries to refresh the cache (a read-only location only
/// loses the cache).
std::vector<GeneratedQuestion> load_or_generate(const std::string& labeling_path, const DomainLabeling& labeling,
                                                const OperationRegistry& registry, const Database& db,
                                                const GenerationCaps& caps = {});

}  // namespace infospace
