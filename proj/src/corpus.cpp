// SPDX-License-Identifier: Apache-2.0

#include "infospace/corpus.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "infospace/error.hpp"

namespace infospace {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool try_write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

}  // namespace

std::string serialize_corpus(const std::vector<GeneratedQuestion>& questions) {
  std::string out;
  for (const auto& q : questions) {
    nlohmann::ordered_json j;
    j["question_id"] = q.question_id;
    j["template_id"] = q.template_id;
    j["question_text"] = q.question_text;
    j["plan"] = render_text(q.plan);
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<GeneratedQuestion> parse_corpus(const std::string& text) {
  std::vector<GeneratedQuestion> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      GeneratedQuestion q;
      q.question_id = j.at("question_id").get<std::string>();
      q.template_id = j.at("template_id").get<std::string>();
      q.question_text = j.at("question_text").get<std::string>();
      q.plan = parse_plan(j.at("plan").get<std::string>());
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::Parse, "corpus line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const PlanError& ex) {
      throw Error(ErrorCode::Parse, "corpus line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

void write_corpus(const std::string& path, const std::vector<GeneratedQuestion>& questions) {
  if (!try_write(path, serialize_corpus(questions))) throw Error(ErrorCode::Io, "cannot write " + path);
}

std::vector<GeneratedQuestion> read_corpus(const std::string& path) { return parse_corpus(read_file(path)); }

std::string file_fingerprint(const std::string& path) { return fnv1a_hex(read_file(path)); }

std::string default_corpus_path(const std::string& labeling_path) { return labeling_path + ".questions"; }

std::vector<GeneratedQuestion> load_or_generate(const std::string& labeling_path, const DomainLabeling& labeling,
                                                const OperationRegistry& registry, const Database& db,
                                                const GenerationCaps& caps) {
  std::string corpus_path = default_corpus_path(labeling_path);
  std::string hash_path = corpus_path + ".hash";
  std::string stamp = file_fingerprint(labeling_path) + " " + file_fingerprint(db.path()) + " " +
                      std::to_string(caps.max_per_template) + " " + std::to_string(caps.max_instances) + "\n";
  try {
    if (read_file(hash_path) == stamp) return read_corpus(corpus_path);
  } catch (const Error&) {
    // missing or stale cache
  }
  auto questions = enumerate_plans(labeling, registry, builtin_templates(), db, caps);
  if (try_write(corpus_path, serialize_corpus(questions))) try_write(hash_path, stamp);
  return questions;
}

}  // namespace infospace
