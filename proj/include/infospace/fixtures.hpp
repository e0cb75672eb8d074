// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace infospace {

/// Names of the bundled fixture domains.
std::vector<std::string> fixture_names();

/// Embedded files of one fixture; NotFoundError for an unknown name.
const std::string& fixture_labeling(const std::string& name);
const std::string& fixture_seed(const std::string& name);
const std::string& fixture_manifest(const std::string& name);

struct ManifestEntry {
  std::string name;
  std::string template_id;  // empty for hand-written plans
  std::string plan;
  std::string oracle_sql;
  /// Host reduction the oracle rows still need: "median",
  /// "standard_deviation" or "correlation" over the trailing column(s),
  /// grouped by the leading ones. Empty when the oracle is plain SQL.
  std::string reduce;
  bool ordered = false;  // rows compare as a sequence rather than a multiset
  nlohmann::json rows;   // array of arrays
};

std::vector<ManifestEntry> parse_manifest(const std::string& text);

struct FixturePaths {
  std::string name;
  std::string dir;
  std::string labeling;
  std::string database;
  std::string manifest;
};

/// Writes `<out_dir>/<name>/{labeling.json, seed.sql, manifest.jsonl,
/// <name>.db}` for every fixture, replacing existing files.
std::vector<FixturePaths> build_fixtures(const std::string& out_dir);

}  // namespace infospace
