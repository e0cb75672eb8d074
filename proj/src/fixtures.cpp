// SPDX-License-Identifier: Apache-2.0

#include "infospace/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fixture_sources.hpp"
#include "infospace/database.hpp"
#include "infospace/error.hpp"

namespace infospace {

namespace {

struct FixtureFiles {
  std::string labeling;
  std::string seed;
  std::string manifest;
};

const std::map<std::string, FixtureFiles>& catalog() {
  static const std::map<std::string, FixtureFiles> files = [] {
    std::map<std::string, FixtureFiles> out;
    for (std::size_t i = 0; i < detail::kFixtureSourceCount; ++i) {
      const auto& src = detail::kFixtureSources[i];
      out[src.name] = {src.labeling, src.seed, src.manifest};
    }
    return out;
  }();
  return files;
}

const FixtureFiles& files_of(const std::string& name) {
  auto it = catalog().find(name);
  if (it == catalog().end()) throw NotFoundError("no fixture named \"" + name + "\"");
  return it->second;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

std::vector<std::string> fixture_names() {
  // Declaration order, not alphabetical.
  std::vector<std::string> names;
  for (std::size_t i = 0; i < detail::kFixtureSourceCount; ++i) names.emplace_back(detail::kFixtureSources[i].name);
  return names;
}

const std::string& fixture_labeling(const std::string& name) { return files_of(name).labeling; }
const std::string& fixture_seed(const std::string& name) { return files_of(name).seed; }
const std::string& fixture_manifest(const std::string& name) { return files_of(name).manifest; }

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.name = j.at("name").get<std::string>();
      e.template_id = j.value("template", "");
      e.plan = j.at("plan").get<std::string>();
      e.oracle_sql = j.at("oracle_sql").get<std::string>();
      e.ordered = j.value("ordered", false);
      e.reduce = j.value("reduce", "");
      e.rows = j.at("rows");
      if (!e.rows.is_array()) throw Error(ErrorCode::Parse, "rows is not an array");
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::Parse, "manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<FixturePaths> build_fixtures(const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<FixturePaths> out;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir + ": " + ec.message());
  for (const auto& name : fixture_names()) {
    const auto& files = files_of(name);
    fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    FixturePaths p;
    p.name = name;
    p.dir = dir.string();
    p.labeling = (dir / "labeling.json").string();
    p.manifest = (dir / "manifest.jsonl").string();
    p.database = (dir / (name + ".db")).string();
    write_file(p.labeling, files.labeling);
    write_file(dir / "seed.sql", files.seed);
    write_file(p.manifest, files.manifest);
    create_database(p.database, files.seed);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace infospace
