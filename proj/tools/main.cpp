// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "infospace/infospace.h"

namespace {

struct Failure {
  int exit_code;
};

struct CString {
  char* p = nullptr;
  ~CString() { infospace_free(p); }
  std::string str() const { return p ? p : ""; }
};

void check(infospace_status st) {
  if (st == INFOSPACE_OK) return;
  std::cerr << "error: " << infospace_last_error() << '\n';
  throw Failure{1};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << '\n';
    throw Failure{1};
  }
  return std::string(std::istreambuf_iterator<char>(in), {});
}

using DomainPtr = std::unique_ptr<infospace_domain, void (*)(infospace_domain*)>;
using CorpusPtr = std::unique_ptr<infospace_corpus, void (*)(infospace_corpus*)>;

DomainPtr open_domain(const std::string& labeling, const std::string& db) {
  infospace_domain* d = nullptr;
  check(infospace_domain_open(labeling.c_str(), db.empty() ? nullptr : db.c_str(), &d));
  return DomainPtr(d, infospace_domain_close);
}

CorpusPtr open_corpus(const std::string& path) {
  infospace_corpus* c = nullptr;
  check(infospace_corpus_load(path.c_str(), &c));
  return CorpusPtr(c, infospace_corpus_free);
}

int serve(const std::vector<std::string>& labelings, const std::vector<std::string>& dbs,
          const std::vector<std::string>& corpora, const std::string& host, int port, const std::string& static_dir) {
  if (labelings.empty()) {
    std::cerr << "error: serve needs at least one labeling\n";
    return 1;
  }
  if (dbs.size() != labelings.size()) {
    std::cerr << "error: give one --db per labeling (" << labelings.size() << " labelings, " << dbs.size()
              << " databases)\n";
    return 1;
  }
  if (!corpora.empty() && corpora.size() != labelings.size()) {
    std::cerr << "error: give one --corpus per labeling or none\n";
    return 1;
  }
  infospace_server* raw = nullptr;
  check(infospace_server_create(&raw));
  std::unique_ptr<infospace_server, void (*)(infospace_server*)> server(raw, infospace_server_free);
  for (std::size_t i = 0; i < labelings.size(); ++i) {
    check(infospace_server_add_domain(server.get(), labelings[i].c_str(), dbs[i].c_str(),
                                      corpora.empty() ? nullptr : corpora[i].c_str()));
  }
  if (!static_dir.empty()) check(infospace_server_set_static_dir(server.get(), static_dir.c_str()));

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  int bound = 0;
  check(infospace_server_bind(server.get(), host.c_str(), port, &bound));
  std::cout << "listening on http://" << host << ":" << bound << std::endl;

  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    infospace_server_stop(server.get());
  });
  infospace_status st = infospace_server_listen(server.get());
  kill(getpid(), SIGTERM);  // releases the watcher if listen ended on its own
  watcher.join();
  check(st);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic plan spaces over labeled relational data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(infospace_version()));

  std::string labeling, db, plan_file, corpus, query, out, question_id, format = "text", outdir;
  std::size_t limit = 10, max_instances = 0, max_per_template = 0, row_cap = 0;

  auto* validate = app.add_subcommand("validate", "Check a labeling against a database schema");
  validate->add_option("labeling", labeling, "Labeling document")->required();
  validate->add_option("--db", db, "Database file")->envname("INFOSPACE_DB")->required();

  auto* generate = app.add_subcommand("generate", "Write the question corpus of a domain");
  generate->add_option("labeling", labeling, "Labeling document")->required();
  generate->add_option("--db", db, "Database file")->envname("INFOSPACE_DB")->required();
  generate->add_option("--out", out, "Corpus file (default: <labeling>.questions)");
  generate->add_option("--max-instances", max_instances, "Distinct values harvested per attribute");
  generate->add_option("--max-per-template", max_per_template, "Questions emitted per template");

  auto* search = app.add_subcommand("search", "Rank corpus questions against a query");
  search->add_option("corpus", corpus, "Corpus file")->required();
  search->add_option("query", query, "Search text")->required();
  search->add_option("--limit", limit, "Maximum hits")->capture_default_str();

  auto* compile = app.add_subcommand("compile", "Print the SQL of a plan");
  compile->add_option("labeling", labeling, "Labeling document")->required();
  compile->add_option("--plan", plan_file, "Plan file")->required();

  auto* question = app.add_subcommand("question", "Print the question a plan answers");
  question->add_option("labeling", labeling, "Labeling document")->required();
  question->add_option("--plan", plan_file, "Plan file")->required();

  auto* run = app.add_subcommand("run", "Execute a plan and print its result");
  run->add_option("labeling", labeling, "Labeling document")->required();
  run->add_option("--db", db, "Database file")->envname("INFOSPACE_DB")->required();
  auto* plan_opt = run->add_option("--plan", plan_file, "Plan file");
  auto* qid_opt = run->add_option("--question-id", question_id, "Question id from a corpus");
  auto* corpus_opt = run->add_option("--corpus", corpus, "Corpus file holding the question id");
  plan_opt->excludes(qid_opt);
  qid_opt->needs(corpus_opt);
  run->add_option("--format", format, "text, records or json")
      ->check(CLI::IsMember({"text", "records", "json"}))
      ->capture_default_str();
  run->add_option("--row-cap", row_cap, "Maximum rows (default 10000)");

  std::vector<std::string> serve_labelings, serve_dbs, serve_corpora;
  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API for one or more domains");
  serve_cmd->add_option("labeling,--labeling", serve_labelings, "Labeling documents, positional or repeated");
  serve_cmd->add_option("--db", serve_dbs, "Database file, one per labeling")->envname("INFOSPACE_DB");
  serve_cmd->add_option("--corpus", serve_corpora, "Corpus file, one per labeling");
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port, 0 for any")->envname("INFOSPACE_PORT")->capture_default_str();
  serve_cmd->add_option("--static", static_dir, "Directory served under /");

  auto* fixtures = app.add_subcommand("fixtures", "Write the bundled fixture domains and databases");
  fixtures->add_option("outdir", outdir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*validate) {
      auto d = open_domain(labeling, db);
      CString report;
      int ok = 0;
      check(infospace_domain_validate(d.get(), &report.p, &ok));
      std::cout << report.str();
      return ok ? 0 : 1;
    }
    if (*generate) {
      auto d = open_domain(labeling, db);
      if (out.empty()) out = labeling + ".questions";
      std::size_t count = 0;
      CString report;
      check(infospace_domain_generate(d.get(), out.c_str(), max_instances, max_per_template, &count, &report.p));
      std::cerr << report.str();
      std::cout << count << " questions written to " << out << '\n';
      return 0;
    }
    if (*search) {
      auto c = open_corpus(corpus);
      CString hits;
      check(infospace_corpus_search(c.get(), query.c_str(), limit, &hits.p));
      std::cout << hits.str();
      return 0;
    }
    if (*compile || *question) {
      auto d = open_domain(labeling, "");
      std::string plan = read_file(plan_file);
      CString text;
      if (*compile) {
        check(infospace_domain_compile(d.get(), plan.c_str(), &text.p));
        std::cout << text.str();
      } else {
        check(infospace_domain_question(d.get(), plan.c_str(), &text.p));
        std::cout << text.str() << '\n';
      }
      return 0;
    }
    if (*run) {
      std::string plan;
      if (!plan_file.empty()) {
        plan = read_file(plan_file);
      } else if (!question_id.empty()) {
        auto c = open_corpus(corpus);
        CString text;
        check(infospace_corpus_plan(c.get(), question_id.c_str(), &text.p));
        plan = text.str();
      } else {
        std::cerr << "error: run needs --plan or --question-id with --corpus\n";
        return 1;
      }
      auto d = open_domain(labeling, db);
      infospace_format fmt = format == "records" ? INFOSPACE_FORMAT_RECORDS
                             : format == "json"  ? INFOSPACE_FORMAT_JSON
                                                 : INFOSPACE_FORMAT_TEXT;
      CString result;
      check(infospace_domain_run(d.get(), plan.c_str(), fmt, row_cap, &result.p));
      std::cout << result.str();
      return 0;
    }
    if (*serve_cmd) return serve(serve_labelings, serve_dbs, serve_corpora, host, port, static_dir);
    if (*fixtures) {
      CString summary;
      check(infospace_fixtures_build(outdir.c_str(), &summary.p));
      std::cout << summary.str();
      return 0;
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return 1;
}
