// SPDX-License-Identifier: Apache-2.0

#include "infospace/infospace.h"

#include <cstring>
#include <memory>
#include <mutex>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "infospace/compiler.hpp"
#include "infospace/corpus.hpp"
#include "infospace/database.hpp"
#include "infospace/error.hpp"
#include "infospace/executor.hpp"
#include "infospace/fixtures.hpp"
#include "infospace/labeling.hpp"
#include "infospace/questions.hpp"
#include "infospace/service.hpp"
#include "infospace/spacegen.hpp"

struct infospace_domain {
  infospace::DomainLabeling labeling;
  std::optional<infospace::Database> db;
};

struct infospace_corpus {
  std::vector<infospace::GeneratedQuestion> questions;
  infospace::QuestionIndex index;
};

struct infospace_server {
  std::mutex mu;
  std::shared_ptr<infospace::Service> service = std::make_shared<infospace::Service>();
  std::unique_ptr<infospace::HttpServer> http;
  std::string static_dir;
};

namespace {

thread_local std::string g_last_error;

infospace_status status_of(infospace::ErrorCode code) {
  using infospace::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return INFOSPACE_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return INFOSPACE_ERR_IO;
    case ErrorCode::Config: return INFOSPACE_ERR_CONFIG;
    case ErrorCode::Parse: return INFOSPACE_ERR_PARSE;
    case ErrorCode::Type: return INFOSPACE_ERR_TYPE;
    case ErrorCode::Compile: return INFOSPACE_ERR_COMPILE;
    case ErrorCode::Database: return INFOSPACE_ERR_DATABASE;
    case ErrorCode::NotFound: return INFOSPACE_ERR_NOT_FOUND;
    case ErrorCode::Validation: return INFOSPACE_ERR_VALIDATION;
    case ErrorCode::Internal: return INFOSPACE_ERR_INTERNAL;
  }
  return INFOSPACE_ERR_INTERNAL;
}

template <typename F>
infospace_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return INFOSPACE_OK;
  } catch (const infospace::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return INFOSPACE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return INFOSPACE_ERR_INTERNAL;
  }
}

infospace_status invalid(const char* message) {
  g_last_error = message;
  return INFOSPACE_ERR_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const infospace::Database& require_db(const infospace_domain* d) {
  if (!d->db) throw infospace::Error(infospace::ErrorCode::InvalidArgument, "domain was opened without a database");
  return *d->db;
}

}  // namespace

extern "C" {

const char* infospace_last_error(void) { return g_last_error.c_str(); }

const char* infospace_version(void) { return "0.1.0"; }

void infospace_free(char* text) { std::free(text); }

infospace_status infospace_domain_open(const char* labeling_path, const char* db_path, infospace_domain** out) {
  if (!labeling_path || !out) return invalid("labeling_path and out are required");
  *out = nullptr;
  return guarded([&] {
    auto d = std::make_unique<infospace_domain>();
    d->labeling = infospace::load_labeling_file(labeling_path);
    if (db_path) d->db = infospace::Database::open_readonly(db_path);
    *out = d.release();
  });
}

void infospace_domain_close(infospace_domain* domain) { delete domain; }

infospace_status infospace_domain_validate(infospace_domain* domain, char** report_out, int* ok_out) {
  if (!domain || !report_out || !ok_out) return invalid("domain, report_out and ok_out are required");
  *report_out = nullptr;
  return guarded([&] {
    auto report = infospace::validate_against_database(domain->labeling, require_db(domain));
    *ok_out = report.ok ? 1 : 0;
    *report_out = dup(report.to_string());
  });
}

infospace_status infospace_domain_compile(infospace_domain* domain, const char* plan_text, char** out) {
  if (!domain || !plan_text || !out) return invalid("domain, plan_text and out are required");
  *out = nullptr;
  return guarded([&] {
    auto prepared = infospace::prepare_plan(infospace::parse_plan(plan_text), infospace::OperationRegistry::builtin(),
                                            domain->labeling);
    *out = dup(infospace::describe(prepared.query));
  });
}

infospace_status infospace_domain_run(infospace_domain* domain, const char* plan_text, infospace_format format,
                                      size_t row_cap, char** out) {
  if (!domain || !plan_text || !out) return invalid("domain, plan_text and out are required");
  *out = nullptr;
  return guarded([&] {
    const auto& db = require_db(domain);
    auto prepared = infospace::prepare_plan(infospace::parse_plan(plan_text), infospace::OperationRegistry::builtin(),
                                            domain->labeling);
    auto table = infospace::execute(db, prepared.query, row_cap ? row_cap : infospace::kDefaultRowCap);
    switch (format) {
      case INFOSPACE_FORMAT_TEXT: *out = dup(table.to_text()); break;
      case INFOSPACE_FORMAT_RECORDS: *out = dup(table.to_records()); break;
      case INFOSPACE_FORMAT_JSON: *out = dup(table.to_json().dump() + "\n"); break;
      default: throw infospace::Error(infospace::ErrorCode::InvalidArgument, "unknown output format");
    }
  });
}

infospace_status infospace_domain_question(infospace_domain* domain, const char* plan_text, char** out) {
  if (!domain || !plan_text || !out) return invalid("domain, plan_text and out are required");
  *out = nullptr;
  return guarded([&] {
    auto prepared = infospace::prepare_plan(infospace::parse_plan(plan_text), infospace::OperationRegistry::builtin(),
                                            domain->labeling);
    *out = dup(infospace::render_question(prepared.checked, domain->labeling, infospace::OperationRegistry::builtin()));
  });
}

infospace_status infospace_domain_generate(infospace_domain* domain, const char* out_path, size_t max_instances,
                                           size_t max_per_template, size_t* count_out, char** report_out) {
  if (!domain || !out_path) return invalid("domain and out_path are required");
  if (report_out) *report_out = nullptr;
  return guarded([&] {
    infospace::GenerationCaps caps;
    if (max_instances) caps.max_instances = max_instances;
    if (max_per_template) caps.max_per_template = max_per_template;
    infospace::GenerationReport report;
    auto questions = infospace::enumerate_plans(domain->labeling, infospace::OperationRegistry::builtin(),
                                                infospace::builtin_templates(), require_db(domain), caps, &report);
    infospace::write_corpus(out_path, questions);
    if (count_out) *count_out = questions.size();
    if (report_out) {
      std::ostringstream s;
      for (const auto& t : report.templates) {
        s << t.template_id << ": " << t.emitted << " emitted, " << t.rejected << " rejected, " << t.duplicates
          << " duplicates" << (t.capped ? ", capped" : "") << (t.instances_truncated ? ", instances truncated" : "")
          << '\n';
      }
      *report_out = dup(s.str());
    }
  });
}

infospace_status infospace_corpus_load(const char* path, infospace_corpus** out) {
  if (!path || !out) return invalid("path and out are required");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<infospace_corpus>();
    c->questions = infospace::read_corpus(path);
    for (const auto& q : c->questions) c->index.add(q.question_id, q.question_text);
    *out = c.release();
  });
}

void infospace_corpus_free(infospace_corpus* corpus) { delete corpus; }

size_t infospace_corpus_size(const infospace_corpus* corpus) { return corpus ? corpus->questions.size() : 0; }

infospace_status infospace_corpus_search(const infospace_corpus* corpus, const char* query, size_t limit, char** out) {
  if (!corpus || !query || !out) return invalid("corpus, query and out are required");
  *out = nullptr;
  return guarded([&] {
    std::ostringstream s;
    for (const auto& hit : corpus->index.search(query, limit)) {
      for (const auto& q : corpus->questions) {
        if (q.question_id != hit.question_id) continue;
        s << q.question_id << '\t' << q.template_id << '\t' << q.question_text << '\n';
        break;
      }
    }
    *out = dup(s.str());
  });
}

infospace_status infospace_corpus_plan(const infospace_corpus* corpus, const char* question_id, char** out) {
  if (!corpus || !question_id || !out) return invalid("corpus, question_id and out are required");
  *out = nullptr;
  return guarded([&] {
    for (const auto& q : corpus->questions) {
      if (q.question_id == question_id) {
        *out = dup(infospace::render_text(q.plan));
        return;
      }
    }
    throw infospace::NotFoundError(std::string("no question with id ") + question_id);
  });
}

infospace_status infospace_server_create(infospace_server** out) {
  if (!out) return invalid("out is required");
  *out = nullptr;
  return guarded([&] { *out = new infospace_server(); });
}

infospace_status infospace_server_add_domain(infospace_server* server, const char* labeling_path, const char* db_path,
                                             const char* corpus_path) {
  if (!server || !labeling_path || !db_path) return invalid("server, labeling_path and db_path are required");
  return guarded([&] {
    std::lock_guard lock(server->mu);
    if (server->http) throw infospace::Error(infospace::ErrorCode::InvalidArgument, "server is already bound");
    std::optional<std::string> corpus;
    if (corpus_path) corpus = corpus_path;
    server->service->add_session(infospace::DomainSession::open(labeling_path, db_path, corpus));
  });
}

infospace_status infospace_server_set_static_dir(infospace_server* server, const char* dir) {
  if (!server || !dir) return invalid("server and dir are required");
  return guarded([&] {
    std::lock_guard lock(server->mu);
    if (server->http) throw infospace::Error(infospace::ErrorCode::InvalidArgument, "server is already bound");
    server->static_dir = dir;
  });
}

infospace_status infospace_server_bind(infospace_server* server, const char* host, int port, int* port_out) {
  if (!server || !host) return invalid("server and host are required");
  return guarded([&] {
    std::lock_guard lock(server->mu);
    if (server->http) throw infospace::Error(infospace::ErrorCode::InvalidArgument, "server is already bound");
    if (server->service->sessions().empty()) {
      throw infospace::Error(infospace::ErrorCode::InvalidArgument, "no domains added");
    }
    auto http = std::make_unique<infospace::HttpServer>(server->service);
    if (!server->static_dir.empty() && !http->set_static_dir(server->static_dir)) {
      throw infospace::Error(infospace::ErrorCode::Io, "static directory not found: " + server->static_dir);
    }
    int bound = http->bind(host, port);
    if (port_out) *port_out = bound;
    server->http = std::move(http);
  });
}

infospace_status infospace_server_listen(infospace_server* server) {
  if (!server) return invalid("server is required");
  infospace::HttpServer* http = nullptr;
  {
    std::lock_guard lock(server->mu);
    http = server->http.get();
  }
  if (!http) return invalid("server is not bound");
  return guarded([&] { http->listen(); });
}

void infospace_server_stop(infospace_server* server) {
  if (!server) return;
  std::lock_guard lock(server->mu);
  if (server->http) server->http->stop();
}

void infospace_server_free(infospace_server* server) { delete server; }

infospace_status infospace_fixtures_build(const char* out_dir, char** summary_out) {
  if (!out_dir) return invalid("out_dir is required");
  if (summary_out) *summary_out = nullptr;
  return guarded([&] {
    auto built = infospace::build_fixtures(out_dir);
    if (summary_out) {
      std::string s;
      for (const auto& f : built) s += f.name + "\t" + f.labeling + "\t" + f.database + "\n";
      *summary_out = dup(s);
    }
  });
}

}  // extern "C"
