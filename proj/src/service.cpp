// SPDX-License-Identifier: Apache-2.0

#include "infospace/service.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

#include <httplib.h>
#include <json.hpp>

#include "infospace/corpus.hpp"
#include "infospace/database.hpp"
#include "infospace/error.hpp"

namespace infospace {

using ojson = nlohmann::ordered_json;

std::shared_ptr<const DomainSession> DomainSession::open(const std::string& labeling_path, const std::string& db_path,
                                                         const std::optional<std::string>& corpus_path,
                                                         const GenerationCaps& caps) {
  DomainLabeling labeling = load_labeling_file(labeling_path);
  Database db = Database::open_readonly(db_path);
  ValidationReport report = validate_against_database(labeling, db);
  if (!report.ok) throw Error(ErrorCode::Validation, "labeling does not match the database:\n" + report.to_string());
  std::vector<GeneratedQuestion> corpus;
  if (corpus_path && std::filesystem::exists(*corpus_path)) {
    corpus = read_corpus(*corpus_path);
  } else if (corpus_path) {
    corpus = enumerate_plans(labeling, OperationRegistry::builtin(), builtin_templates(), db, caps);
    write_corpus(*corpus_path, corpus);
  } else {
    corpus = load_or_generate(labeling_path, labeling, OperationRegistry::builtin(), db, caps);
  }
  return std::make_shared<DomainSession>(std::move(labeling), db_path, std::move(corpus));
}

DomainSession::DomainSession(DomainLabeling labeling, std::string db_path, std::vector<GeneratedQuestion> corpus)
    : labeling_(std::move(labeling)), db_path_(std::move(db_path)), corpus_(std::move(corpus)) {
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    index_.add(corpus_[i].question_id, corpus_[i].question_text);
    by_id_.emplace(corpus_[i].question_id, i);
  }
}

const GeneratedQuestion* DomainSession::question(const std::string& question_id) const {
  auto it = by_id_.find(question_id);
  return it == by_id_.end() ? nullptr : &corpus_[it->second];
}

ResultTable DomainSession::run(const PlanGraph& plan, std::size_t row_cap) const {
  PreparedPlan prepared = prepare_plan(plan, registry(), labeling_);
  Database db = Database::open_readonly(db_path_);
  return execute(db, prepared.query, row_cap);
}

void Service::add_session(std::shared_ptr<const DomainSession> session) {
  if (find(session->id())) throw Error(ErrorCode::InvalidArgument, "domain \"" + session->id() + "\" is loaded twice");
  sessions_.push_back(std::move(session));
}

const DomainSession* Service::find(const std::string& id) const {
  for (const auto& s : sessions_) {
    if (s->id() == id) return s.get();
  }
  return nullptr;
}

namespace {

ApiResponse json_response(int status, const ojson& body) { return {status, body.dump()}; }

ApiResponse error_response(int status, const std::string& message, std::vector<Diagnostic> diagnostics = {}) {
  ojson errors = ojson::array();
  for (const auto& d : diagnostics) {
    errors.push_back({{"step", d.step}, {"line", d.line}, {"column", d.column}, {"message", d.message}});
  }
  return json_response(status, {{"error", message}, {"errors", errors}});
}

ApiResponse from_exception(const Error& e) {
  std::vector<Diagnostic> diags;
  if (auto pe = dynamic_cast<const PlanError*>(&e)) diags = pe->diagnostics();
  if (diags.empty()) diags.push_back({0, 0, 0, e.what()});
  switch (e.code()) {
    case ErrorCode::Parse:
    case ErrorCode::Type:
    case ErrorCode::Compile:
    case ErrorCode::Validation:
    case ErrorCode::InvalidArgument:
      return error_response(400, e.what(), std::move(diags));
    case ErrorCode::NotFound:
      return error_response(404, e.what());
    default:
      return error_response(500, e.what());
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) out.push_back(path.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

std::size_t size_param(const ApiRequest& req, const std::string& name, std::size_t fallback, std::size_t max) {
  auto it = req.query.find(name);
  if (it == req.query.end() || it->second.empty()) return fallback;
  std::size_t v = 0;
  const char* b = it->second.data();
  const char* e = b + it->second.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw Error(ErrorCode::InvalidArgument, name + " must be a non-negative integer");
  return std::min(v, max);
}

ojson params_json(const std::vector<Scalar>& params) {
  ojson out = ojson::array();
  for (const auto& p : params) out.push_back(scalar_json(p));
  return out;
}

ApiResponse list_domains(const std::vector<std::shared_ptr<const DomainSession>>& sessions) {
  ojson out = ojson::array();
  for (const auto& s : sessions) {
    out.push_back({{"id", s->id()},
                   {"name", s->labeling().name},
                   {"description", s->labeling().description},
                   {"entity_count", s->labeling().entities.size()},
                   {"question_count", s->corpus().size()}});
  }
  return json_response(200, out);
}

ApiResponse search(const DomainSession& s, const ApiRequest& req) {
  std::size_t limit = size_param(req, "limit", 20, 500);
  std::size_t offset = size_param(req, "offset", 0, SIZE_MAX);
  auto qit = req.query.find("q");
  std::string q = qit == req.query.end() ? "" : qit->second;

  std::vector<std::pair<const GeneratedQuestion*, std::size_t>> matches;
  if (tokenize(q).empty()) {
    for (const auto& g : s.corpus()) matches.push_back({&g, 0});
  } else {
    for (const auto& hit : s.index().search(q, s.corpus().size())) matches.push_back({s.question(hit.question_id), hit.score});
  }
  ojson results = ojson::array();
  for (std::size_t i = offset; i < matches.size() && i - offset < limit; ++i) {
    const auto* g = matches[i].first;
    results.push_back({{"question_id", g->question_id},
                       {"text", g->question_text},
                       {"template_id", g->template_id},
                       {"score", matches[i].second}});
  }
  return json_response(200, {{"results", results}, {"total", matches.size()}, {"offset", offset}, {"limit", limit}});
}

ApiResponse question_detail(const DomainSession& s, const GeneratedQuestion& g) {
  PreparedPlan prepared = prepare_plan(g.plan, s.registry(), s.labeling());
  return json_response(200, {{"question_id", g.question_id},
                             {"template_id", g.template_id},
                             {"text", g.question_text},
                             {"plan_text", render_text(g.plan)},
                             {"sql_text", prepared.query.sql_text},
                             {"params", params_json(prepared.query.params)}});
}

ApiResponse execute_plan_body(const DomainSession& s, const std::string& body) {
  ojson doc;
  try {
    doc = ojson::parse(body);
  } catch (const ojson::exception& e) {
    return error_response(400, std::string("request body is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("plan_text") || !doc["plan_text"].is_string()) {
    return error_response(400, "request body needs a string field \"plan_text\"");
  }
  PlanGraph plan = parse_plan(doc["plan_text"].get<std::string>());
  return json_response(200, s.run(plan).to_json());
}

}  // namespace

ApiResponse Service::dispatch(const ApiRequest& req) const {
  try {
    auto parts = split_path(req.path);
    if (parts.empty() || parts[0] != "api") return error_response(404, "no such endpoint");
    auto method_is = [&](const char* m) { return req.method == m; };
    auto wrong_method = [] { return error_response(405, "method not allowed"); };

    if (parts.size() == 2 && parts[1] == "health") {
      return method_is("GET") ? json_response(200, {{"status", "ok"}}) : wrong_method();
    }
    if (parts.size() < 2 || parts[1] != "domains") return error_response(404, "no such endpoint");
    if (parts.size() == 2) return method_is("GET") ? list_domains(sessions_) : wrong_method();

    const DomainSession* s = find(parts[2]);
    if (!s) return error_response(404, "unknown domain \"" + parts[2] + "\"");
    if (parts.size() == 4 && parts[3] == "questions") return method_is("GET") ? search(*s, req) : wrong_method();
    if (parts.size() >= 5 && parts[3] == "questions") {
      const GeneratedQuestion* g = s->question(parts[4]);
      if (parts.size() == 5) {
        if (!method_is("GET")) return wrong_method();
        if (!g) return error_response(404, "unknown question \"" + parts[4] + "\"");
        return question_detail(*s, *g);
      }
      if (parts.size() == 6 && parts[5] == "execute") {
        if (!method_is("POST")) return wrong_method();
        if (!g) return error_response(404, "unknown question \"" + parts[4] + "\"");
        return json_response(200, s->run(g->plan).to_json());
      }
    }
    if (parts.size() == 5 && parts[3] == "plans" && parts[4] == "execute") {
      return method_is("POST") ? execute_plan_body(*s, req.body) : wrong_method();
    }
    return error_response(404, "no such endpoint");
  } catch (const Error& e) {
    return from_exception(e);
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

struct HttpServer::Impl {
  std::shared_ptr<const Service> service;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<const Service> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto handler = [svc = impl_->service](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) api.query[k] = v;
    ApiResponse out = svc->dispatch(api);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  impl_->server.Get(R"(/api/.*)", handler);
  impl_->server.Post(R"(/api/.*)", handler);
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::set_static_dir(const std::string& dir) { return impl_->server.set_mount_point("/", dir); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() {
  if (!impl_->server.listen_after_bind()) {
    if (impl_->server.is_running()) throw Error(ErrorCode::Io, "server stopped unexpectedly");
  }
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace infospace
