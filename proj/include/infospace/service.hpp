// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "infospace/compiler.hpp"
#include "infospace/executor.hpp"
#include "infospace/labeling.hpp"
#include "infospace/questions.hpp"
#include "infospace/spacegen.hpp"
#include "infospace/taxonomy.hpp"

namespace infospace {

/// One served domain. Immutable after construction; every request opens its
/// own read-only connection.
class DomainSession {
 public:
  /// Loads the labeling, checks it against the database and loads the corpus
  /// from `corpus_path` or, when absent, the cache beside the labeling
  /// (generating it if stale).
  static std::shared_ptr<const DomainSession> open(const std::string& labeling_path, const std::string& db_path,
                                                   const std::optional<std::string>& corpus_path = std::nullopt,
                                                   const GenerationCaps& caps = {});

  DomainSession(DomainLabeling labeling, std::string db_path, std::vector<GeneratedQuestion> corpus);

  const std::string& id() const noexcept { return labeling_.id; }
  const DomainLabeling& labeling() const noexcept { return labeling_; }
  const OperationRegistry& registry() const noexcept { return OperationRegistry::builtin(); }
  const std::vector<GeneratedQuestion>& corpus() const noexcept { return corpus_; }
  const QuestionIndex& index() const noexcept { return index_; }
  const std::string& db_path() const noexcept { return db_path_; }

  /// Nullptr when unknown.
  const GeneratedQuestion* question(const std::string& question_id) const;

  ResultTable run(const PlanGraph& plan, std::size_t row_cap = kDefaultRowCap) const;

 private:
  DomainLabeling labeling_;
  std::string db_path_;
  std::vector<GeneratedQuestion> corpus_;
  QuestionIndex index_;
  std::map<std::string, std::size_t> by_id_;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Transport-independent request handling; the HTTP server forwards to it.
class Service {
 public:
  void add_session(std::shared_ptr<const DomainSession> session);
  const std::vector<std::shared_ptr<const DomainSession>>& sessions() const noexcept { return sessions_; }

  ApiResponse dispatch(const ApiRequest& request) const;

 private:
  const DomainSession* find(const std::string& id) const;

  std::vector<std::shared_ptr<const DomainSession>> sessions_;
};

/// HTTP/1.1 front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const Service> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Serves files under `/` from `dir`; false when the directory is missing.
  bool set_static_dir(const std::string& dir);

  /// Binds `host:port` (port 0 picks a free one); returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop(). Requires bind().
  void listen();
  /// Blocks until a concurrent listen() accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace infospace
