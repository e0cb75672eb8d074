// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infospace {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Config,
  Parse,
  Type,
  Compile,
  Database,
  NotFound,
  Validation,
  Internal,
};

/// Base of every exception thrown by the library. The code drives the C API
/// status mapping and the HTTP status selection.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Problem in a configuration document (operation definitions or labeling).
/// `path` locates the offending element, e.g. `dataAbstraction.entities[1].name`.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(ErrorCode::Config, path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// One located problem in a plan. `line`/`column` are 1-based and zero when
/// unknown; `step` is zero for problems not tied to a step.
struct Diagnostic {
  int step = 0;
  int line = 0;
  int column = 0;
  std::string message;

  std::string to_string() const;
};

class PlanError : public Error {
 public:
  PlanError(ErrorCode code, std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message) : Error(ErrorCode::NotFound, message) {}
};

class CompileError : public Error {
 public:
  explicit CompileError(const std::string& message) : Error(ErrorCode::Compile, message) {}
};

class DatabaseError : public Error {
 public:
  explicit DatabaseError(const std::string& message) : Error(ErrorCode::Database, message) {}
};

}  // namespace infospace
