// SPDX-License-Identifier: Apache-2.0

#include "infospace/error.hpp"

namespace infospace {

std::string Diagnostic::to_string() const {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ":" + std::to_string(column) + ": ";
  if (step > 0) out += "step |" + std::to_string(step) + "|: ";
  return out + message;
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
  if (diagnostics.empty()) return "invalid plan";
  std::string out = diagnostics.front().to_string();
  if (diagnostics.size() > 1) out += " (and " + std::to_string(diagnostics.size() - 1) + " more)";
  return out;
}

}  // namespace

PlanError::PlanError(ErrorCode code, std::vector<Diagnostic> diagnostics)
    : Error(code, summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace infospace
