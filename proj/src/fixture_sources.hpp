// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace infospace::detail {

struct FixtureSource {
  const char* name;
  const char* labeling;
  const char* seed;
  const char* manifest;
};

extern const FixtureSource kFixtureSources[];
extern const std::size_t kFixtureSourceCount;

}  // namespace infospace::detail
