#pragma once

#include <doctest.h>

#include "support/checks.hpp"

namespace factorreg::testing {

inline void require_all(const std::vector<Check>& checks) {
  REQUIRE_FALSE(checks.empty());
  for (const auto& c : checks) {
    INFO(c.name << " " << c.detail);
    CHECK(c.pass);
  }
}

}  // namespace factorreg::testing
