#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "xpmgem/xpmgem.hpp"

namespace testing_helpers {

/// The desk configuration on a coarse z grid; fast enough for unit tests.
inline xpmgem::Configuration coarse_config(std::size_t n_z = 32) {
  auto c = xpmgem::default_configuration();
  c.solver.n_z = n_z;
  return c;
}

inline bool has_violation(const xpmgem::ValidationReport& r, const std::string& needle) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

}  // namespace testing_helpers
