#pragma once

#include <string>
#include <vector>

namespace hyperrfk {

struct SelftestCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Invariant suite at reduced resolution (a few seconds).
std::vector<SelftestCheck> run_selftest();

}  // namespace hyperrfk
