#pragma once

#include <string>
#include <vector>

namespace htm {

struct SelfCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The worked examples of every module as a fixture suite. Runs in seconds.
std::vector<SelfCheck> run_selftest();

}  // namespace htm
