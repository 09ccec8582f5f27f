#pragma once

#include <string>
#include <vector>

namespace plm {

// One verdict from a verification routine.  `exact` records whether the
// verdict came from symbolic computation or from seeded numeric sampling.
struct CheckRecord {
  std::string name;
  bool pass = false;
  bool exact = true;
  std::string details;
};

struct CheckSet {
  std::vector<CheckRecord> records;

  void add(CheckRecord r) { records.push_back(std::move(r)); }
  bool all_pass() const {
    for (const auto& r : records)
      if (!r.pass) return false;
    return true;
  }
  bool all_exact() const {
    for (const auto& r : records)
      if (!r.exact) return false;
    return true;
  }
};

}  // namespace plm
