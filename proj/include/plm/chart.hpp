#pragma once
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace plm {

class Chart;
using ChartPtr = std::shared_ptr<const Chart>;

// An ordered list of coordinate names, optionally with a designated split
// into base variables (a leading prefix) and fiber variables (the rest).
class Chart {
 public:
  static ChartPtr make(std::vector<std::string> names) {
    return std::make_shared<Chart>(std::move(names), -1);
  }
  static ChartPtr make_split(std::vector<std::string> names, int base_dim) {
    if (base_dim < 0 || base_dim > static_cast<int>(names.size()))
      throw std::invalid_argument("chart split out of range");
    return std::make_shared<Chart>(std::move(names), base_dim);
  }

  Chart(std::vector<std::string> names, int base_dim)
      : names_(std::move(names)), base_dim_(base_dim) {
    for (const auto& n : names_)
      if (n.empty()) throw std::invalid_argument("empty variable name");
    for (size_t i = 0; i < names_.size(); ++i)
      for (size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j])
          throw std::invalid_argument("duplicate variable name: " + names_[i]);
  }

  int dim() const { return static_cast<int>(names_.size()); }
  bool has_split() const { return base_dim_ >= 0; }
  int base_dim() const { return has_split() ? base_dim_ : dim(); }
  int fiber_dim() const { return dim() - base_dim(); }
  bool is_fiber(int i) const { return has_split() && i >= base_dim_; }

  const std::string& name(int i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  int index(const std::string& n) const {
    for (size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == n) return static_cast<int>(i);
    return -1;
  }

  friend bool operator==(const Chart& a, const Chart& b) {
    return a.names_ == b.names_ && a.base_dim_ == b.base_dim_;
  }

 private:
  std::vector<std::string> names_;
  int base_dim_;
};

inline bool same_chart(const ChartPtr& a, const ChartPtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace plm
