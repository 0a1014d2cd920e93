#pragma once

#include <string>
#include <vector>

namespace levylmm {

/// One named model condition with the quantity that was checked against its bound.
struct ValidationCheck {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

/// Machine-readable outcome of a setup validation. Never thrown; callers inspect it.
struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  void append(const ValidationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }

  std::string to_json() const;
};

}  // namespace levylmm
