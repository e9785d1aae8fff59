// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

namespace naeval {

/// Exact accuracy as integer counts. Converted to decimal only for display.
struct Ratio {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;

  bool empty() const noexcept { return total == 0; }
  double value() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }

  Ratio& operator+=(const Ratio& other) noexcept {
    correct += other.correct;
    total += other.total;
    return *this;
  }
  friend Ratio operator+(Ratio a, const Ratio& b) noexcept { return a += b; }

  /// Structural equality (same counts). Use same_value() for a/b == c/d.
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Exact rational comparison by cross-multiplication. Empty ratios compare
/// equal only to each other.
bool same_value(const Ratio& a, const Ratio& b) noexcept;

/// Percentage with `decimals` fraction digits, rounded half-to-even in exact
/// integer arithmetic: {1, 3} -> "33.33", {460, 600} -> "76.67" (decimals=2)
/// or "76.7" (decimals=1). An empty ratio formats as "-".
std::string format_percent(const Ratio& r, int decimals = 2);

}  // namespace naeval
