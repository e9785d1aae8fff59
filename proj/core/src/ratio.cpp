// Copyright 2026 The naeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "naeval/ratio.hpp"

#include "naeval/error.hpp"

namespace naeval {

using u128 = unsigned __int128;

bool same_value(const Ratio& a, const Ratio& b) noexcept {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  return static_cast<u128>(a.correct) * b.total == static_cast<u128>(b.correct) * a.total;
}

std::string format_percent(const Ratio& r, int decimals) {
  if (decimals < 0 || decimals > 12) throw ArgumentError("decimals must be in [0, 12]");
  if (r.empty()) return "-";
  u128 scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const u128 scaled = static_cast<u128>(r.correct) * scale;
  u128 q = scaled / r.total;
  const u128 rem = scaled % r.total;
  const u128 twice = rem * 2;
  if (twice > r.total || (twice == r.total && (q & 1) != 0)) ++q;

  u128 unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  auto to_dec = [](u128 v) {
    if (v == 0) return std::string("0");
    std::string s;
    while (v > 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return s;
  };
  std::string out = to_dec(q / unit);
  if (decimals > 0) {
    std::string frac = to_dec(q % unit);
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out;
}

}  // namespace naeval
