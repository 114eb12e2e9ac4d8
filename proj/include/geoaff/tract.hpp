#pragma once

#include <compare>
#include <functional>
#include <string>

namespace geoaff {

// Census-tract key (GEOID-style string). TractIds order lexicographically and
// that order is the canonical index order used by every aligned container in
// the library: a joined region, its weight matrices and its result vectors all
// share it.
struct TractId {
  std::string value;

  TractId() = default;
  explicit TractId(std::string v) : value(std::move(v)) {}

  auto operator<=>(const TractId&) const = default;
};

}  // namespace geoaff

template <>
struct std::hash<geoaff::TractId> {
  std::size_t operator()(const geoaff::TractId& t) const noexcept {
    return std::hash<std::string>{}(t.value);
  }
};
