#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "aquanet/rng.hpp"

namespace aquanet {

// Application-layer payloads are structured documents. nlohmann::json keeps
// object keys sorted, so dump() is canonical and digests are reproducible.
using Document = nlohmann::json;

inline std::string payload_digest(const Document& doc) {
  const std::uint64_t h = fnv1a64(doc.is_null() ? std::string{} : doc.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Exact round-trip for fixed-point values carried as JSON decimals: a
// thousandth stored as double survives llround(x * 1000) for any magnitude
// this simulator produces.
inline std::int64_t milli_from_json(const Document& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>() * 1000;
  return std::llround(v.get<double>() * 1000.0);
}

inline double milli_to_double(std::int64_t milli) { return static_cast<double>(milli) / 1000.0; }

}  // namespace aquanet
