#pragma once

#include <cmath>

namespace sste {

inline constexpr double kEarthRadiusM = 6'371'000.0;  // WGS84 mean radius

// Great-circle distance in meters between two (lat, lon) points in degrees.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kDeg = M_PI / 180.0;
  const double dlat = (lat2 - lat1) * kDeg;
  const double dlon = (lon2 - lon1) * kDeg;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

// Hour-of-week bucket in [0, 167]: day-of-week * 24 + hour-of-day, UTC.
// Day 0 is Sunday (the epoch, 1970-01-01, was a Thursday).
inline int hour_of_week(long long epoch_seconds) {
  long long days = epoch_seconds / 86400;
  long long rem = epoch_seconds % 86400;
  if (rem < 0) {  // euclidean floor for pre-epoch times
    days -= 1;
    rem += 86400;
  }
  const int dow = static_cast<int>(((days + 4) % 7 + 7) % 7);
  return dow * 24 + static_cast<int>(rem / 3600);
}

}  // namespace sste
