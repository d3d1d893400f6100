#include "qpdes/core/sim_time.hpp"

#include <cmath>

namespace qpdes {

SimTime SimTime::from_seconds(double seconds) {
  if (!(seconds >= 0.0)) fail(ErrorCode::kTimeOverflow, "negative or NaN duration");
  const double ps = std::round(seconds * 1e12);
  if (ps >= static_cast<double>(std::numeric_limits<rep>::max())) {
    fail(ErrorCode::kTimeOverflow, "duration exceeds sim time range");
  }
  return SimTime(static_cast<rep>(ps));
}

std::string SimTime::str() const {
  if (is_infinite()) return "inf";
  return std::to_string(ps_) + "ps";
}

}  // namespace qpdes
