#include "qpdes/net/params.hpp"

#include <cmath>

namespace qpdes::net {

SimTime HardwareParams::qc_delay(double link_km) const {
  return SimTime::from_seconds(link_km * 0.5 * 1000.0 / light_speed_m_per_s);
}

double HardwareParams::survival(double link_km) const {
  return std::pow(10.0, -attenuation_db_per_km * link_km * 0.5 / 10.0);
}

SimTime HardwareParams::dead_time() const {
  return count_rate_hz > 0 ? SimTime::from_seconds(1.0 / count_rate_hz) : SimTime::zero();
}

double purified_fidelity(double f) {
  const double g = 1.0 - f;
  return f * f / (f * f + g * g);
}

}  // namespace qpdes::net
