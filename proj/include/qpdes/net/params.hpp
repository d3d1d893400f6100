#pragma once

#include "qpdes/core/sim_time.hpp"

namespace qpdes::net {

/// Hardware model parameters. Defaults are the reference values used
/// throughout; every field can be overridden from the run configuration.
struct HardwareParams {
  double memory_efficiency = 0.75;
  double memory_frequency_hz = 20e3;
  double coherence_time_s = 1.3;
  double raw_fidelity = 0.99;
  double detector_efficiency = 0.9;
  double count_rate_hz = 25e6;
  double dark_count_hz = 0.0;
  double resolution_s = 150e-12;
  double attenuation_db_per_km = 0.2;
  double light_speed_m_per_s = 2e8;
  double tdm_frame_s = 12.5e-9;
  double gate_fidelity = 1.0;
  double swap_success = 1.0;
  double qc_length_km = 1.0;
  double cc_latency_s = 0.3e-3;
  /// Linear-optics BSM succeeds on at most half of the Bell states.
  double bsm_intrinsic_success = 0.5;

  /// Router-to-BSM flight time over half of a link of `link_km`.
  SimTime qc_delay(double link_km) const;
  /// Photon survival over half of a link: 10^(-alpha * L / 10).
  double survival(double link_km) const;
  SimTime cc_delay() const { return SimTime::from_seconds(cc_latency_s); }
  SimTime resolution() const { return SimTime::from_seconds(resolution_s); }
  SimTime coherence() const { return SimTime::from_seconds(coherence_time_s); }
  SimTime tdm_frame() const { return SimTime::from_seconds(tdm_frame_s); }
  /// Zero when the count rate is unbounded (<= 0).
  SimTime dead_time() const;
};

/// Fidelity after one successful purification round on two pairs of fidelity f.
double purified_fidelity(double f);

}  // namespace qpdes::net
