#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "plcsim/channel.hpp"
#include "plcsim/errors.hpp"

namespace plcsim {

/// Flat transmit and noise PSDs plus a spectral-efficiency ceiling.
struct PsdConfig {
  double tx_dbm_per_hz = -50.0;
  double noise_dbm_per_hz = -140.0;
  double eta_max_bits_per_s_per_hz = 12.0;

  void validate() const {
    if (!(tx_dbm_per_hz > noise_dbm_per_hz)) throw DomainError("transmit PSD must exceed the noise PSD");
    if (!(eta_max_bits_per_s_per_hz > 0.0)) throw DomainError("spectral-efficiency cap must be positive");
  }

  /// Linear SNR of a 0 dB channel.
  double snr_linear() const { return std::pow(10.0, (tx_dbm_per_hz - noise_dbm_per_hz) / 10.0); }

  bool operator==(const PsdConfig&) const = default;
};

struct CapacityResult {
  double bps = 0.0;
};

/// Sum over bins of spacing * min(log2(1 + |H|^2 * SNR), eta_max).
inline CapacityResult link_capacity(const ChannelResponse& response, const PsdConfig& psd, const FrequencyGrid& fgrid) {
  fgrid.validate();
  psd.validate();
  if (response.h.size() != fgrid.n_points) throw ShapeError("channel response does not match the frequency grid");
  const double snr = psd.snr_linear();
  double per_hz_sum = 0.0;
  for (const auto& h : response.h) {
    per_hz_sum += std::min(std::log2(1.0 + std::norm(h) * snr), psd.eta_max_bits_per_s_per_hz);
  }
  return {per_hz_sum * fgrid.spacing()};
}

}  // namespace plcsim
