#pragma once

namespace xpci {

// Vacuum speed of light, m/s (exact by SI definition).
inline constexpr double speed_of_light = 299792458.0;

// hc/e in m*keV: lambda_m = kev_to_wavelength_factor / E_keV.
inline constexpr double kev_to_wavelength_factor = 1.23984198e-9;

inline double wavelength_from_energy_kev(double energy_kev) {
  return kev_to_wavelength_factor / energy_kev;
}

}  // namespace xpci
