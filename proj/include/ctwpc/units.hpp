#pragma once

#include <numbers>

namespace ctwpc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Flux quantum h/2e and reduced flux quantum hbar/2e, in Wb.
inline constexpr double kFluxQuantum = 2.067833848e-15;
inline constexpr double kReducedFluxQuantum = kFluxQuantum / kTwoPi;

inline constexpr double kNano = 1e-9;
inline constexpr double kPico = 1e-12;
inline constexpr double kFemto = 1e-15;
inline constexpr double kGiga = 1e9;

inline constexpr double ghz_to_rad(double f_ghz) { return kTwoPi * f_ghz * kGiga; }
inline constexpr double rad_to_ghz(double omega) { return omega / (kTwoPi * kGiga); }

}  // namespace ctwpc
