#pragma once

// Gate tolerances.  Fixed here, not in manifests, so a manifest cannot
// loosen a gate.  The acceptance binary re-checks rows against these.

namespace sbm::tol {

inline constexpr double closed_form = 1e-9;
inline constexpr double pde_relative = 1e-6;
inline constexpr double exponent = 0.02;
inline constexpr double r2_min = 0.999;
inline constexpr double kpp_rate = 0.01;
inline constexpr double z_max = 3.0;
inline constexpr double normalization = 0.02;
inline constexpr double frontier_fraction = 0.9;
inline constexpr double tail_alpha_d1 = 0.05;
inline constexpr double tail_alpha_d3 = 0.1;
inline constexpr double tail_p_d3 = 0.2;
inline constexpr double synthetic_dimension = 0.05;
inline constexpr double sbm_dimension = 0.3;
inline constexpr double martingale_slope = 0.05;
inline constexpr double energy_relative = 0.01;
inline constexpr double psi_small_theta = 0.02;
inline constexpr double psi_spread = 50.0;
inline constexpr double field_explosion = 5.0;
inline constexpr double convrate_spread = 0.25;

}  // namespace sbm::tol
