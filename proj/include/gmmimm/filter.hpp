#pragma once

#include "gmmimm/sysid.hpp"

namespace gmmimm {

/// Scalar estimate of body angular velocity.
struct FilterState {
  double x = 0.0; // [rad/s]
  double p = 1.0; // [(rad/s)^2], > 0
};

/// Posterior after one measurement plus the (prior) innovation statistics.
struct UpdateOutcome {
  FilterState state;
  double innovation = 0.0;     // y = z - x_prior
  double innovation_var = 0.0; // S = p_prior + r
};

inline constexpr double kDefaultInitialVariance = 1.0;

/// x- = a x + b1 u_l + b2 u_r,  p- = a^2 p + q.
FilterState kf_predict(const FilterState &state, const LinearModel &model, const WheelInput &u);

/// Direct measurement of the state (C = 1, D = 0).
UpdateOutcome kf_update(const FilterState &prior, double z, double r);

} // namespace gmmimm
