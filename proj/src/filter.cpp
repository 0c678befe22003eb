#include "gmmimm/filter.hpp"

#include "gmmimm/errors.hpp"

#include <cmath>

namespace gmmimm {

FilterState kf_predict(const FilterState &state, const LinearModel &model, const WheelInput &u) {
  if (!(state.p > 0.0) || !std::isfinite(state.x))
    throw NumericalError("kf_predict: invalid filter state");
  return {model.predict(state.x, u), model.a * model.a * state.p + model.q};
}

UpdateOutcome kf_update(const FilterState &prior, double z, double r) {
  if (!(r > 0.0))
    throw ParameterError("kf_update: measurement variance must be positive");
  UpdateOutcome out;
  out.innovation = z - prior.x;
  out.innovation_var = prior.p + r;
  const double gain = prior.p / out.innovation_var;
  out.state.x = prior.x + gain * out.innovation;
  out.state.p = (1.0 - gain) * prior.p;
  if (!(out.state.p > 0.0) || !std::isfinite(out.state.x))
    throw NumericalError("kf_update: posterior variance lost positivity");
  return out;
}

} // namespace gmmimm
