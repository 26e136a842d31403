#include "nmrm/numeric/adam.hpp"

#include <cmath>

namespace nmrm {

void adam_update(Vec& params, const Vec& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size())
    throw ContractError("adam_update: parameter, gradient and moment sizes differ");
  require(state.step >= 0, "adam_update: negative step counter");
  if (!grads.allFinite()) throw NumericError("adam_update: non-finite gradient");

  const AdamConfig& cfg = state.config;
  state.step += 1;
  const Real t = static_cast<Real>(state.step);
  const Real correction1 = 1.0 - std::pow(cfg.beta1, t);
  const Real correction2 = 1.0 - std::pow(cfg.beta2, t);

  if (cfg.weight_decay != 0.0) params *= (1.0 - cfg.learning_rate * cfg.weight_decay);

  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grads;
  state.second_moment =
      cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * grads.cwiseProduct(grads);

  const auto m_hat = state.first_moment.array() / correction1;
  const auto v_hat = state.second_moment.array() / correction2;
  params.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
}

}  // namespace nmrm
