#pragma once

#include <string>
#include <vector>

#include "actens/activations.hpp"

namespace actens {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct RegistryEntry {
  std::string name;
  Act kind;
  int k;  // 0 when the kind takes no basis-size parameter
  bool max_input_sensitive;
  std::string what;  // short functional description for the listing
};

// Registered activations, sorted by name. melu_k4 and melu_k8 are separate
// entries resolving to the same kind with different basis sizes.
inline const std::vector<RegistryEntry>& activation_registry() {
  static const std::vector<RegistryEntry> reg = {
      {"aplu", Act::aplu, 0, true, "relu plus learnable piecewise-linear hinges"},
      {"elu", Act::elu, 0, false, "exponential saturation below zero"},
      {"flexible_melu", Act::flexible_melu, 8, true, "hat sum with learnable peak positions"},
      {"galu", Act::galu, 4, true, "prelu plus 3 biphasic hat units"},
      {"leaky_relu", Act::leaky_relu, 0, false, "fixed slope 0.01 below zero"},
      {"melu_2d", Act::melu_2d, 4, true, "pairwise hat sum over neighboring channels"},
      {"melu_galu", Act::melu_galu, 0, true, "learnable blend of triangular and biphasic hat sums"},
      {"melu_k4", Act::melu, 4, true, "prelu plus 3 triangular hat units"},
      {"melu_k8", Act::melu, 8, true, "prelu plus 7 triangular hat units"},
      {"mish", Act::mish, 0, false, "x * tanh(softplus(alpha * x)), learnable alpha"},
      {"pdelu", Act::pdelu, 0, false, "power-law decay below zero, learnable scale"},
      {"prelu", Act::prelu, 0, false, "learnable slope below zero"},
      {"relu", Act::relu, 0, false, "max(0, x)"},
      {"sgalu", Act::small_galu, 2, true, "prelu plus 1 biphasic hat unit"},
      {"soft_learnable", Act::soft_learnable, 0, false,
       "scaled softplus below zero, learnable scale"},
      {"soft_learnable2", Act::soft_learnable2, 0, false,
       "scaled softplus below zero, learnable scale and slope"},
      {"splash", Act::splash, 0, true, "mirrored hinge expansion with shared offsets"},
      {"srelu", Act::srelu, 0, false, "learnable two-threshold piecewise-linear unit"},
      {"srs", Act::srs, 0, false, "x / (x/alpha + exp(-x/beta)), learnable alpha and beta"},
      {"swish", Act::swish, 0, false, "x * sigmoid(x), fixed slope"},
      {"swish_learnable", Act::swish_learnable, 0, false, "x * sigmoid(beta x), learnable beta"},
      {"symmetric_galu", Act::symmetric_galu, 4, true, "even extension of the biphasic hat sum"},
      {"symmetric_melu", Act::symmetric_melu, 8, true, "even extension of the triangular hat sum"},
      {"tanelu", Act::tanelu, 0, false, "relu plus learnable tanh term"},
  };
  return reg;
}

inline const RegistryEntry* find_activation(const std::string& name) {
  for (const auto& e : activation_registry())
    if (e.name == name) return &e;
  return nullptr;
}

inline ActivationSpec spec_by_name(const std::string& name, double max_input = 1.0) {
  const RegistryEntry* e = find_activation(name);
  if (e == nullptr) throw std::invalid_argument("unknown activation: " + name);
  ActivationSpec s = make_spec(e->kind, max_input);
  if (e->k > 0) s.k = e->k;
  return s;
}

inline const std::string& activation_name(Act kind, int k = 0) {
  for (const auto& e : activation_registry()) {
    if (e.kind != kind) continue;
    if (kind == Act::melu && e.k != k) continue;
    return e.name;
  }
  throw std::invalid_argument("activation_name: unregistered kind");
}

}  // namespace actens
