#pragma once

// What the simulation engine requires of a controller. A controller sees the
// measured output y and its own internal state, nothing else.

#include <array>
#include <concepts>
#include <cstddef>

namespace chemostat_es {

/// Reference pair and quasi-steady objective estimate, logged per sample.
struct Reference {
  double Dbar = 0.0;
  double sbar = 0.0;
  double Fhat = 0.0;
};

template <class C>
concept ControllerHook = requires(C& c, const C& cc, double t, double y, const typename C::State& x) {
  typename C::State;
  { cc.initial_state() } -> std::same_as<typename C::State>;
  // Called once at the start of every fixed step, before any stage evaluation.
  c.begin_step(t, x);
  { cc.input(y, x) } -> std::convertible_to<double>;
  { cc.derivative(y, x) } -> std::same_as<typename C::State>;
  // Keeps internal states inside their invariant sets after a step.
  { cc.project(x) } -> std::same_as<typename C::State>;
  { cc.reference(y, x) } -> std::same_as<Reference>;
};

}  // namespace chemostat_es
