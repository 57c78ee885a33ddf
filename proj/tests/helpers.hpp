#pragma once

// Shared ground-truth systems for the test suite: the two-mode damped
// oscillator with a linear switching line, and the two-mode quartic
// oscillator switching on an energy level set.

#include <initializer_list>

#include "switchid/core.hpp"

namespace testutil {

inline switchid::Vec make_vec(std::initializer_list<double> values) {
  switchid::Vec v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline switchid::Vec vec2(double x, double y) { return make_vec({x, y}); }

/// Single-mode harmonic oscillator xdot = y, ydot = -x (period 2*pi).
inline switchid::SwitchingSystemModel harmonic_oscillator() {
  switchid::SwitchingSystemModel model;
  model.basis = switchid::MonomialBasis::create(2, 1);
  switchid::ModeDynamics mode;
  mode.coeffs.resize(2, 3);
  mode.coeffs << 0.0, 0.0, 1.0,  // xdot = y
      0.0, -1.0, 0.0;            // ydot = -x
  model.modes = {mode};
  return model;
}

/// Two-mode linear oscillator: damping gamma1 for x >= 0, gamma2 for x < 0,
/// switching across the line x = 0.
inline switchid::SwitchingSystemModel damped_oscillator_sls(
    double gamma1 = 0.1, double gamma2 = 0.5) {
  switchid::SwitchingSystemModel model;
  model.basis = switchid::MonomialBasis::create(2, 1);
  switchid::ModeDynamics m1, m2;
  m1.coeffs.resize(2, 3);
  m1.coeffs << 0.0, 0.0, 1.0, 0.0, -1.0, -gamma1;
  m2.coeffs.resize(2, 3);
  m2.coeffs << 0.0, 0.0, 1.0, 0.0, -1.0, -gamma2;
  model.modes = {m1, m2};

  switchid::SurfaceSet surfaces;
  surfaces.basis = model.basis;
  surfaces.surfaces = {make_vec({0.0, 1.0, 0.0})};  // f(x, y) = x
  model.surfaces = surfaces;
  switchid::ModeBook book;
  book.codes = {{+1}, {-1}};
  model.modebook = book;
  return model;
}

/// Two-mode quartic oscillator (omega = 1, quartic coefficient 0.3):
///   mode 1 (energy <= 3):  ydot = -x - 0.3x^3 - 0.1y^3 - 0.1 + 0.2x^2 + 0.3xy
///   mode 2 (energy  > 3):  ydot = -x - 0.3x^3 - 0.1y^3 + 0.1xy + 0.1x^2 - 0.1y
/// switching on the energy level set y^2/2 + x^2/2 + 0.075x^4 = 3.
inline switchid::SwitchingSystemModel quartic_oscillator_sps() {
  switchid::SwitchingSystemModel model;
  model.basis = switchid::MonomialBasis::create(2, 4);
  // Monomial order: 1, x, y, x^2, xy, y^2, x^3, x^2y, xy^2, y^3,
  //                 x^4, x^3y, x^2y^2, xy^3, y^4.
  switchid::ModeDynamics m1, m2;
  m1.coeffs = switchid::Mat::Zero(2, 15);
  m1.coeffs(0, 2) = 1.0;  // xdot = y
  m1.coeffs(1, 0) = -0.1;
  m1.coeffs(1, 1) = -1.0;
  m1.coeffs(1, 3) = 0.2;
  m1.coeffs(1, 4) = 0.3;
  m1.coeffs(1, 6) = -0.3;
  m1.coeffs(1, 9) = -0.1;
  m2.coeffs = switchid::Mat::Zero(2, 15);
  m2.coeffs(0, 2) = 1.0;
  m2.coeffs(1, 1) = -1.0;
  m2.coeffs(1, 2) = -0.1;
  m2.coeffs(1, 3) = 0.1;
  m2.coeffs(1, 4) = 0.1;
  m2.coeffs(1, 6) = -0.3;
  m2.coeffs(1, 9) = -0.1;
  model.modes = {m1, m2};

  switchid::SurfaceSet surfaces;
  surfaces.basis = model.basis;
  switchid::Vec f = switchid::Vec::Zero(15);
  f(0) = -3.0;
  f(3) = 0.5;
  f(5) = 0.5;
  f(10) = 0.075;
  surfaces.surfaces = {f};
  model.surfaces = surfaces;
  switchid::ModeBook book;
  book.codes = {{-1}, {+1}};  // mode 1 inside the energy bowl
  model.modebook = book;
  return model;
}

}  // namespace testutil
