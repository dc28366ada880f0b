#pragma once

#include <cmath>
#include <string_view>

#include "polymer/error.hpp"

namespace polymer {

enum class Regime { globular, extended };

inline std::string_view to_string(Regime r) { return r == Regime::globular ? "globular" : "extended"; }

struct RegimeTag {
  double chi;
  Regime regime;
};

/// chi = (beta - beta_cr) sqrt(t). chi >= 1 is globular; the boundary
/// chi = 1 belongs to both bands and is tagged globular.
inline RegimeTag classify_regime(double beta, double t, double beta_cr) {
  if (!(t > 0.0)) throw ValidationError("classify_regime: t must be positive");
  const double chi = (beta - beta_cr) * std::sqrt(t);
  return {chi, chi >= 1.0 ? Regime::globular : Regime::extended};
}

}  // namespace polymer
