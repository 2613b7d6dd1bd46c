#pragma once

#include "busgate/types.hpp"

namespace busgate {

// <a|b> for coherent states: exp(-|a|^2/2 - |b|^2/2 + conj(a) b). The real
// part of the exponent is -|a - b|^2/2 <= 0, so this never overflows.
Complex coherent_overlap(CoherentLabel a, CoherentLabel b);

// Amplitude for a momentum-quadrature point outcome p on coherent state |a>.
//   Unnormalized: gamma = exp[-|a|^2 - (p - 2i a)^2 / 4]   (bare form)
//   Normalized:   <p|a> = pi^{-1/4} exp[-p^2/2 - |a|^2/2 + a^2/2 - i sqrt(2) a p]
// Both have non-positive real exponent part; no overflow.
Complex quadrature_amplitude(double p, CoherentLabel a, Convention conv);

// Full-line mass int |amp(p)|^2 dp in closed form. Normalized: exactly 1
// (completeness). Unnormalized: sqrt(2 pi) exp[-2 (Im a)^2].
double full_line_mass(CoherentLabel a, Convention conv);

}  // namespace busgate
