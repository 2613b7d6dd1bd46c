#pragma once

#include <cmath>
#include <complex>

#include "busgate/errors.hpp"

namespace busgate {

using Complex = std::complex<double>;

// Homodyne amplitude normalization. Unnormalized keeps the bare Gaussian
// overlap gamma = exp[-|a|^2 - (p - 2i a)^2 / 4]; Normalized is the proper
// momentum-quadrature wavefunction <p|a> with unit L2 norm. The two differ
// by a factor of two in the exponent of every derived error probability, so
// the distinction is carried through the whole library and every reported
// quantity is tagged with its convention.
enum class Convention { Unnormalized, Normalized };

inline const char* convention_name(Convention c) {
    return c == Convention::Unnormalized ? "paper" : "normalized";
}

// Exponents scale with |label|^2; this guard keeps every exp() argument the
// library can form comfortably inside double range.
inline constexpr double kMaxCoherentLabel = 1.0e4;

// Complex amplitude labelling a coherent state. Validated on construction:
// finite and bounded by kMaxCoherentLabel.
struct CoherentLabel {
    Complex value;

    CoherentLabel(Complex v) : value(v) { validate(); }  // NOLINT(google-explicit-constructor)
    CoherentLabel(double v) : value(v, 0.0) { validate(); }  // NOLINT

private:
    void validate() const {
        const double m = std::abs(value);
        if (!std::isfinite(m) || m > kMaxCoherentLabel) {
            throw usage_error("CoherentLabel: |value| must be finite and <= 1e4, got magnitude " +
                              std::to_string(m));
        }
    }
};

}  // namespace busgate
