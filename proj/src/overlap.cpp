#include "busgate/overlap.hpp"

#include <cmath>
#include <numbers>

namespace busgate {

Complex coherent_overlap(CoherentLabel la, CoherentLabel lb) {
    const Complex a = la.value;
    const Complex b = lb.value;
    // Re(exponent) = -|a - b|^2 / 2 <= 0: never overflows.
    const Complex expo = -0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(a) * b;
    return std::exp(expo);
}

Complex quadrature_amplitude(double p, CoherentLabel la, Convention conv) {
    const Complex a = la.value;
    if (conv == Convention::Unnormalized) {
        const Complex z = Complex(p, 0.0) - Complex(0.0, 2.0) * a;
        // Re(exponent) = -2 (Im a + p/4)^2 ... <= 0.
        return std::exp(-std::norm(a) - 0.25 * z * z);
    }
    static const double quartic = std::pow(std::numbers::pi, -0.25);
    const Complex expo = Complex(-0.5 * p * p - 0.5 * std::norm(a), 0.0) + 0.5 * a * a -
                         Complex(0.0, std::numbers::sqrt2 * p) * a;
    return quartic * std::exp(expo);
}

double full_line_mass(CoherentLabel la, Convention conv) {
    if (conv == Convention::Normalized) {
        return 1.0;  // completeness of the quadrature basis
    }
    const double y = la.value.imag();
    return std::sqrt(2.0 * std::numbers::pi) * std::exp(-2.0 * y * y);
}

}  // namespace busgate
