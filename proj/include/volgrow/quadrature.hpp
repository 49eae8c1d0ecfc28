#pragma once

#include <cmath>
#include <utility>

namespace volgrow {

/// 15-point Gauss-Legendre rule on [a, b].
template <class Fn>
double gauss15(Fn&& f, double a, double b) {
    static const double node[8] = {
        0.0000000000000000, 0.2011940939974345, 0.3941513470775634,
        0.5709721726085388, 0.7244177313601701, 0.8482065834104272,
        0.9372733924007060, 0.9879925180204854};
    static const double weight[8] = {
        0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
        0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
        0.0703660474881081, 0.0307532419961173};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = weight[0] * f(mid);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * node[i];
        acc += weight[i] * (f(mid + dx) + f(mid - dx));
    }
    return acc * half;
}

/// One-split adaptive refinement of gauss15: returns the two-half value and
/// an error estimate from the coarse/fine difference.
template <class Fn>
std::pair<double, double> gauss15_once(Fn&& f, double a, double b) {
    const double coarse = gauss15(f, a, b);
    const double mid = 0.5 * (a + b);
    const double fine = gauss15(f, a, mid) + gauss15(f, mid, b);
    return {fine, std::fabs(fine - coarse)};
}

}  // namespace volgrow
