#pragma once

#include <cmath>

#include "ergorate/summation.hpp"

namespace ergorate {

// 8-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
inline constexpr double kGl8Nodes[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                        0.9602898564975363};
inline constexpr double kGl8Weights[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                          0.1012285362903763};

// int_a^b f(u) du with one 8-point panel.
template <class F>
double gl8(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        double d = half * kGl8Nodes[i];
        s += kGl8Weights[i] * (f(mid - d) + f(mid + d));
    }
    return half * s;
}

// int_x0^x1 g(x) dx for x0 > 0, integrated in u = ln x with panels of width
// at most h.
template <class G>
double integrate_log(G&& g, double x0, double x1, double h = 0.25) {
    if (!(x1 > x0)) return 0.0;
    double u0 = std::log(x0), u1 = std::log(x1);
    int panels = static_cast<int>(std::ceil((u1 - u0) / h));
    if (panels < 1) panels = 1;
    double w = (u1 - u0) / panels;
    CompensatedSum s;
    auto f = [&](double u) {
        double x = std::exp(u);
        return g(x) * x;
    };
    for (int p = 0; p < panels; ++p) s.add(gl8(f, u0 + p * w, u0 + (p + 1) * w));
    return s.value();
}

}  // namespace ergorate
