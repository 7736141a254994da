#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature (QUADPACK QAG layout).

#include "anisolab/core.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

namespace anisolab {

namespace detail {
inline constexpr std::array<double, 8> gk15_nodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_weights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> g7_weights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * gk15_weights[7];
    double gauss = fc * g7_weights[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * gk15_nodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += gk15_weights[j] * sum;
        if (j % 2 == 1) gauss += g7_weights[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}
} // namespace detail

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t panels = 0;
};

/// Integrates f over [breakpoints.front(), breakpoints.back()], starting from the given
/// partition and bisecting the panel with the largest error estimate until the total error
/// is below max(abs_tol, rel_tol * |value|). Throws ConvergenceError past max_panels.
template <class F>
[[nodiscard]] QuadratureResult integrate_adaptive(F&& f, std::span<const double> breakpoints,
                                                  double rel_tol, double abs_tol,
                                                  std::size_t max_panels) {
    require_config(breakpoints.size() >= 2, "integrate_adaptive: need at least one interval");
    std::priority_queue<detail::Panel> heap;
    double value = 0.0, error = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        auto p = detail::gauss_kronrod15(f, breakpoints[i], breakpoints[i + 1]);
        value += p.value;
        error += p.error;
        heap.push(p);
    }
    while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
        if (heap.size() >= max_panels)
            throw ConvergenceError("adaptive quadrature did not reach tolerance", value, error);
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw ConvergenceError("adaptive quadrature hit floating-point resolution", value, error);
        const auto left = detail::gauss_kronrod15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the incremental updates.
    QuadratureResult result;
    result.panels = heap.size();
    while (!heap.empty()) {
        result.value += heap.top().value;
        result.error += heap.top().error;
        heap.pop();
    }
    return result;
}

[[nodiscard]] inline std::vector<double> geometric_breakpoints(double a, double b, std::size_t pieces) {
    std::vector<double> out(pieces + 1);
    for (std::size_t i = 0; i <= pieces; ++i)
        out[i] = a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(pieces));
    out.front() = a;
    out.back() = b;
    return out;
}

[[nodiscard]] inline std::vector<double> uniform_breakpoints(double a, double b, std::size_t pieces) {
    std::vector<double> out(pieces + 1);
    for (std::size_t i = 0; i <= pieces; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(pieces);
    out.back() = b;
    return out;
}

} // namespace anisolab
