#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "hardycert/error.hpp"

namespace hardycert::quad {

enum class Transform { None, LogSubstitution, RationalCompactification };

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_subdivisions = 2000;
    Transform transform = Transform::LogSubstitution;

    void validate() const {
        if (!(rel_tol >= 100.0 * std::numeric_limits<double>::epsilon()))
            throw Error(ErrorCode::InvalidArgument, "rel_tol must be at least 100 machine epsilons");
        if (!(abs_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "abs_tol must be nonnegative");
        if (max_subdivisions < 1) throw Error(ErrorCode::InvalidArgument, "max_subdivisions must be positive");
    }
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    int subdivisions_used = 0;
    // Set when contributions kept growing toward an endpoint; value is then +-inf.
    bool diverging = false;
};

using Integrand = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Kronrod 15-point nodes on [-1,1] (nonnegative half) with the embedded 7-point Gauss weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Nodes and weights of the 15-point Kronrod rule mapped to [a,b]; used as a fixed rule elsewhere.
inline void kronrod15(double a, double b, std::array<double, 15>& x, std::array<double, 15>& w) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int j = 0; j < 7; ++j) {
        x[2 * j] = c - h * kXgk[j];
        w[2 * j] = h * kWgk[j];
        x[2 * j + 1] = c + h * kXgk[j];
        w[2 * j + 1] = h * kWgk[j];
    }
    x[14] = c;
    w[14] = h * kWgk[7];
}

namespace detail {

struct Panel {
    double a, b, value, error;
};

inline double sample(const Integrand& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y)) {
        std::ostringstream os;
        os.precision(17);
        os << "integrand returned " << y << " at x=" << x;
        throw Error(ErrorCode::NonFiniteSample, os.str());
    }
    return y;
}

inline Panel gk15(const Integrand& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a), ah = std::abs(h);
    const double fc = sample(f, c);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        f1[j] = sample(f, c - dx);
        f2[j] = sample(f, c + dx);
        resk += kWgk[j] * (f1[j] + f2[j]);
        resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    resasc *= ah;
    resabs *= ah;
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, resk * h, err};
}

// Global adaptive bisection, always splitting the panel with the largest error.
inline IntegralResult adaptive(const Integrand& f, double a, double b, double rel, double abs_tol, int max_sub) {
    auto cmp = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    std::vector<Panel> heap{gk15(f, a, b)};
    std::vector<Panel> frozen;
    int used = 1;
    auto totals = [&](double& v, double& e) {
        v = 0.0;
        e = 0.0;
        for (const auto& p : heap) v += p.value, e += p.error;
        for (const auto& p : frozen) v += p.value, e += p.error;
    };
    double val = heap[0].value, err = heap[0].error;
    while (err > std::max(rel * std::abs(val), abs_tol) && used < max_sub && !heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
            frozen.push_back(worst);
            continue;
        }
        const Panel l = gk15(f, worst.a, mid), r = gk15(f, mid, worst.b);
        ++used;
        heap.push_back(l);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(r);
        std::push_heap(heap.begin(), heap.end(), cmp);
        val += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        if (used % 64 == 0) totals(val, err);
    }
    totals(val, err);
    IntegralResult out;
    out.value = val;
    out.error_estimate = err;
    out.subdivisions_used = used;
    out.converged = err <= std::max(rel * std::abs(val), abs_tol);
    return out;
}

// Integral of g over (-inf, u0] in a log variable, extended in chunks of doubling width
// until two consecutive chunks are negligible, or flagged diverging when they keep growing.
inline IntegralResult chunked_left(const Integrand& g, double u0, double rel, double abs_tol, int max_sub,
                                   const std::function<bool(double)>& resolvable) {
    IntegralResult out;
    double width = 4.0, upper = u0, prev = -1.0;
    int quiet = 0, growing = 0;
    for (int k = 0; k < 48; ++k) {
        double lower = upper - width;
        if (!resolvable(lower)) {
            lower = upper;
            while (resolvable(lower - 1.0)) lower -= 1.0;
            if (!(lower < upper)) break;
        }
        const double chunk_abs = std::max(0.1 * abs_tol, 0.1 * rel * std::abs(out.value));
        const auto r = adaptive(g, lower, upper, rel, chunk_abs, std::max(8, max_sub - out.subdivisions_used));
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        out.subdivisions_used += r.subdivisions_used;
        out.converged = out.converged && r.converged;
        const double mag = std::abs(r.value);
        const double target = std::max(abs_tol, rel * std::abs(out.value));
        if (prev >= 0.0 && mag > prev * 1.0000001 && mag > 0.0) ++growing;
        else growing = 0;
        if (growing >= 4) {
            out.diverging = true;
            out.converged = false;
            out.value = std::copysign(kInf, out.value);
            return out;
        }
        quiet = (mag <= 0.1 * target && (prev < 0.0 || mag <= prev)) ? quiet + 1 : 0;
        prev = mag;
        upper = lower;
        if (quiet >= 2) {
            out.error_estimate += mag;
            return out;
        }
        if (!resolvable(upper - 1e-3)) break;
        width = std::min(2.0 * width, 64.0);
    }
    // Ran out of resolvable range. A power-law endpoint behaves like C e^{k u} in the log variable;
    // when two local slopes agree the unresolved remainder g(u)/k is added analytically.
    if (prev > 0.0 && resolvable(upper)) {
        // Sample well inside the resolvable range: near the edge x is quantized to a few ulps.
        const double us = upper + 10.0;
        const double g0 = g(us), g1 = g(us + 1.0), g2 = g(us + 2.0);
        if (g0 != 0.0 && g1 != 0.0 && g2 != 0.0 && (g0 > 0) == (g1 > 0) && (g1 > 0) == (g2 > 0)) {
            const double k1 = std::log(g1 / g0), k2 = std::log(g2 / g1);
            if (k1 > 0.0 && k2 > 0.0 && std::abs(k1 - k2) <= 0.01 * k1) {
                const double rem = g0 * std::exp(-k1 * (us - upper)) / k1;
                out.value += rem;
                out.error_estimate += std::abs(rem) * std::abs(k1 - k2) / k1;
                prev = 0.0;
            } else if (k1 <= 1e-3 && std::abs(k1 - k2) <= 0.01 * std::max(std::abs(k1), 0.1)) {
                // not decaying toward the endpoint: x^{-1} or worse
                out.diverging = true;
            }
        }
    }
    const double target = std::max(abs_tol, rel * std::abs(out.value));
    if (!(prev <= target)) {
        out.converged = false;
        if (growing >= 1 && prev > 0.0) out.diverging = true;
    }
    if (out.diverging) out.converged = false;
    out.error_estimate += std::max(prev, 0.0);
    if (out.diverging) out.value = std::copysign(kInf, out.value);
    return out;
}

// An offset e^u from x0 is usable while it is well above the spacing of doubles near x0,
// otherwise the integrand only sees quantization noise.
inline bool resolvable_offset(double x0, double u) {
    return u > -700.0 && std::exp(u) > 1e-9 * std::abs(x0);
}

inline IntegralResult combine(const IntegralResult& x, const IntegralResult& y) {
    IntegralResult out;
    out.value = x.value + y.value;
    out.error_estimate = x.error_estimate + y.error_estimate;
    out.converged = x.converged && y.converged;
    out.subdivisions_used = x.subdivisions_used + y.subdivisions_used;
    out.diverging = x.diverging || y.diverging;
    if (std::isnan(out.value)) out.value = kInf;
    return out;
}

// Finite [a,b]: cheap plain attempt first, then graded halves toward both endpoints.
inline IntegralResult finite_graded(const Integrand& f, double a, double b, const QuadratureSpec& s) {
    IntegralResult plain;
    plain.converged = false;
    try {
        plain = adaptive(f, a, b, s.rel_tol, s.abs_tol, std::min(s.max_subdivisions, 48));
    } catch (const Error& e) {
        // Panels hugging a singular endpoint may round a node onto it; the graded path avoids that.
        if (e.code() != ErrorCode::NonFiniteSample) throw;
        plain.subdivisions_used = 48;
    }
    if (plain.converged) return plain;
    const double c = 0.5 * (a + b);
    const double half = c - a;
    const Integrand left = [&](double u) {
        const double e = std::exp(u);
        return f(a + e) * e;
    };
    const Integrand right = [&](double u) {
        const double e = std::exp(u);
        return f(b - e) * e;
    };
    const auto res_left = [a](double u) { return resolvable_offset(a, u); };
    const auto res_right = [b](double u) { return resolvable_offset(b, u); };
    const int budget = std::max(8, s.max_subdivisions / 2);
    auto l = chunked_left(left, std::log(half), s.rel_tol, 0.5 * s.abs_tol, budget, res_left);
    auto r = chunked_left(right, std::log(half), s.rel_tol, 0.5 * s.abs_tol, budget, res_right);
    auto out = combine(l, r);
    out.subdivisions_used += plain.subdivisions_used;
    return out;
}

inline IntegralResult upper_infinite(const Integrand& f, double a, const QuadratureSpec& s) {
    if (s.transform == Transform::LogSubstitution) {
        const Integrand g = [&](double u) {
            const double e = std::exp(u);
            return f(a + e) * e;
        };
        const double uc = std::log(std::max(std::abs(a), 1.0));
        const double lo = uc - 8.0, hi = uc + 8.0;
        auto core = adaptive(g, lo, hi, s.rel_tol, s.abs_tol, s.max_subdivisions);
        const auto res_down = [a](double u) { return resolvable_offset(a, u); };
        auto down = chunked_left(g, lo, s.rel_tol, s.abs_tol + 0.1 * s.rel_tol * std::abs(core.value),
                                 s.max_subdivisions, res_down);
        const Integrand gflip = [&](double v) { return g(-v); };
        const auto res_up = [](double v) { return -v < 700.0; };
        auto up = chunked_left(gflip, -hi, s.rel_tol, s.abs_tol + 0.1 * s.rel_tol * std::abs(core.value),
                               s.max_subdivisions, res_up);
        return combine(combine(core, down), up);
    }
    const Integrand g = [&](double t) {
        const double om = 1.0 - t;
        return f(a + t / om) / (om * om);
    };
    QuadratureSpec inner = s;
    return finite_graded(g, 0.0, 1.0, inner);
}

}  // namespace detail

inline IntegralResult integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (std::isnan(a) || std::isnan(b)) throw Error(ErrorCode::InvalidArgument, "NaN integration limit");
    if (a == b) return {};
    if (a > b) {
        auto r = integrate(f, b, a, spec);
        r.value = -r.value;
        return r;
    }
    const bool fin_a = std::isfinite(a), fin_b = std::isfinite(b);
    if (fin_a && fin_b) {
        if (spec.transform == Transform::LogSubstitution) return detail::finite_graded(f, a, b, spec);
        return detail::adaptive(f, a, b, spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
    }
    QuadratureSpec s = spec;
    if (s.transform == Transform::None) s.transform = Transform::RationalCompactification;
    if (fin_a) return detail::upper_infinite(f, a, s);
    const Integrand reflected = [&](double y) { return f(-y); };
    if (fin_b) return detail::upper_infinite(reflected, -b, s);
    QuadratureSpec half = s;
    half.abs_tol = 0.5 * s.abs_tol;
    return detail::combine(detail::upper_infinite(reflected, 0.0, half), detail::upper_infinite(f, 0.0, half));
}

// Running integrals from a to each grid point. Pieces after a divergent one are +inf.
inline std::vector<double> cumulative(const Integrand& f, double a, const std::vector<double>& grid,
                                      const QuadratureSpec& spec = {}) {
    std::vector<double> out(grid.size());
    double acc = 0.0, left = a;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < left) throw Error(ErrorCode::InvalidArgument, "cumulative grid must be sorted and >= a");
        if (std::isfinite(acc) && grid[i] > left) acc += integrate(f, left, grid[i], spec).value;
        out[i] = acc;
        left = grid[i];
    }
    return out;
}

}  // namespace hardycert::quad
