#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hardycert/error.hpp"
#include "hardycert/quad.hpp"

namespace hardycert::weights {

using quad::kInf;

// h(r) = r^gamma (1 + r^beta)^alpha
struct PowerType {
    double gamma = 0.0, beta = 2.0, alpha = -2.0;
};

struct Exponential {
    double rate = 1.0;
};

enum class LinearizedVariant { W1, W2, W2Eps };

// Weights of the linearised entropy / Fisher information around a Barenblatt profile.
struct BarenblattLinearized {
    double m = 0.875, p = 1.8;
    LinearizedVariant variant = LinearizedVariant::W1;
    double eps = 0.5;

    double sigma() const { return m + (p - 2.0) / (p - 1.0); }
    double k() const { return (1.0 - sigma()) * (p - 1.0) / (p * m); }
    double beta() const { return p / (p - 1.0); }
};

// Piecewise-linear through (r, h) nodes, zero outside the node range.
struct Tabulated {
    std::vector<std::pair<double, double>> nodes;
};

using FamilyKind = std::variant<PowerType, Exponential, BarenblattLinearized, Tabulated>;

struct RadialWeightFamily {
    FamilyKind kind = PowerType{};
    int dimension = 1;
    // The family is evaluated as h(r / scale).
    double scale = 1.0;
};

struct WeightSample {
    double value = 0.0;
    bool singular_at_zero = false;
};

inline double surface_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

inline double interpolate_nodes(const std::vector<std::pair<double, double>>& nodes, double x) {
    if (nodes.empty() || x < nodes.front().first || x > nodes.back().first) return 0.0;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x,
                               [](double v, const std::pair<double, double>& n) { return v < n.first; });
    if (it == nodes.end()) return nodes.back().second;
    if (it == nodes.begin()) return nodes.front().second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    const double t = (x - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

inline void validate(const RadialWeightFamily& f) {
    if (f.dimension < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
    if (!(f.scale > 0.0) || !std::isfinite(f.scale)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
    std::visit(
        [](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PowerType>) {
                if (!(k.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "PowerType requires beta > 0");
                if (!std::isfinite(k.gamma) || !std::isfinite(k.alpha))
                    throw Error(ErrorCode::InvalidArgument, "PowerType exponents must be finite");
            } else if constexpr (std::is_same_v<T, Exponential>) {
                if (!(k.rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "Exponential requires rate > 0");
            } else if constexpr (std::is_same_v<T, BarenblattLinearized>) {
                if (!(k.m > 0.0) || !(k.p > 1.0)) throw Error(ErrorCode::InvalidArgument, "need m > 0 and p > 1");
                if (!(k.sigma() < 1.0)) throw Error(ErrorCode::InvalidArgument, "linearised weights need sigma < 1");
                if (k.variant == LinearizedVariant::W2Eps && !(k.eps > 0.0 && k.eps < 1.0))
                    throw Error(ErrorCode::InvalidArgument, "eps must lie in (0,1)");
            } else {
                if (k.nodes.size() < 2) throw Error(ErrorCode::InvalidArgument, "Tabulated needs >= 2 nodes");
                for (std::size_t i = 0; i < k.nodes.size(); ++i) {
                    if (k.nodes[i].first < 0.0 || k.nodes[i].second < 0.0 || !std::isfinite(k.nodes[i].second))
                        throw Error(ErrorCode::InvalidArgument, "Tabulated nodes need r >= 0 and finite h >= 0");
                    if (i > 0 && !(k.nodes[i].first > k.nodes[i - 1].first))
                        throw Error(ErrorCode::InvalidArgument, "Tabulated nodes must be strictly increasing");
                }
            }
        },
        f.kind);
}

// Unchecked evaluation for r > 0.
inline double h(const RadialWeightFamily& f, double r) {
    const double x = r / f.scale;
    return std::visit(
        [x](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PowerType>) {
                if (x == 0.0) return k.gamma == 0.0 ? 1.0 : (k.gamma > 0.0 ? 0.0 : kInf);
                // log form keeps r^gamma (1+r^beta)^alpha finite where the factors alone would overflow
                const double lx = std::log(x);
                const double lb = k.beta * lx;
                const double l1p = lb > 35.0 ? lb + std::log1p(std::exp(-lb)) : std::log1p(std::exp(lb));
                return std::exp(k.gamma * lx + k.alpha * l1p);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return std::exp(-k.rate * x);
            } else if constexpr (std::is_same_v<T, BarenblattLinearized>) {
                const double s = k.sigma(), p = k.p;
                const double base = 1.0 + k.k() * std::pow(x, k.beta());
                switch (k.variant) {
                case LinearizedVariant::W1: return std::pow(base, (2.0 - s) / (s - 1.0)) / k.m;
                case LinearizedVariant::W2:
                    if (x == 0.0) return p < 2.0 ? kInf : (p == 2.0 ? 1.0 : 0.0);
                    return std::pow(x, (p - 2.0) / (p - 1.0)) * std::pow(base, 1.0 / (s - 1.0));
                case LinearizedVariant::W2Eps:
                    return std::pow(base, 1.0 / (s - 1.0)) * std::pow(k.eps + std::pow(x, 1.0 / (p - 1.0)), p - 2.0);
                }
                return 0.0;
            } else {
                return interpolate_nodes(k.nodes, x);
            }
        },
        f.kind);
}

// r^k h(r), in log form for PowerType so that extreme radii neither overflow nor give 0*inf.
inline double h_times_power(const RadialWeightFamily& f, double r, double k) {
    if (const auto* p = std::get_if<PowerType>(&f.kind); p && r > 0.0) {
        const double x = r / f.scale, lx = std::log(x), lb = p->beta * lx;
        const double l1p = lb > 35.0 ? lb + std::log1p(std::exp(-lb)) : std::log1p(std::exp(lb));
        return std::exp((p->gamma + k) * lx + p->alpha * l1p + k * std::log(f.scale));
    }
    const double v = h(f, r);
    return v == 0.0 ? 0.0 : std::pow(r, k) * v;
}

inline WeightSample evaluate(const RadialWeightFamily& f, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::DomainError, "radius must be finite and >= 0");
    const double v = h(f, r);
    if (r == 0.0 && std::isinf(v)) return {kInf, true};
    return {v, false};
}

// Power exponents of h at the origin and at infinity; nullopt where h is not power-like there.
struct PowerAsymptotics {
    std::optional<double> origin;
    std::optional<double> tail;
    bool tail_fast = false;        // decays faster than any power
    bool compact_support = false;  // vanishes beyond a finite radius
};

inline PowerAsymptotics asymptotics(const RadialWeightFamily& f) {
    return std::visit(
        [](const auto& k) -> PowerAsymptotics {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PowerType>) {
                return {k.gamma, k.gamma + k.alpha * k.beta, false, false};
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return {0.0, std::nullopt, true, false};
            } else if constexpr (std::is_same_v<T, BarenblattLinearized>) {
                const double s = k.sigma(), p = k.p, b = k.beta();
                switch (k.variant) {
                case LinearizedVariant::W1: return {0.0, b * (2.0 - s) / (s - 1.0), false, false};
                case LinearizedVariant::W2:
                    return {(p - 2.0) / (p - 1.0), (p - 2.0) / (p - 1.0) + b / (s - 1.0), false, false};
                case LinearizedVariant::W2Eps:
                    return {0.0, b / (s - 1.0) + (p - 2.0) / (p - 1.0), false, false};
                }
                return {};
            } else {
                const bool zero_start = k.nodes.front().first > 0.0;
                PowerAsymptotics a;
                a.compact_support = true;
                if (zero_start) a.origin = std::nullopt;
                return a;
            }
        },
        f.kind);
}

enum class Finiteness { Finite, ProvenInfinite, NumericallyDivergent };

inline const char* to_string(Finiteness f) {
    switch (f) {
    case Finiteness::Finite: return "Finite";
    case Finiteness::ProvenInfinite: return "ProvenInfinite";
    case Finiteness::NumericallyDivergent: return "NumericallyDivergent";
    }
    return "?";
}

struct MassResult {
    Finiteness verdict = Finiteness::Finite;
    double value = 0.0;  // includes the sphere surface factor
    double error = 0.0;
    std::string cause;
    bool finite() const { return verdict == Finiteness::Finite; }
};

inline quad::QuadratureSpec default_spec(double rel = 1e-8) {
    quad::QuadratureSpec s;
    s.rel_tol = rel;
    s.max_subdivisions = 4000;
    return s;
}

// Exponent test for the radial measure r^{N-1} r^e near 0 and infinity.
inline std::optional<std::string> exponent_divergence(const PowerAsymptotics& a, int n) {
    if (a.origin && n + *a.origin <= 0.0) return "origin exponent N+gamma <= 0";
    if (a.tail && !a.tail_fast && !a.compact_support && n + *a.tail >= 0.0) return "tail exponent N+gamma+alpha*beta >= 0";
    return std::nullopt;
}

inline MassResult mass(const RadialWeightFamily& f, double rel_tol = 1e-10) {
    validate(f);
    const int n = f.dimension;
    const double surf = surface_area(n);
    MassResult out;
    if (auto why = exponent_divergence(asymptotics(f), n)) {
        out.verdict = Finiteness::ProvenInfinite;
        out.value = kInf;
        out.cause = *why;
        return out;
    }
    if (const auto* e = std::get_if<Exponential>(&f.kind)) {
        out.value = surf * std::tgamma(n) * std::pow(f.scale / e->rate, n);
        return out;
    }
    auto integrand = [&](double r) { return h_times_power(f, r, n - 1); };
    quad::IntegralResult r;
    if (const auto* t = std::get_if<Tabulated>(&f.kind)) {
        double acc = 0.0, err = 0.0;
        auto s = default_spec(rel_tol);
        s.transform = quad::Transform::None;
        for (std::size_t i = 1; i < t->nodes.size(); ++i) {
            auto piece = quad::integrate(integrand, f.scale * t->nodes[i - 1].first, f.scale * t->nodes[i].first, s);
            acc += piece.value;
            err += piece.error_estimate;
        }
        r.value = acc;
        r.error_estimate = err;
        if (!std::isfinite(acc) || acc > 1e300) {
            out.verdict = Finiteness::NumericallyDivergent;
            throw Error(ErrorCode::Inconclusive, "tabulated mass exceeds the overflow cap");
        }
    } else {
        r = quad::integrate(integrand, 0.0, kInf, default_spec(rel_tol));
        if (r.diverging) {
            out.verdict = Finiteness::NumericallyDivergent;
            out.value = kInf;
            out.cause = "radial integral grows without bound";
            return out;
        }
    }
    out.value = surf * r.value;
    out.error = surf * r.error_estimate;
    return out;
}

struct MassAndMedian {
    double mass = 0.0;
    double median = 0.0;
    double tolerance = 0.0;  // achieved |CDF(median) - mass/2|
};

// Bracket for PowerType medians, valid for alpha < 0 < beta with N+gamma > 0 > N+gamma+alpha*beta.
inline std::optional<std::pair<double, double>> power_median_bracket(const PowerType& k, int n, double scale = 1.0) {
    const double ng = n + k.gamma, tail = n + k.gamma + k.alpha * k.beta;
    if (!(k.alpha < 0.0 && k.beta > 0.0 && ng > 0.0 && tail < 0.0)) return std::nullopt;
    const double aa = std::abs(k.alpha) + 1.0;
    const double lo = std::pow(ng / (std::pow(2.0, aa) * std::abs(tail)), 1.0 / ng);
    const double hi = std::pow(2.0, aa / std::abs(tail));
    return std::make_pair(scale * lo, scale * hi);
}

namespace detail {

// Smallest x in [lo, hi] with cdf(x) >= target - tol, given cdf(lo) = c_lo < target - tol <= cdf(hi).
template <class Increment>
double bisect_cdf(double lo, double hi, double c_lo, double target, double tol, Increment&& inc, double& c_at) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double c_mid = c_lo + inc(lo, mid);
        if (c_mid >= target - 0.01 * tol) {
            hi = mid;
        } else {
            lo = mid;
            c_lo = c_mid;
        }
        if (hi - lo <= 1e-15 * std::max(std::abs(hi), 1e-300)) break;
    }
    c_at = c_lo + inc(lo, hi);
    return hi;
}

}  // namespace detail

inline MassAndMedian median(const RadialWeightFamily& f, double median_tol = 1e-10) {
    const auto m = mass(f, 1e-12);
    if (!m.finite()) throw Error(ErrorCode::MassInfinite, "median needs finite mass: " + m.cause);
    if (!(m.value > 0.0)) throw Error(ErrorCode::MassInfinite, "median needs positive mass");
    const int n = f.dimension;
    const double surf = surface_area(n);
    auto spec = default_spec(1e-12);
    auto dens = [&](double r) { return surf * h_times_power(f, r, n - 1); };
    auto inc = [&](double a, double b) { return quad::integrate(dens, a, b, spec).value; };
    const double target = 0.5 * m.value, tol = median_tol * m.value;
    double lo = 0.0, c_lo = 0.0, hi = f.scale;
    if (const auto* t = std::get_if<Tabulated>(&f.kind)) hi = f.scale * t->nodes.back().first;
    double c_hi = inc(0.0, hi);
    while (c_hi < target - tol) {
        lo = hi;
        c_lo = c_hi;
        hi *= 2.0;
        c_hi += inc(lo, hi);
        if (hi > 1e300) throw Error(ErrorCode::Inconclusive, "median bracket search overflowed");
    }
    // Tighten the lower end from below so bisection starts from a bracket.
    double c_at = 0.0;
    const double eta = detail::bisect_cdf(lo, hi, c_lo, target, tol, inc, c_at);
    MassAndMedian out{m.value, eta, std::abs(c_at - target)};
    if (const auto* p = std::get_if<PowerType>(&f.kind)) {
        if (auto br = power_median_bracket(*p, n, f.scale)) {
            const double slack = 1e-9 * br->second;
            if (eta < br->first - slack || eta > br->second + slack)
                throw Error(ErrorCode::BracketViolation, "median " + std::to_string(eta) + " outside [" +
                                                             std::to_string(br->first) + ", " +
                                                             std::to_string(br->second) + "]");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Weights on the real line.

enum class LineKind { Laplace, Gaussian, Power, Bump, Tabulated, Custom };
enum class Support { All, Positive, Negative };

struct LineWeight {
    LineKind kind = LineKind::Laplace;
    double rate = 1.0;                                       // Laplace: e^{-rate|s|}
    double sigma = 1.0;                                      // Gaussian: e^{-s^2/(2 sigma^2)}
    double gamma = 0.0, beta = 2.0, alpha = -1.0;            // Power: |s|^gamma (1+|s|^beta)^alpha
    double power = 1.0;                                      // Bump: (1-s^2)^power on |s|<1
    std::vector<std::pair<double, double>> nodes;            // Tabulated: (s, w), zero outside
    std::function<double(double)> custom;                    // Custom: arbitrary nonnegative function
    std::optional<double> custom_tail;                       // Custom: declared power exponent at +-inf
    double shift = 0.0;
    double multiplier = 1.0;
    Support support = Support::All;

    static LineWeight laplace(double rate = 1.0) {
        LineWeight w;
        w.kind = LineKind::Laplace;
        w.rate = rate;
        return w;
    }
    static LineWeight gaussian(double sigma = 1.0) {
        LineWeight w;
        w.kind = LineKind::Gaussian;
        w.sigma = sigma;
        return w;
    }
    static LineWeight power_type(double gamma, double beta, double alpha) {
        LineWeight w;
        w.kind = LineKind::Power;
        w.gamma = gamma;
        w.beta = beta;
        w.alpha = alpha;
        return w;
    }
    static LineWeight bump(double power = 1.0) {
        LineWeight w;
        w.kind = LineKind::Bump;
        w.power = power;
        return w;
    }
    static LineWeight tabulated(std::vector<std::pair<double, double>> nodes) {
        LineWeight w;
        w.kind = LineKind::Tabulated;
        w.nodes = std::move(nodes);
        return w;
    }
    static LineWeight from_function(std::function<double(double)> f) {
        LineWeight w;
        w.kind = LineKind::Custom;
        w.custom = std::move(f);
        return w;
    }
    LineWeight shifted(double c) const {
        LineWeight w = *this;
        w.shift += c;
        return w;
    }
    LineWeight scaled(double c) const {
        LineWeight w = *this;
        w.multiplier *= c;
        return w;
    }
    LineWeight restricted(Support s) const {
        LineWeight w = *this;
        w.support = s;
        return w;
    }

    double base(double x) const {
        switch (kind) {
        case LineKind::Laplace: return std::exp(-rate * std::abs(x));
        case LineKind::Gaussian: return std::exp(-x * x / (2.0 * sigma * sigma));
        case LineKind::Power: {
            const double ax = std::abs(x);
            if (ax == 0.0) return gamma == 0.0 ? 1.0 : (gamma > 0.0 ? 0.0 : kInf);
            const double lx = std::log(ax), lb = beta * lx;
            const double l1p = lb > 35.0 ? lb + std::log1p(std::exp(-lb)) : std::log1p(std::exp(lb));
            return std::exp(gamma * lx + alpha * l1p);
        }
        case LineKind::Bump: return std::abs(x) < 1.0 ? std::pow(1.0 - x * x, power) : 0.0;
        case LineKind::Tabulated: return interpolate_nodes(nodes, x);
        case LineKind::Custom: return custom(x);
        }
        return 0.0;
    }

    double operator()(double s) const {
        if (support == Support::Positive && s < shift) return 0.0;
        if (support == Support::Negative && s > shift) return 0.0;
        return multiplier * base(s - shift);
    }

    // s -> -s
    LineWeight reflected() const {
        LineWeight w = *this;
        w.shift = -shift;
        if (support == Support::Positive) w.support = Support::Negative;
        else if (support == Support::Negative) w.support = Support::Positive;
        if (kind == LineKind::Tabulated) {
            w.nodes.clear();
            for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) w.nodes.emplace_back(-it->first, it->second);
        }
        if (kind == LineKind::Custom) {
            auto f = custom;
            w.custom = [f](double x) { return f(-x); };
        }
        return w;
    }

    // Breakpoints where the weight may be non-smooth (used to split integrals).
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        switch (kind) {
        case LineKind::Laplace:
        case LineKind::Power: b.push_back(shift); break;
        case LineKind::Bump: b = {shift - 1.0, shift + 1.0}; break;
        case LineKind::Tabulated:
            for (auto& n : nodes) b.push_back(n.first + shift);
            break;
        default: break;
        }
        if (support != Support::All) b.push_back(shift);
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    // Power exponent of the weight as s -> +inf (or -inf); nullopt if not power-like.
    std::optional<double> tail_power(bool positive_side) const {
        if (positive_side && support == Support::Negative) return std::nullopt;
        if (!positive_side && support == Support::Positive) return std::nullopt;
        if (kind == LineKind::Power) return gamma + alpha * beta;
        if (kind == LineKind::Custom) return custom_tail;
        return std::nullopt;
    }
    bool tail_vanishes(bool positive_side) const {
        if (positive_side && support == Support::Negative) return true;
        if (!positive_side && support == Support::Positive) return true;
        return kind == LineKind::Bump || kind == LineKind::Tabulated;
    }
    bool tail_fast(bool positive_side) const {
        return !tail_vanishes(positive_side) && (kind == LineKind::Laplace || kind == LineKind::Gaussian);
    }
    // Local power exponent of the weight at the point s (0 where smooth and positive).
    std::optional<double> local_power(double s) const {
        if (kind == LineKind::Power && s == shift) return gamma;
        if (kind == LineKind::Laplace || kind == LineKind::Gaussian || kind == LineKind::Power) return 0.0;
        return std::nullopt;
    }
};

inline void validate(const LineWeight& w) {
    switch (w.kind) {
    case LineKind::Laplace:
        if (!(w.rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "laplace rate must be positive");
        break;
    case LineKind::Gaussian:
        if (!(w.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be positive");
        break;
    case LineKind::Power:
        if (!(w.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "power weight needs beta > 0");
        break;
    case LineKind::Bump:
        if (!(w.power >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bump power must be >= 0");
        break;
    case LineKind::Tabulated:
        if (w.nodes.size() < 2) throw Error(ErrorCode::InvalidArgument, "tabulated weight needs >= 2 nodes");
        for (std::size_t i = 1; i < w.nodes.size(); ++i)
            if (!(w.nodes[i].first > w.nodes[i - 1].first))
                throw Error(ErrorCode::InvalidArgument, "tabulated nodes must be strictly increasing");
        for (auto& n : w.nodes)
            if (n.second < 0.0) throw Error(ErrorCode::InvalidArgument, "tabulated values must be >= 0");
        break;
    case LineKind::Custom:
        if (!w.custom) throw Error(ErrorCode::InvalidArgument, "custom weight without a function");
        break;
    }
    if (!(w.multiplier > 0.0)) throw Error(ErrorCode::InvalidArgument, "multiplier must be positive");
}

// Integral of f over [a,b] split at the given breakpoints.
inline quad::IntegralResult integrate_split(const quad::Integrand& f, double a, double b,
                                            const std::vector<double>& breaks, const quad::QuadratureSpec& spec) {
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    quad::IntegralResult out;
    for (std::size_t i = 1; i < pts.size(); ++i) out = quad::detail::combine(out, quad::integrate(f, pts[i - 1], pts[i], spec));
    return out;
}

inline MassResult line_mass(const LineWeight& w, double rel_tol = 1e-10) {
    validate(w);
    MassResult out;
    for (bool pos : {true, false}) {
        if (auto t = w.tail_power(pos); t && *t >= -1.0) {
            out.verdict = Finiteness::ProvenInfinite;
            out.value = kInf;
            out.cause = "tail exponent >= -1";
            return out;
        }
    }
    if (auto l = w.local_power(w.shift); l && *l <= -1.0) {
        out.verdict = Finiteness::ProvenInfinite;
        out.value = kInf;
        out.cause = "local exponent <= -1";
        return out;
    }
    auto r = integrate_split(std::cref(w), -kInf, kInf, w.breakpoints(), default_spec(rel_tol));
    if (r.diverging || !std::isfinite(r.value)) {
        out.verdict = Finiteness::NumericallyDivergent;
        out.value = kInf;
        out.cause = "integral grows without bound";
        return out;
    }
    out.value = r.value;
    out.error = r.error_estimate;
    return out;
}

inline MassAndMedian line_median(const LineWeight& w, double median_tol = 1e-10) {
    const auto m = line_mass(w, 1e-12);
    if (!m.finite()) throw Error(ErrorCode::W1NotIntegrable, "line weight not integrable: " + m.cause);
    if (!(m.value > 0.0)) throw Error(ErrorCode::MassInfinite, "median needs positive mass");
    auto spec = default_spec(1e-12);
    const auto breaks = w.breakpoints();
    auto inc = [&](double a, double b) { return integrate_split(std::cref(w), a, b, breaks, spec).value; };
    const double target = 0.5 * m.value, tol = median_tol * m.value;
    // Bracket around the centre of the weight, CDF measured from -inf.
    double c = w.shift;
    if (w.kind == LineKind::Tabulated) c = 0.5 * (w.nodes.front().first + w.nodes.back().first) + w.shift;
    const double c_at_c = integrate_split(std::cref(w), -kInf, c, breaks, spec).value;
    double lo, hi, c_lo;
    double step = 1.0;
    if (c_at_c >= target - tol) {
        hi = c;
        lo = c - step;
        c_lo = c_at_c - inc(lo, hi);
        while (c_lo >= target - tol) {
            hi = lo;
            step *= 2.0;
            lo = hi - step;
            c_lo -= inc(lo, hi);
            if (step > 1e300) throw Error(ErrorCode::Inconclusive, "median bracket search overflowed");
        }
        // recompute from -inf at the final lower end for accuracy
        c_lo = integrate_split(std::cref(w), -kInf, lo, breaks, spec).value;
    } else {
        lo = c;
        c_lo = c_at_c;
        hi = c + step;
        double c_hi = c_lo + inc(lo, hi);
        while (c_hi < target - tol) {
            lo = hi;
            c_lo = c_hi;
            step *= 2.0;
            hi = lo + step;
            c_hi += inc(lo, hi);
            if (step > 1e300) throw Error(ErrorCode::Inconclusive, "median bracket search overflowed");
        }
    }
    double c_at = 0.0;
    const double eta = detail::bisect_cdf(lo, hi, c_lo, target, tol, inc, c_at);
    return {m.value, eta, std::abs(c_at - target)};
}

}  // namespace hardycert::weights
