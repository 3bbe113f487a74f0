#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hardycert/error.hpp"
#include "hardycert/quad.hpp"
#include "hardycert/test_function.hpp"
#include "hardycert/weights.hpp"

namespace hardycert::hardy {

// g(r) = r^{gamma+2} (1 + r^beta)^alpha
struct PowerTypeG {
    double gamma = 0.0;
    double beta = 2.0;
    double alpha = 0.0;
    double eta_shift() const { return alpha * beta + gamma; }
};

// samples (r, g(r)), r increasing and positive
struct TabulatedG {
    std::vector<std::pair<double, double>> nodes;
};

using GProfile = std::variant<PowerTypeG, TabulatedG>;

struct ThetaLaplaceProfile {
    GProfile g = PowerTypeG{};
    double theta = 2.0;
    double q = 2.0;
    int dimension = 3;
};

inline void validate(const ThetaLaplaceProfile& p) {
    if (!(p.theta > 1.0) || !std::isfinite(p.theta)) throw Error(ErrorCode::InvalidArgument, "theta must exceed 1");
    if (!(p.q > 1.0) || !std::isfinite(p.q)) throw Error(ErrorCode::QOutOfRange, "q must exceed 1");
    if (p.dimension < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    if (const auto* g = std::get_if<PowerTypeG>(&p.g)) {
        if (!(g->beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "PowerTypeG needs beta > 0");
        if (!std::isfinite(g->gamma) || !std::isfinite(g->alpha))
            throw Error(ErrorCode::InvalidArgument, "PowerTypeG parameters must be finite");
    } else {
        const auto& t = std::get<TabulatedG>(p.g);
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            if (!(t.nodes[i].first > 0.0) || !(t.nodes[i].second > 0.0))
                throw Error(ErrorCode::InvalidArgument, "tabulated g needs positive radii and values");
            if (i && !(t.nodes[i].first > t.nodes[i - 1].first))
                throw Error(ErrorCode::InvalidArgument, "tabulated g radii must increase");
        }
    }
}

// Quadratic in s = r^beta whose sign is the sign of the theta-Laplacian:
// Delta_theta g = |g'|^{theta-2} r^gamma (1+s)^{alpha-2} (a s^2 + b s + c).
struct SignQuadratic {
    double a = 0.0, b = 0.0, c = 0.0;
    double operator()(double s) const { return (a * s + b) * s + c; }
    // value divided by (1+s)^2, written in t = s/(1+s) so that s = inf is t = 1
    double scaled(double t) const { return a * t * t + b * t * (1.0 - t) + c * (1.0 - t) * (1.0 - t); }
};

inline SignQuadratic sign_quadratic(const PowerTypeG& g, double theta, int n) {
    const double al = g.alpha, be = g.beta, ga = g.gamma;
    const double eta = g.eta_shift(), l1 = eta + 2.0, a0 = ga + 2.0, th = theta - 1.0;
    SignQuadratic Q;
    Q.a = l1 * (th * (eta + 1.0) + n - 1.0);
    Q.b = th * ((a0 - 1.0) * (l1 + a0) + (al - 1.0) * be * a0 + l1 * be) + (n - 1.0) * (l1 + a0);
    Q.c = a0 * (th * (a0 - 1.0) + n - 1.0);
    return Q;
}

namespace detail {

// log(1 + r^beta) without overflow
inline double log1p_pow(double r, double beta) {
    const double lr = beta * std::log(r);
    return lr > 0.0 ? lr + std::log1p(std::exp(-lr)) : std::log1p(std::exp(lr));
}

// t = s/(1+s) for s = r^beta
inline double t_of(double r, double beta) {
    const double lr = beta * std::log(r);
    return lr > 0.0 ? 1.0 / (1.0 + std::exp(-lr)) : std::exp(lr) / (1.0 + std::exp(lr));
}

struct LogParts {
    double log_abs_gprime;
    double log_abs_lap;
    double lap_sign;
};

inline LogParts power_parts(const PowerTypeG& g, double theta, int n, double r) {
    const double t = t_of(r, g.beta), v = 1.0 - t;
    const double L = (g.eta_shift() + 2.0) * t + (g.gamma + 2.0) * v;  // g'/(r^{gamma+1}(1+s)^alpha)
    const double Q = sign_quadratic(g, theta, n).scaled(t);
    const double lr = std::log(r), l1p = log1p_pow(r, g.beta);
    LogParts out;
    out.log_abs_gprime = (g.gamma + 1.0) * lr + g.alpha * l1p + std::log(std::abs(L));
    out.log_abs_lap = (theta - 2.0) * out.log_abs_gprime + g.gamma * lr + g.alpha * l1p + std::log(std::abs(Q));
    out.lap_sign = Q > 0.0 ? 1.0 : (Q < 0.0 ? -1.0 : 0.0);
    return out;
}

// value, first and second derivative of the quadratic through the 3 nodes nearest to r
inline std::array<double, 3> local_quadratic(const TabulatedG& t, double r) {
    const auto& nd = t.nodes;
    if (nd.size() < 3) throw Error(ErrorCode::NotDifferentiable, "tabulated g needs at least 3 nodes");
    if (r < nd.front().first || r > nd.back().first)
        throw Error(ErrorCode::NotDifferentiable, "r outside the tabulated range");
    auto it = std::lower_bound(nd.begin(), nd.end(), r, [](const auto& p, double x) { return p.first < x; });
    std::size_t i = std::size_t(it - nd.begin());
    std::size_t lo = i == 0 ? 0 : i - 1;
    if (lo + 2 >= nd.size()) lo = nd.size() - 3;
    if (i < nd.size() && i > 0 && i + 1 < nd.size() && std::abs(nd[i].first - r) < std::abs(nd[i - 1].first - r)) lo = i - 1;
    const double x0 = nd[lo].first, x1 = nd[lo + 1].first, x2 = nd[lo + 2].first;
    const double y0 = nd[lo].second, y1 = nd[lo + 1].second, y2 = nd[lo + 2].second;
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1), d012 = (d12 - d01) / (x2 - x0);
    const double val = y0 + d01 * (r - x0) + d012 * (r - x0) * (r - x1);
    const double d1 = d01 + d012 * (2.0 * r - x0 - x1);
    return {val, d1, 2.0 * d012};
}

}  // namespace detail

inline double g_value(const ThetaLaplaceProfile& p, double r) {
    if (const auto* g = std::get_if<PowerTypeG>(&p.g))
        return std::exp((g->gamma + 2.0) * std::log(r) + g->alpha * detail::log1p_pow(r, g->beta));
    return detail::local_quadratic(std::get<TabulatedG>(p.g), r)[0];
}

inline double g_prime(const ThetaLaplaceProfile& p, double r) {
    if (const auto* g = std::get_if<PowerTypeG>(&p.g)) {
        const double t = detail::t_of(r, g->beta);
        const double L = (g->eta_shift() + 2.0) * t + (g->gamma + 2.0) * (1.0 - t);
        return std::copysign(std::exp(detail::power_parts(*g, p.theta, p.dimension, r).log_abs_gprime), L);
    }
    return detail::local_quadratic(std::get<TabulatedG>(p.g), r)[1];
}

// Radial theta-Laplacian r^{1-N} (r^{N-1} |g'|^{theta-2} g')'.
inline double theta_laplacian(const ThetaLaplaceProfile& p, double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "theta_laplacian needs r > 0");
    if (const auto* g = std::get_if<PowerTypeG>(&p.g)) {
        const auto parts = detail::power_parts(*g, p.theta, p.dimension, r);
        if (parts.lap_sign == 0.0) return 0.0;
        return parts.lap_sign * std::exp(parts.log_abs_lap);
    }
    const auto d = detail::local_quadratic(std::get<TabulatedG>(p.g), r);
    const double g1 = d[1], g2 = d[2];
    const double ag = std::abs(g1);
    const double core = (p.theta - 1.0) * g2 + (p.dimension - 1.0) * g1 / r;
    if (ag == 0.0) {
        if (p.theta > 2.0) return 0.0;
        if (p.theta == 2.0) return core;
        throw Error(ErrorCode::NotDifferentiable, "|g'|^{theta-2} singular at a critical point");
    }
    return std::pow(ag, p.theta - 2.0) * core;
}

enum class Sign { Nonnegative, Nonpositive, Mixed };

inline const char* to_string(Sign s) {
    switch (s) {
        case Sign::Nonnegative: return "Nonnegative";
        case Sign::Nonpositive: return "Nonpositive";
        case Sign::Mixed: return "Mixed";
    }
    return "?";
}

struct HardyDerivation {
    ThetaLaplaceProfile profile;
    std::function<double(double)> w1;  // |Delta_theta g|
    std::function<double(double)> w2;  // |g'|^{q(theta-1)} |Delta_theta g|^{1-q}
    double c_h = 0.0;                  // q^q
    Sign sign = Sign::Nonnegative;
    std::optional<double> c1, c2, c_h_family;
    std::optional<double> eta_shift;
    bool optimal = false;
    std::string optimal_condition;
    // family weights h(r) = r^gamma (1+r^beta)^alpha and h(r) r^q (PowerTypeG only)
    std::function<double(double)> family_w1, family_w2;
    // logarithms of the four weights, used by the radial integrals to avoid overflow near 0
    std::function<double(double)> log_w1, log_w2, log_family_w1, log_family_w2;
    std::vector<std::string> notes;
};

struct DeriveOptions {
    bool family_conditions = true;  // enforce the hypotheses of the power family
    int constant_grid = 20001;      // grid in t = s/(1+s) for numeric c1, c2
};

inline Sign quadratic_sign(const SignQuadratic& Q) {
    // extremes of the scaled quadratic over t in [0,1]: endpoints and the vertex
    const double A = Q.a - Q.b + Q.c, B = Q.b - 2.0 * Q.c;
    double mn = std::min(Q.c, Q.a), mx = std::max(Q.c, Q.a);
    if (A != 0.0) {
        const double tv = -B / (2.0 * A);
        if (tv > 0.0 && tv < 1.0) {
            const double v = Q.scaled(tv);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
    }
    if (mn < 0.0 && mx > 0.0) return Sign::Mixed;
    if (mx > 0.0) return Sign::Nonnegative;
    if (mn < 0.0) return Sign::Nonpositive;
    throw Error(ErrorCode::InvalidArgument, "theta-Laplacian of g vanishes identically");
}

inline std::optional<std::string> family_condition_failure(const PowerTypeG& g, int n) {
    const double eta = g.eta_shift();
    auto sgn = [](double x) { return (x > 0) - (x < 0); };
    if (!(g.gamma + n > 0.0)) return "gamma + N > 0";
    if (sgn(eta + 2.0) != sgn(g.gamma + 2.0)) return "war1: sgn(alpha*beta+gamma+2) = sgn(gamma+2)";
    if (!(std::abs(eta + 2.0) >= std::abs(g.gamma + 2.0))) return "|alpha*beta+gamma+2| >= |gamma+2|";
    if (!(eta + n > 0.0)) return "alpha*beta + gamma + N > 0";
    return std::nullopt;
}

// Both extremes over t in [0,1] on a uniform grid, then golden refinement around the winner.
inline double extreme_over_unit(const std::function<double(double)>& f, int n, bool maximize) {
    const double sgn = maximize ? 1.0 : -1.0;
    int best = 0;
    double bv = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = sgn * f(double(i) / (n - 1));
        if (v > bv) bv = v, best = i;
    }
    double lo = double(std::max(best - 1, 0)) / (n - 1), hi = double(std::min(best + 1, n - 1)) / (n - 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo), f1 = sgn * f(x1), f2 = sgn * f(x2);
    for (int k = 0; k < 100 && hi - lo > 1e-15; ++k) {
        if (f1 < f2) {
            lo = x1, x1 = x2, f1 = f2, x2 = lo + gr * (hi - lo), f2 = sgn * f(x2);
        } else {
            hi = x2, x2 = x1, f2 = f1, x1 = hi - gr * (hi - lo), f1 = sgn * f(x1);
        }
    }
    return sgn * std::max({bv, f1, f2});
}

inline HardyDerivation derive_hardy(const ThetaLaplaceProfile& profile, const DeriveOptions& opt = {}) {
    validate(profile);
    HardyDerivation d;
    d.profile = profile;
    const double q = profile.q, th = profile.theta;
    const int n = profile.dimension;
    d.c_h = std::pow(q, q);

    if (const auto* gp = std::get_if<PowerTypeG>(&profile.g)) {
        const PowerTypeG g = *gp;
        d.eta_shift = g.eta_shift();
        if (opt.family_conditions)
            if (auto why = family_condition_failure(g, n)) throw Error(ErrorCode::ConditionsViolated, *why);
        // the flux r^{N-1}|g'|^{theta-1} must vanish at the origin (integration by parts, L^1_loc)
        const double k1 = g.gamma + 2.0 != 0.0 ? g.gamma + 1.0 : g.gamma + 1.0 + g.beta;
        if (!(n - 1.0 + k1 * (th - 1.0) > 0.0) || !(n + k1 > 0.0))
            throw Error(ErrorCode::ConditionsViolated, "theta-Laplacian of g not locally integrable at the origin");
        const auto Q = sign_quadratic(g, th, n);
        d.sign = quadratic_sign(Q);
        if (d.sign == Sign::Mixed)
            throw Error(ErrorCode::SignNotConstant, "theta-Laplacian changes sign: quadratic " + std::to_string(Q.a) +
                                                        " s^2 + " + std::to_string(Q.b) + " s + " +
                                                        std::to_string(Q.c) + " has a positive root");
        constexpr double kNegInf = -std::numeric_limits<double>::infinity();
        d.log_w1 = [g, th, n](double r) {
            if (!(r > 0.0)) return kNegInf;
            return detail::power_parts(g, th, n, r).log_abs_lap;
        };
        d.log_w2 = [g, th, n, q](double r) {
            if (!(r > 0.0)) return kNegInf;
            const auto pp = detail::power_parts(g, th, n, r);
            if (pp.lap_sign == 0.0) return std::numeric_limits<double>::infinity();
            return q * (th - 1.0) * pp.log_abs_gprime + (1.0 - q) * pp.log_abs_lap;
        };
        d.log_family_w1 = [g](double r) {
            if (!(r > 0.0)) return kNegInf;
            return g.gamma * std::log(r) + g.alpha * detail::log1p_pow(r, g.beta);
        };
        d.log_family_w2 = [g, q](double r) {
            if (!(r > 0.0)) return kNegInf;
            return (g.gamma + q) * std::log(r) + g.alpha * detail::log1p_pow(r, g.beta);
        };
        d.w1 = [f = d.log_w1](double r) { return std::exp(f(r)); };
        d.w2 = [f = d.log_w2](double r) { return std::exp(f(r)); };
        d.family_w1 = [f = d.log_family_w1](double r) { return std::exp(f(r)); };
        d.family_w2 = [f = d.log_family_w2](double r) { return std::exp(f(r)); };
        if (th != 2.0) {
            d.notes.push_back("family constants c1, c2 are only defined for theta = 2");
            return d;
        }
        const double eta = g.eta_shift();
        const double opt_as = g.alpha * g.beta + 2.0 * (g.gamma + 1.0) + n;
        const bool conds = !family_condition_failure(g, n);
        if (g.alpha == 0.0 && g.gamma + n > 0.0 && g.gamma + 2.0 != 0.0) {
            // pure power: C1 is constant and f is constant
            const double c1 = std::abs((g.gamma + 2.0) * (g.gamma + n));
            d.c1 = c1;
            d.c2 = std::pow(std::abs(g.gamma + 2.0), q) * std::pow(c1, 1.0 - q);
            d.c_h_family = std::pow(q / (g.gamma + n), q);
            d.optimal = true;
            d.optimal_condition = "pure power weight: classical Hardy constant (q/(gamma+N))^q";
            return d;
        }
        if (conds && opt_as <= 0.0) {
            d.c1 = (-eta - 2.0) * (eta + n);
            d.c2 = std::abs(eta + 2.0) * std::pow(std::abs(eta + n), 1.0 - q);
            d.c_h_family = std::pow(q / (eta + n), q);
            d.optimal = true;
            d.optimal_condition = "alpha*beta+2(gamma+1)+N = " + std::to_string(opt_as) + " <= 0";
            return d;
        }
        auto C1 = [Q](double t) { return std::abs(Q.scaled(t)); };
        auto F = [g](double t) { return std::abs((g.eta_shift() + 2.0) * t + (g.gamma + 2.0) * (1.0 - t)); };
        const double c1 = extreme_over_unit(C1, opt.constant_grid, false);
        const double c2 = extreme_over_unit([&](double t) { return std::pow(F(t), q) * std::pow(C1(t), 1.0 - q); },
                                            opt.constant_grid, true);
        d.c1 = c1;
        d.c2 = c2;
        d.c_h_family = c1 > 0.0 ? d.c_h * c2 / c1 : std::numeric_limits<double>::infinity();
        d.optimal = false;
        d.optimal_condition = conds ? "alpha*beta+2(gamma+1)+N = " + std::to_string(opt_as) + " > 0: bound only"
                                    : "family hypotheses not met: bound only";
        d.notes.push_back("c1, c2 by numeric inf/sup over s in [0, inf)");
        return d;
    }

    // tabulated g: sign by sampling between nodes, weights through the local quadratic
    const auto& tab = std::get<TabulatedG>(profile.g);
    if (tab.nodes.size() < 3) throw Error(ErrorCode::NotDifferentiable, "tabulated g needs at least 3 nodes");
    bool pos = false, neg = false;
    for (std::size_t i = 0; i + 1 < tab.nodes.size(); ++i)
        for (int k = 0; k < 4; ++k) {
            const double r = tab.nodes[i].first + (k + 0.5) / 4.0 * (tab.nodes[i + 1].first - tab.nodes[i].first);
            const double v = theta_laplacian(profile, r);
            pos = pos || v > 0.0;
            neg = neg || v < 0.0;
        }
    if (pos && neg) throw Error(ErrorCode::SignNotConstant, "sampled theta-Laplacian changes sign");
    if (!pos && !neg) throw Error(ErrorCode::InvalidArgument, "sampled theta-Laplacian vanishes");
    d.sign = pos ? Sign::Nonnegative : Sign::Nonpositive;
    const double lo = tab.nodes.front().first, hi = tab.nodes.back().first;
    d.w1 = [profile, lo, hi](double r) {
        if (r < lo || r > hi) return 0.0;
        return std::abs(theta_laplacian(profile, r));
    };
    d.w2 = [profile, lo, hi, q, th](double r) {
        if (r < lo || r > hi) return 0.0;
        const double lap = std::abs(theta_laplacian(profile, r));
        if (lap == 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(std::abs(g_prime(profile, r)), q * (th - 1.0)) * std::pow(lap, 1.0 - q);
    };
    d.log_w1 = [w = d.w1](double r) { return std::log(w(r)); };
    d.log_w2 = [w = d.w2](double r) { return std::log(w(r)); };
    d.notes.push_back("tabulated g: weights vanish outside the sampled range; sign checked by sampling");
    return d;
}

// The second power family: weight (1+|x|^beta)^alpha against |x|^q (1+|x|^beta)^alpha, alpha*beta + N > 0.
// Constants are numeric; only finiteness is claimed.
inline HardyDerivation second_example(double alpha, double beta, double q, int n) {
    if (!(beta > 0.0)) throw Error(ErrorCode::ConditionsViolated, "beta > 0");
    if (!(alpha * beta + n > 0.0)) throw Error(ErrorCode::ConditionsViolated, "alpha*beta + N > 0");
    ThetaLaplaceProfile p{PowerTypeG{0.0, beta, alpha}, 2.0, q, n};
    DeriveOptions o;
    o.family_conditions = false;
    auto d = derive_hardy(p, o);
    d.optimal = false;
    d.optimal_condition = "finite constant only";
    return d;
}

struct SampleCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

namespace detail {

// integral of f(r) exp(log_w(r)) r^{N-1} over the support of phi
inline double radial_integral(const std::function<double(double)>& f, const std::function<double(double)>& log_w,
                              const TestFunction& phi, int n) {
    quad::QuadratureSpec s;
    s.rel_tol = 1e-11;
    s.max_subdivisions = 400;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < phi.grid.size(); ++i) {
        const double a = std::max(phi.grid[i], 0.0), b = phi.grid[i + 1];
        if (!(b > a)) continue;
        auto g = [&](double r) {
            const double v = f(r);
            return v == 0.0 ? 0.0 : v * std::exp(log_w(r) + (n - 1) * std::log(r));
        };
        total += quad::integrate(g, a, b, s).value;
    }
    return total * weights::surface_area(n);
}

inline SampleCheck check(const std::function<double(double)>& log_w1, const std::function<double(double)>& log_w2,
                         double c, double q, int n, const TestFunction& phi) {
    phi.validate();
    SampleCheck out;
    out.lhs = radial_integral(
        [&](double r) {
            const double v = std::abs(phi(r));
            return v == 0.0 ? 0.0 : std::pow(v, q);
        },
        log_w1, phi, n);
    out.rhs = c * radial_integral(
                      [&](double r) {
                          const double v = std::abs(phi.slope(r));
                          return v == 0.0 ? 0.0 : std::pow(v, q);
                      },
                      log_w2, phi, n);
    if (out.lhs == 0.0 && out.rhs == 0.0) out.ratio = 0.0;
    else out.ratio = out.lhs / out.rhs;
    return out;
}

}  // namespace detail

// lhs = int |phi|^q w1, rhs = C_H int |grad phi|^q w2 for a radial piecewise-linear phi
inline SampleCheck verify_hardy_sample(const HardyDerivation& d, const TestFunction& phi) {
    return detail::check(d.log_w1, d.log_w2, d.c_h, d.profile.q, d.profile.dimension, phi);
}

// Same check against the family weights h, h r^q and the family constant q^q c2/c1.
inline SampleCheck verify_family_sample(const HardyDerivation& d, const TestFunction& phi) {
    if (!d.c_h_family || !d.log_family_w1) throw Error(ErrorCode::InvalidArgument, "derivation has no family constant");
    return detail::check(d.log_family_w1, d.log_family_w2, *d.c_h_family, d.profile.q, d.profile.dimension, phi);
}

// Ratios for phi_s(x) = phi(s x) under the family weights, one per scale.
inline std::vector<double> rescaling_ratios(const HardyDerivation& d, const TestFunction& phi,
                                            const std::vector<double>& scales) {
    std::vector<double> out;
    for (double s : scales) out.push_back(verify_family_sample(d, phi.rescaled(s)).ratio);
    return out;
}

// ---------------------------------------------------------------------------------------------
// The p-Laplacian family: q = 2, alpha = -(p-1)/(2-p), beta = p/(p-1), gamma = -p/(p-1)

struct PRange {
    double p_minus = std::numeric_limits<double>::quiet_NaN();
    double p_plus = std::numeric_limits<double>::quiet_NaN();
    bool applicable = false;  // true when the exclusion interval (p_minus, p_plus) is nonempty
};

inline PRange corollary_p_range(int n) {
    if (n <= 2) throw Error(ErrorCode::InvalidArgument, "N > 2 required");
    PRange r;
    if (n < 7) return r;
    const double w = 0.5 * std::sqrt(double(n - 7) / double(n + 1));
    r.p_minus = 1.5 - w;
    r.p_plus = 1.5 + w;
    r.applicable = n > 7;
    return r;
}

inline double corollary_critical(double p) { return p / ((2.0 - p) * (p - 1.0)); }

inline PowerTypeG corollary_g(double p) {
    return PowerTypeG{-p / (p - 1.0), p / (p - 1.0), -(p - 1.0) / (2.0 - p)};
}

inline ThetaLaplaceProfile corollary_profile(double p, int n) {
    if (!(p > 1.0 && p < 2.0)) throw Error(ErrorCode::ConditionsViolated, "1 < p < 2");
    if (n <= 2) throw Error(ErrorCode::ConditionsViolated, "N > 2");
    if (!(n > corollary_critical(p))) throw Error(ErrorCode::ConditionsViolated, "N > p/((2-p)(p-1))");
    return ThetaLaplaceProfile{corollary_g(p), 2.0, 2.0, n};
}

inline double corollary_constant(double p, int n) {
    const double d = n - corollary_critical(p);
    return 4.0 / (d * d);
}

inline bool corollary_optimal(double p, int n) {
    const auto r = corollary_p_range(n);
    return n <= 7 || !(p > r.p_minus && p < r.p_plus);
}

}  // namespace hardycert::hardy
