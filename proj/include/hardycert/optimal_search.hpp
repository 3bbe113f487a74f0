#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hardycert/criteria.hpp"
#include "hardycert/error.hpp"
#include "hardycert/hardy_construct.hpp"
#include "hardycert/quad.hpp"
#include "hardycert/test_function.hpp"
#include "hardycert/weights.hpp"

namespace hardycert::rayleigh {

// Which nodes are pinned to zero.
enum class Boundary {
    LinePinned,            // both ends zero
    RadialFreeLeft,        // value at r = 0 free, right end zero
    MuckenhouptFreeRight,  // f(0) = 0, constant continuation beyond the last node
};

enum class Method { Eigen, FixedPointAscent };

inline const char* to_string(Method m) { return m == Method::Eigen ? "Eigen" : "FixedPointAscent"; }

struct RayleighEstimate {
    double value = 0.0;           // quotient of the maximizer, by adaptive quadrature
    double discrete_value = 0.0;  // value of the discrete problem
    TestFunction maximizer;
    int iterations = 0;
    bool converged = false;
    Method method = Method::Eigen;
    std::vector<double> rescaling_trend;  // quotient of phi(s x) for s in rescaling_scales
    std::vector<double> rescaling_scales;
    std::vector<std::string> notes;
};

struct SearchOptions {
    int restarts = 4;
    unsigned seed = 1;
    int max_iterations = 500;
    double rel_change = 1e-6;
    bool parallel = true;
    bool force_ascent = false;  // use the fixed-point path even at q = 2
};

// sup over f of  num(f) / int |f'|^q den  on a fixed grid
struct RayleighProblem {
    std::function<double(double)> num;  // numerator density (measure included)
    std::function<double(double)> den;  // denominator density (measure included)
    std::vector<double> grid;
    double q = 2.0;
    Boundary boundary = Boundary::LinePinned;
    bool mean_projection = false;  // subtract the num-weighted mean over the whole line
    double total_mass = 0.0;       // int num over its whole domain (mean projection)
    double tail_mass = 0.0;        // int num beyond the last node (Muckenhoupt mode)
};

namespace detail {

inline double integrate_cell(const std::function<double(double)>& f, double a, double b) {
    quad::QuadratureSpec s;
    s.rel_tol = 1e-10;
    s.max_subdivisions = 300;
    return quad::integrate(f, a, b, s).value;
}

inline double phi_q(double x, double q) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), q - 1.0), x); }
inline double phi_q_inv(double y, double q) {
    return y == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(y), 1.0 / (q - 1.0)), y);
}

constexpr int kSub = 4;  // sub-intervals per cell for the q != 2 numerator

struct Assembled {
    std::vector<double> h, kappa;                 // cell widths, int den per cell
    std::vector<double> m0, m1, m2;               // moments of num per cell in t = (x - x_c)/h_c
    std::vector<std::array<double, kSub + 1>> w;  // hat weights of num at sub-nodes (q != 2)
    std::vector<char> frozen;                     // cells where w2 vanishes: f' held at 0
    double grid_mass = 0.0;
    std::vector<std::string> notes;
};

inline Assembled assemble(const RayleighProblem& p, bool need_moments, bool need_sub) {
    Assembled A;
    const std::size_t n = p.grid.size() - 1;
    A.h.resize(n);
    A.kappa.resize(n);
    if (need_moments) A.m0.resize(n), A.m1.resize(n), A.m2.resize(n);
    if (need_sub) A.w.assign(n, {});
    double kmax = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const double a = p.grid[c], b = p.grid[c + 1], h = b - a;
        A.h[c] = h;
        A.kappa[c] = integrate_cell(p.den, a, b);
        kmax = std::max(kmax, A.kappa[c]);
        if (need_moments) {
            A.m0[c] = integrate_cell(p.num, a, b);
            A.m1[c] = integrate_cell([&](double x) { return p.num(x) * ((x - a) / h); }, a, b);
            A.m2[c] = integrate_cell([&](double x) { const double t = (x - a) / h; return p.num(x) * t * t; }, a, b);
            A.grid_mass += A.m0[c];
        }
        if (need_sub) {
            double cell_mass = 0.0;
            for (int j = 0; j < kSub; ++j) {
                const double sa = a + h * j / kSub, sb = a + h * (j + 1) / kSub, sh = sb - sa;
                const double s0 = integrate_cell(p.num, sa, sb);
                const double s1 = integrate_cell([&](double x) { return p.num(x) * ((x - sa) / sh); }, sa, sb);
                A.w[c][j] += s0 - s1;
                A.w[c][j + 1] += s1;
                cell_mass += s0;
            }
            if (!need_moments) A.grid_mass += cell_mass;
        }
    }
    int degenerate = 0;
    // cells whose stiffness underflows are frozen too: the search space only shrinks, so bounds stay valid
    const double floor = std::max(1e-280, kmax * 1e-250);
    A.frozen.assign(n, 0);
    for (std::size_t c = 0; c < n; ++c)
        if (auto& k = A.kappa[c]; !(k > floor)) {
            A.frozen[c] = 1;
            k = 1e12 * std::max(kmax, 1e-300);  // derivative effectively frozen on the cell
            ++degenerate;
        }
    if (degenerate)
        A.notes.push_back("DegenerateStiffness: " + std::to_string(degenerate) +
                          " cell(s) with vanishing or underflowing w2 excluded (f' held at 0)");
    return A;
}

// free node indices for the boundary mode
inline std::vector<int> free_nodes(Boundary b, int n) {
    std::vector<int> idx;
    const int lo = b == Boundary::RadialFreeLeft ? 0 : 1;
    const int hi = b == Boundary::MuckenhouptFreeRight ? n : n - 1;
    for (int i = lo; i <= hi; ++i) idx.push_back(i);
    return idx;
}

inline double outside_mass(const RayleighProblem& p, const Assembled& A) {
    return p.mean_projection ? std::max(0.0, p.total_mass - A.grid_mass) : 0.0;
}

// discrete numerator (sub-node rule) and its gradient with respect to nodal values
inline double numerator_sub(const RayleighProblem& p, const Assembled& A, const std::vector<double>& f,
                            std::vector<double>* grad) {
    const std::size_t n = A.h.size();
    const double q = p.q;
    double mean = 0.0;
    if (p.mean_projection) {
        for (std::size_t c = 0; c < n; ++c)
            for (int j = 0; j <= kSub; ++j) {
                const double t = double(j) / kSub;
                mean += A.w[c][j] * ((1 - t) * f[c] + t * f[c + 1]);
            }
        mean /= p.total_mass;
    }
    const double mout = outside_mass(p, A);
    double val = mout * std::pow(std::abs(mean), q);
    double pull = 0.0;  // sum W phi(g - mean), for the mean's chain rule
    if (grad) grad->assign(f.size(), 0.0);
    for (std::size_t c = 0; c < n; ++c)
        for (int j = 0; j <= kSub; ++j) {
            const double t = double(j) / kSub;
            const double g = (1 - t) * f[c] + t * f[c + 1] - mean;
            val += A.w[c][j] * std::pow(std::abs(g), q);
            if (grad) {
                const double d = q * A.w[c][j] * phi_q(g, q);
                (*grad)[c] += (1 - t) * d;
                (*grad)[c + 1] += t * d;
                pull += A.w[c][j] * phi_q(g, q);
            }
        }
    if (p.boundary == Boundary::MuckenhouptFreeRight) {
        val += p.tail_mass * std::pow(std::abs(f[n]), q);
        if (grad) (*grad)[n] += q * p.tail_mass * phi_q(f[n], q);
    }
    if (grad && p.mean_projection) {
        const double dmean = q * (mout * phi_q(mean, q) - pull) / p.total_mass;
        for (std::size_t c = 0; c < n; ++c)
            for (int j = 0; j <= kSub; ++j) {
                const double t = double(j) / kSub;
                (*grad)[c] += (1 - t) * A.w[c][j] * dmean;
                (*grad)[c + 1] += t * A.w[c][j] * dmean;
            }
    }
    return val;
}

inline double denominator(const Assembled& A, const std::vector<double>& f, double q) {
    double s = 0.0;
    for (std::size_t c = 0; c < A.h.size(); ++c) s += A.kappa[c] * std::pow(std::abs((f[c + 1] - f[c]) / A.h[c]), q);
    return s;
}

// Solve grad D(u) = v on the free nodes. D = sum kappa_c |Du_c|^q; with J_c = q kappa_c phi(Du_c)/h_c the
// node equations telescope, leaving at most one scalar unknown (line case) found by bisection.
inline std::vector<double> solve_gradient(const RayleighProblem& p, const Assembled& A, const std::vector<double>& v) {
    const int n = int(A.h.size());
    const double q = p.q;
    std::vector<double> J(n), u(n + 1, 0.0);
    auto slope = [&](int c, double j) { return phi_q_inv(j * A.h[c] / (q * A.kappa[c]), q); };
    if (p.boundary == Boundary::RadialFreeLeft) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += v[c], J[c] = -s;
        for (int c = n - 1; c >= 0; --c) u[c] = u[c + 1] - slope(c, J[c]) * A.h[c];
        return u;
    }
    if (p.boundary == Boundary::MuckenhouptFreeRight) {
        double s = 0.0;
        for (int c = n - 1; c >= 0; --c) s += v[c + 1], J[c] = s;
        for (int c = 0; c < n; ++c) u[c + 1] = u[c] + slope(c, J[c]) * A.h[c];
        return u;
    }
    std::vector<double> S(n, 0.0);  // J_c = C - S_c
    for (int c = 1; c < n; ++c) S[c] = S[c - 1] + v[c];
    auto rise = [&](double C) {
        double r = 0.0;
        for (int c = 0; c < n; ++c) r += slope(c, C - S[c]) * A.h[c];
        return r;
    };
    double lo = *std::min_element(S.begin(), S.end()), hi = *std::max_element(S.begin(), S.end());
    for (int it = 0; it < 200 && hi > lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (rise(mid) < 0.0 ? lo : hi) = mid;
    }
    const double C = 0.5 * (lo + hi);
    for (int c = 0; c < n; ++c) u[c + 1] = u[c] + slope(c, C - S[c]) * A.h[c];
    u[n] = 0.0;
    return u;
}

inline void apply_boundary(Boundary b, std::vector<double>& f) {
    if (b != Boundary::RadialFreeLeft) f.front() = 0.0;
    if (b != Boundary::MuckenhouptFreeRight) f.back() = 0.0;
}

inline void normalize(std::vector<double>& f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    if (m > 0.0)
        for (double& x : f) x /= m;
}

struct EigenResult {
    double value = 0.0;
    std::vector<double> f;
    bool multiple = false;
};

inline EigenResult eigen_top(const RayleighProblem& p, const Assembled& A) {
    const int n = int(A.h.size());
    // nodes joined by a frozen cell share one unknown; pinned ends pin their whole group
    std::vector<int> group(n + 1, 0);
    for (int c = 0; c < n; ++c) group[c + 1] = group[c] + (A.frozen[c] ? 0 : 1);
    const int ng = group[n] + 1;
    std::vector<int> pos(ng, 0);
    if (p.boundary != Boundary::RadialFreeLeft) pos[group[0]] = -1;
    if (p.boundary != Boundary::MuckenhouptFreeRight) pos[group[n]] = -1;
    int m = 0;
    for (auto& x : pos)
        if (x == 0) x = m++;
    if (m == 0) throw Error(ErrorCode::InvalidArgument, "no free unknowns: w2 vanishes on the whole grid");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m), K = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int c = 0; c < n; ++c) {
        const double mc[2][2] = {{A.m0[c] - 2 * A.m1[c] + A.m2[c], A.m1[c] - A.m2[c]}, {A.m1[c] - A.m2[c], A.m2[c]}};
        const double bc[2] = {A.m0[c] - A.m1[c], A.m1[c]};
        const double kc = A.frozen[c] ? 0.0 : A.kappa[c] / (A.h[c] * A.h[c]);
        const int dof[2] = {pos[group[c]], pos[group[c + 1]]};
        for (int i = 0; i < 2; ++i) {
            if (dof[i] < 0) continue;
            b(dof[i]) += bc[i];
            for (int j = 0; j < 2; ++j) {
                if (dof[j] < 0) continue;
                M(dof[i], dof[j]) += mc[i][j];
                K(dof[i], dof[j]) += (i == j ? kc : -kc);
            }
        }
    }
    if (p.boundary == Boundary::MuckenhouptFreeRight && pos[group[n]] >= 0) M(pos[group[n]], pos[group[n]]) += p.tail_mass;
    if (p.mean_projection) M -= b * b.transpose() / p.total_mass;
    // stiffness spans many decades for decaying w2: scale to unit diagonal before the Cholesky step
    const Eigen::VectorXd S = K.diagonal().cwiseSqrt().cwiseInverse();
    M = S.asDiagonal() * M * S.asDiagonal();
    K = S.asDiagonal() * K * S.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, K);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::Inconclusive, "generalized eigensolver failed");
    EigenResult r;
    r.value = es.eigenvalues()(m - 1);
    r.multiple = m > 1 && es.eigenvalues()(m - 2) > (1.0 - 1e-9) * r.value;
    r.f.assign(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
        const int d = pos[group[i]];
        if (d >= 0) r.f[i] = S(d) * es.eigenvectors()(d, m - 1);
    }
    normalize(r.f);
    return r;
}

struct AscentResult {
    double value = 0.0;
    std::vector<double> f;
    int iterations = 0;
    bool converged = false;
};

inline AscentResult ascent(const RayleighProblem& p, const Assembled& A, std::vector<double> f, const SearchOptions& o) {
    AscentResult r;
    apply_boundary(p.boundary, f);
    normalize(f);
    auto quotient = [&](const std::vector<double>& g) {
        const double d = denominator(A, g, p.q);
        return d > 0.0 ? numerator_sub(p, A, g, nullptr) / d : 0.0;
    };
    double val = quotient(f);
    std::vector<double> grad;
    for (int it = 1; it <= o.max_iterations; ++it) {
        numerator_sub(p, A, f, &grad);
        auto u = solve_gradient(p, A, grad);
        apply_boundary(p.boundary, u);
        normalize(u);
        const double nv = quotient(u);
        r.iterations = it;
        if (!(nv >= val)) {  // rounding-level stagnation
            r.converged = true;
            break;
        }
        const double change = (nv - val) / nv;
        f = std::move(u);
        val = nv;
        if (change < o.rel_change) {
            r.converged = true;
            break;
        }
    }
    r.value = val;
    r.f = std::move(f);
    return r;
}

}  // namespace detail

// Quotient of a test function by adaptive quadrature (exact up to quadrature error).
inline double exact_quotient(const RayleighProblem& p, const TestFunction& f) {
    f.validate();
    const double q = p.q;
    const std::size_t n = f.grid.size() - 1;
    double mean = 0.0, mout = 0.0;
    if (p.mean_projection) {
        // near-constant maximizers make f - mean tiny: take the mean relative to a rough reference value and
        // the outside mass from the tails directly, so neither loses digits to cancellation
        std::vector<double> cm(n);
        double ref = 0.0, gm = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            cm[c] = detail::integrate_cell(p.num, f.grid[c], f.grid[c + 1]);
            ref += cm[c] * 0.5 * (f.values[c] + f.values[c + 1]);
            gm += cm[c];
        }
        ref = gm > 0.0 ? ref / gm : 0.0;
        quad::QuadratureSpec s;
        s.rel_tol = 1e-10;
        const double lt = quad::integrate(p.num, -quad::kInf, f.grid.front(), s).value;
        const double rt = quad::integrate(p.num, f.grid.back(), quad::kInf, s).value;
        mout = (std::isfinite(lt) ? lt : 0.0) + (std::isfinite(rt) ? rt : 0.0);
        double shift = -ref * mout;
        for (std::size_t c = 0; c < n; ++c)
            shift += detail::integrate_cell([&](double x) { return (f(x) - ref) * p.num(x); }, f.grid[c], f.grid[c + 1]);
        mean = ref + shift / p.total_mass;
    }
    double num = mout * std::pow(std::abs(mean), q);
    double den = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const double a = f.grid[c], b = f.grid[c + 1];
        num += detail::integrate_cell(
            [&](double x) {
                const double g = std::abs(f(x) - mean);
                return g == 0.0 ? 0.0 : std::pow(g, q) * p.num(x);
            },
            a, b);
        const double s = std::abs(f.cell_slope(c));
        if (s > 0.0) den += std::pow(s, q) * detail::integrate_cell(p.den, a, b);
    }
    if (p.boundary == Boundary::MuckenhouptFreeRight) num += p.tail_mass * std::pow(std::abs(f.values.back()), q);
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

inline RayleighEstimate maximize(const RayleighProblem& p, const SearchOptions& o = {}) {
    if (p.grid.size() < 3) throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 nodes");
    for (std::size_t i = 1; i < p.grid.size(); ++i)
        if (!(p.grid[i] > p.grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "grid must increase");
    if (!(p.q > 1.0)) throw Error(ErrorCode::QOutOfRange, "q must exceed 1");
    if (p.mean_projection && !(p.total_mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "mean projection needs mass");
    const bool q2 = p.q == 2.0 && !o.force_ascent;
    const auto A = detail::assemble(p, true, !q2);
    RayleighEstimate est;
    est.notes = A.notes;
    const auto eig = detail::eigen_top(p, A);
    if (q2) {
        est.method = Method::Eigen;
        est.discrete_value = eig.value;
        est.maximizer = TestFunction{p.grid, eig.f};
        est.iterations = 1;
        est.converged = true;
        if (eig.multiple) est.notes.push_back("top eigenvalue has multiplicity > 1; one maximizer returned");
    } else {
        // restarts: the q = 2 maximizer and seeded perturbations of it
        std::vector<std::vector<double>> starts{eig.f};
        for (int k = 1; k < std::max(1, o.restarts); ++k) {
            std::mt19937_64 rng(o.seed + 7919u * unsigned(k));
            std::normal_distribution<double> N01(0.0, 1.0);
            auto f = eig.f;
            for (auto& x : f) x = x * (1.0 + 0.3 * N01(rng)) + 0.05 * N01(rng);
            starts.push_back(std::move(f));
        }
        std::vector<detail::AscentResult> runs(starts.size());
        if (o.parallel && starts.size() > 1) {
            std::vector<std::future<detail::AscentResult>> fut;
            for (auto& s : starts) fut.push_back(std::async(std::launch::async, [&, s] { return detail::ascent(p, A, s, o); }));
            for (std::size_t k = 0; k < fut.size(); ++k) runs[k] = fut[k].get();
        } else {
            for (std::size_t k = 0; k < starts.size(); ++k) runs[k] = detail::ascent(p, A, starts[k], o);
        }
        std::size_t best = 0;
        for (std::size_t k = 1; k < runs.size(); ++k)
            if (runs[k].value > runs[best].value) best = k;
        est.method = Method::FixedPointAscent;
        est.discrete_value = runs[best].value;
        est.maximizer = TestFunction{p.grid, runs[best].f};
        est.iterations = runs[best].iterations;
        est.converged = runs[best].converged;
        est.notes.push_back("best of " + std::to_string(runs.size()) + " restarts: #" + std::to_string(best));
        if (!est.converged) est.notes.push_back("NotConverged: iteration cap reached, best iterate returned");
    }
    est.value = exact_quotient(p, est.maximizer);
    return est;
}

// ---------------------------------------------------------------------------------------------
// Grids

// 2*(n/2)+1 nodes on [center - span, center + span], graded toward the center; nested under n -> 2n
inline std::vector<double> line_grid(double center, double span, int n_nodes, double grading = 4.0) {
    const int h = std::max(2, n_nodes / 2);
    std::vector<double> g;
    auto off = [&](int j) { return span * std::expm1(grading * j / h) / std::expm1(grading); };
    for (int j = h; j >= 1; --j) g.push_back(center - off(j));
    g.push_back(center);
    for (int j = 1; j <= h; ++j) g.push_back(center + off(j));
    return g;
}

// 0 followed by n_nodes + 1 log-spaced radii on [1/span, span]; nested under n -> 2n
inline std::vector<double> radial_grid(double span, int n_nodes) {
    std::vector<double> g{0.0};
    const double lo = -std::log(span), hi = std::log(span);
    for (int j = 0; j <= n_nodes; ++j) g.push_back(std::exp(lo + (hi - lo) * j / n_nodes));
    return g;
}

// ---------------------------------------------------------------------------------------------
// Poincare inequality on the line

inline RayleighProblem poincare_problem(const criteria::LinePair& pair, int n_nodes, double span) {
    weights::validate(pair.w1);
    weights::validate(pair.w2);
    const auto mm = weights::line_median(pair.w1);
    RayleighProblem p;
    p.num = std::cref(pair.w1);
    p.den = std::cref(pair.w2);
    p.grid = line_grid(mm.median, span, n_nodes);
    p.q = pair.q;
    p.boundary = Boundary::LinePinned;
    p.mean_projection = true;
    p.total_mass = mm.mass;
    return p;
}

inline RayleighEstimate estimate_poincare_constant(const criteria::LinePair& pair, int n_nodes, double span,
                                                   const SearchOptions& o = {}) {
    if (n_nodes < 16) throw Error(ErrorCode::InvalidArgument, "n_nodes must be at least 16");
    if (!(span > 0.0)) throw Error(ErrorCode::InvalidArgument, "span must be positive");
    // the problem keeps references to the pair's weights: copy them into the closure
    auto w1 = std::make_shared<weights::LineWeight>(pair.w1);
    auto w2 = std::make_shared<weights::LineWeight>(pair.w2);
    auto p = poincare_problem(pair, n_nodes, span);
    p.num = [w1](double x) { return (*w1)(x); };
    p.den = [w2](double x) { return (*w2)(x); };
    return maximize(p, o);
}

// ---------------------------------------------------------------------------------------------
// Radial Hardy inequality: int |f|^q w1 dx <= C int |f'|^q w2 dx on R^N

struct RadialPair {
    std::function<double(double)> w1, w2;
    int dimension = 3;
    // optional logarithms of w1, w2 (stable near 0 and infinity); used when set
    std::function<double(double)> log_w1, log_w2;
};

inline RadialPair family_pair(const hardy::HardyDerivation& d) {
    if (!d.log_family_w1) throw Error(ErrorCode::InvalidArgument, "derivation has no family weights");
    return RadialPair{d.family_w1, d.family_w2, d.profile.dimension, d.log_family_w1, d.log_family_w2};
}

inline RadialPair derivation_pair(const hardy::HardyDerivation& d) {
    return RadialPair{d.w1, d.w2, d.profile.dimension, d.log_w1, d.log_w2};
}

inline std::function<double(double)> radial_density(const std::function<double(double)>& w,
                                                    const std::function<double(double)>& log_w, int n) {
    if (log_w)
        return [log_w, n](double r) { return r > 0.0 ? std::exp(log_w(r) + (n - 1) * std::log(r)) : 0.0; };
    return [w, n](double r) {
        if (!(r > 0.0)) return 0.0;
        const double v = w(r);
        return v == 0.0 ? 0.0 : v * std::pow(r, n - 1);
    };
}

inline RayleighProblem hardy_problem(const RadialPair& pair, double q, int n_nodes, double span) {
    RayleighProblem p;
    p.num = radial_density(pair.w1, pair.log_w1, pair.dimension);
    p.den = radial_density(pair.w2, pair.log_w2, pair.dimension);
    p.grid = radial_grid(span, n_nodes);
    p.q = q;
    p.boundary = Boundary::RadialFreeLeft;
    return p;
}

inline RayleighEstimate estimate_hardy_constant(const RadialPair& pair, double q, int n_nodes, double span,
                                                const SearchOptions& o = {},
                                                std::vector<double> scales = {1.0, 1e-1, 1e-2, 1e-3}) {
    if (n_nodes < 16) throw Error(ErrorCode::InvalidArgument, "n_nodes must be at least 16");
    if (!(span > 1.0)) throw Error(ErrorCode::InvalidArgument, "span must exceed 1");
    const auto p = hardy_problem(pair, q, n_nodes, span);
    auto est = maximize(p, o);
    // rescaled maximizers phi(s x): the quotient trend as the profile moves outward
    est.rescaling_scales = scales;
    for (double s : scales) est.rescaling_trend.push_back(exact_quotient(p, est.maximizer.rescaled(s)));
    return est;
}

// ---------------------------------------------------------------------------------------------
// Half-line Muckenhoupt inequality: int_0^inf |f - f(0)|^q w1 <= C_M int_0^inf |f'|^q w2

inline RayleighEstimate estimate_muckenhoupt_constant(const criteria::HalfLineWeight& w1,
                                                      const criteria::HalfLineWeight& w2, double q, int n_nodes,
                                                      double span, const SearchOptions& o = {}) {
    if (n_nodes < 16) throw Error(ErrorCode::InvalidArgument, "n_nodes must be at least 16");
    RayleighProblem p;
    p.num = w1.f;
    p.den = w2.f;
    p.grid = radial_grid(span, n_nodes);
    p.q = q;
    p.boundary = Boundary::MuckenhouptFreeRight;
    quad::QuadratureSpec s;
    s.rel_tol = 1e-10;
    const auto tail = quad::integrate(w1.f, p.grid.back(), quad::kInf, s);
    if (tail.diverging || !std::isfinite(tail.value))
        throw Error(ErrorCode::MassInfinite, "w1 not integrable at infinity: the constant is infinite");
    p.tail_mass = tail.value;
    return maximize(p, o);
}

// ---------------------------------------------------------------------------------------------
// Witness search for pairs that fail the criterion

struct CounterexampleOptions {
    int budget = 16;           // number of truncation radii tried
    double threshold = 1e3;    // quotient that counts as a witness
    bool require_failed_certification = true;
    int nodes = 200;
};

struct CounterexampleResult {
    std::optional<TestFunction> witness;
    double quotient = 0.0;
    std::vector<double> trail;  // best quotient per truncation radius
    std::string side;           // "+" or "-"
    std::vector<std::string> notes;
};

namespace detail {

// F = 0 left of m, primitive of w2^{-1/(q-1)} on (m, t), flat until t + d, linear ramp to 0 over [t + d, t + d + L]
inline TestFunction truncated_primitive(const weights::LineWeight& w2, double m, double t, double d, double L,
                                        double q, int nodes) {
    TestFunction f;
    const auto dual = criteria::dual_weight(std::cref(w2), q);
    f.grid.push_back(m - L);
    f.values.push_back(0.0);
    f.grid.push_back(m);
    f.values.push_back(0.0);
    double acc = 0.0, prev = m;
    for (int i = 1; i <= nodes; ++i) {
        const double x = m + (t - m) * double(i) / nodes;
        acc += integrate_cell(dual, prev, x);
        prev = x;
        f.grid.push_back(x);
        f.values.push_back(acc);
    }
    if (d > 0.0) {
        f.grid.push_back(t + d);
        f.values.push_back(acc);
    }
    f.grid.push_back(t + d + L);
    f.values.push_back(0.0);
    return f;
}

}  // namespace detail

inline CounterexampleResult counterexample_search(const criteria::LinePair& pair, const CounterexampleOptions& o = {}) {
    CounterexampleResult out;
    const auto rep = criteria::certify_poincare_line(pair);
    if (o.require_failed_certification && rep.holds)
        throw Error(ErrorCode::PreconditionViolated, "pair certifies: no counterexample exists");
    const bool plus = !rep.b_plus.finite() || rep.b_minus.finite();
    out.side = plus ? "+" : "-";
    // work on the divergent side; the minus side is the reflected problem
    const auto w1 = plus ? pair.w1 : pair.w1.reflected();
    const auto w2 = plus ? pair.w2 : pair.w2.reflected();
    const double m = plus ? rep.median : -rep.median;
    RayleighProblem p;
    p.num = [w1](double x) { return w1(x); };
    p.den = [w2](double x) { return w2(x); };
    p.q = pair.q;
    p.boundary = Boundary::LinePinned;
    p.mean_projection = true;
    p.total_mass = rep.mass;
    const double scale = std::abs(m) + 1.0;
    double best = 0.0;
    for (int k = 0; k < o.budget; ++k) {
        const double t = m + scale * std::pow(2.0, 0.5 * k);
        double round_best = 0.0;
        TestFunction round_f;
        for (double d : {0.0, 1.0, 4.0, 16.0}) {
            TestFunction f;
            try {
                f = detail::truncated_primitive(w2, m, t, d * scale, scale, pair.q, o.nodes);
            } catch (const Error&) {
                continue;
            }
            bool finite = true;
            for (double v : f.values) finite = finite && std::isfinite(v);
            if (!finite) continue;
            const double qv = exact_quotient(p, f);
            if (std::isfinite(qv) && qv > round_best) round_best = qv, round_f = f;
        }
        out.trail.push_back(round_best);
        if (round_best > best) {
            best = round_best;
            out.quotient = best;
        }
        if (round_best > o.threshold) {
            if (!plus)
                for (auto& x : round_f.grid) x = -x;
            if (!plus) {
                std::reverse(round_f.grid.begin(), round_f.grid.end());
                std::reverse(round_f.values.begin(), round_f.values.end());
            }
            out.witness = round_f;
            out.notes.push_back("witness quotient " + std::to_string(round_best) + " > " + std::to_string(o.threshold));
            return out;
        }
    }
    out.notes.push_back("WitnessNotFound: best quotient " + std::to_string(best) + " within budget " +
                        std::to_string(o.budget));
    return out;
}

}  // namespace hardycert::rayleigh
