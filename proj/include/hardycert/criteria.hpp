#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hardycert/error.hpp"
#include "hardycert/quad.hpp"
#include "hardycert/weights.hpp"

namespace hardycert::criteria {

using quad::kInf;
using weights::Finiteness;

struct ScanOptions {
    int scan_points = 200;
    double rel_tol = 1e-8;
    double horizon_factor = 1e6;  // T_max = horizon_factor * (|anchor| + 1)
    int max_extensions = 3;
    int slope_points = 10;
};

struct SupremumScanResult {
    Finiteness verdict = Finiteness::Finite;
    double value = 0.0;  // +inf unless Finite
    double argmax = 0.0;
    bool argmax_at_infinity = false;
    int scan_points = 0;
    bool refined = false;
    std::string cause;
    std::vector<std::string> notes;

    bool finite() const { return verdict == Finiteness::Finite; }
};

// sup over t in (anchor, upper) of [int_t^upper outer] * [int_anchor^t inner]^(q-1)
struct ScanProblem {
    std::function<double(double)> outer;
    std::function<double(double)> inner;
    double anchor = 0.0;
    double upper = kInf;
    double q = 2.0;
    std::vector<double> breaks;  // points where either integrand is not smooth
    double length_scale = 1.0;   // horizon base when upper is infinite
};

inline double lower_factor(double q) { return std::pow(std::pow(2.0, (q - 1.0) / q) - 1.0, q) / std::pow(2.0, q - 1.0); }
inline double upper_factor(double q) { return std::pow(2.0 * q, q) * std::pow(q - 1.0, 1.0 - q); }
inline double holder_conjugate(double q) { return q / (q - 1.0); }

namespace detail {

inline constexpr double kTinyOuter = 1e-250;
inline constexpr double kHugeInner = 1e300;

enum class Blowup : char { None, Diverging, NonFinite };

struct Piece {
    double value;
    bool infinite;
    Blowup kind = Blowup::None;  // Diverging: the quadrature saw a non-integrable endpoint
};

inline Piece piece(const std::function<double(double)>& f, double a, double b, double rel) {
    if (!(b > a)) return {0.0, false};
    quad::QuadratureSpec s;
    s.rel_tol = rel;
    s.max_subdivisions = 600;
    try {
        const auto r = quad::integrate(f, a, b, s);
        if (r.diverging) return {kInf, true, Blowup::Diverging};
        if (!std::isfinite(r.value)) return {kInf, true, Blowup::NonFinite};
        return {r.value, false};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonFiniteSample) return {kInf, true, Blowup::NonFinite};
        throw;
    }
}

struct Table {
    std::vector<double> t, a, b;
    std::vector<Blowup> b_inf_genuine;  // why B became infinite
    bool outer_infinite = false;
};

inline double log_phi(double a, double b, double q) {
    if (a == 0.0) return -kInf;
    if (b == 0.0) return -kInf;
    return std::log(a) + (q - 1.0) * std::log(b);
}

inline std::vector<double> scan_grid(const ScanProblem& p, const ScanOptions& o, double horizon) {
    std::vector<double> t;
    const int n = std::max(8, o.scan_points);
    if (std::isinf(p.upper)) {
        const double lo = 1e-8 * p.length_scale;
        for (int i = 0; i < n; ++i) t.push_back(p.anchor + lo * std::pow(horizon / lo, double(i) / (n - 1)));
    } else {
        const double len = p.upper - p.anchor, lo = 1e-9 * len;
        const int h = n / 2;
        for (int i = 0; i < h; ++i) t.push_back(p.anchor + lo * std::pow(0.5 * len / lo, double(i) / (h - 1)));
        for (int i = h - 2; i >= 0; --i) t.push_back(p.upper - lo * std::pow(0.5 * len / lo, double(i) / (h - 1)));
    }
    for (double x : p.breaks)
        if (x > p.anchor && x < (std::isinf(p.upper) ? horizon + p.anchor : p.upper)) t.push_back(x);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    t.erase(std::remove_if(t.begin(), t.end(), [&](double x) { return !(x > p.anchor && x < p.upper); }), t.end());
    return t;
}

// Fill B forward from index `from` and A backward from the end (tail integral to `upper`).
inline void fill(Table& tb, const ScanProblem& p, double rel, std::size_t from) {
    const std::size_t n = tb.t.size();
    tb.a.resize(n);
    tb.b.resize(n);
    tb.b_inf_genuine.resize(n);
    for (std::size_t k = from; k < n; ++k) {
        const double left = k == 0 ? p.anchor : tb.t[k - 1];
        const double prev = k == 0 ? 0.0 : tb.b[k - 1];
        const Blowup prev_gen = k == 0 ? Blowup::None : tb.b_inf_genuine[k - 1];
        if (std::isinf(prev)) {
            tb.b[k] = kInf;
            tb.b_inf_genuine[k] = prev_gen;
            continue;
        }
        const auto pc = piece(p.inner, left, tb.t[k], rel);
        tb.b[k] = prev + pc.value;
        tb.b_inf_genuine[k] = pc.kind;
    }
    const auto tail = piece(p.outer, tb.t[n - 1], p.upper, rel);
    tb.outer_infinite = tail.infinite;
    tb.a[n - 1] = tail.value;
    for (std::size_t k = n - 1; k-- > 0;) {
        if (std::isinf(tb.a[k + 1])) {
            tb.a[k] = kInf;
            continue;
        }
        const auto pc = piece(p.outer, tb.t[k], tb.t[k + 1], rel);
        if (pc.infinite) tb.outer_infinite = true;
        tb.a[k] = tb.a[k + 1] + pc.value;
    }
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double& best_x, int iters = 80) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && (hi - lo) > 1e-12 * (std::abs(lo) + std::abs(hi)); ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    if (f1 >= f2) {
        best_x = x1;
        return f1;
    }
    best_x = x2;
    return f2;
}

}  // namespace detail

inline SupremumScanResult scan_supremum(const ScanProblem& p, const ScanOptions& o = {}) {
    if (!(p.q > 1.0)) throw Error(ErrorCode::QOutOfRange, "q must exceed 1");
    if (!(p.upper > p.anchor)) throw Error(ErrorCode::InvalidArgument, "empty scan range");
    SupremumScanResult res;
    const double rel = std::max(1e-12, 0.01 * o.rel_tol);
    const bool infinite_upper = std::isinf(p.upper);
    double horizon = o.horizon_factor * p.length_scale;
    detail::Table tb;
    tb.t = detail::scan_grid(p, o, horizon);
    detail::fill(tb, p, rel, 0);

    auto classify_infinite = [&](std::size_t k) -> bool {
        // a genuinely divergent inner piece with outer mass still present
        if (!std::isinf(tb.b[k]) || !(tb.a[k] > 0.0)) return false;
        if (tb.b_inf_genuine[k] == detail::Blowup::Diverging) return true;
        // an overflowing sample counts only if the product would already be large at B = kHugeInner;
        // otherwise it is the dual weight exceeding double range where the outer mass is negligible
        return tb.b_inf_genuine[k] == detail::Blowup::NonFinite &&
               std::log(tb.a[k]) + (p.q - 1.0) * std::log(detail::kHugeInner) > std::log(1e3);
    };

    int extensions = 0;
    for (;;) {
        const std::size_t n = tb.t.size();
        if (tb.outer_infinite) {
            res.verdict = Finiteness::NumericallyDivergent;
            res.value = kInf;
            res.cause = "outer integral diverges";
            res.scan_points = int(n);
            return res;
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (classify_infinite(k)) {
                res.verdict = Finiteness::NumericallyDivergent;
                res.value = kInf;
                res.argmax = tb.t[k];
                res.cause = k == 0 ? "InnerIntegralDiverges at the anchor" : "inner integral diverges";
                res.scan_points = int(n);
                return res;
            }
        }
        // valid points: outer mass not underflowed, inner integral not overflowed
        std::vector<std::size_t> valid;
        for (std::size_t k = 0; k < n; ++k)
            if (tb.a[k] >= detail::kTinyOuter && tb.b[k] < detail::kHugeInner) valid.push_back(k);
        if (valid.empty()) {
            res.value = 0.0;
            res.scan_points = int(n);
            res.notes.push_back("no point with resolvable outer mass; supremum taken as 0");
            return res;
        }
        std::size_t best = valid.front();
        double best_l = -kInf;
        for (auto k : valid) {
            const double l = detail::log_phi(tb.a[k], tb.b[k], p.q);
            if (l > best_l) {
                best_l = l;
                best = k;
            }
        }
        const bool truncated = valid.back() + 1 < n;  // outer underflow or inner overflow cut the scan
        const auto pos = std::find(valid.begin(), valid.end(), best) - valid.begin();
        const bool near_end = std::size_t(pos) + 3 >= valid.size();
        if (infinite_upper && near_end && !truncated && extensions < o.max_extensions) {
            // extend the horizon x10 and rescan the new stretch
            const std::size_t old_n = n;
            const double t_last = tb.t.back();
            const double new_h = 10.0 * horizon;
            for (int i = 1; i <= 20; ++i)
                tb.t.push_back(p.anchor + horizon * std::pow(10.0, i / 20.0));
            (void)t_last;
            horizon = new_h;
            ++extensions;
            res.notes.push_back("horizon extended to " + std::to_string(horizon));
            // recompute A for all (the tail integral moved), B only for the new points
            detail::Table fresh = tb;
            detail::fill(fresh, p, rel, old_n);
            tb = fresh;
            continue;
        }
        res.scan_points = int(n);
        double value = std::exp(best_l);
        res.argmax = tb.t[best];
        if (!std::isfinite(best_l) || best_l == -kInf) {
            res.value = 0.0;
            return res;
        }
        // growth at the horizon: fitted log-log slope over the last valid points
        if (infinite_upper && near_end) {
            const int m = std::min<int>(o.slope_points, int(valid.size()));
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int cnt = 0;
            for (int i = int(valid.size()) - m; i < int(valid.size()); ++i) {
                const auto k = valid[i];
                const double lp = detail::log_phi(tb.a[k], tb.b[k], p.q);
                if (!std::isfinite(lp)) continue;
                const double lx = std::log(tb.t[k] - p.anchor);
                sx += lx, sy += lp, sxx += lx * lx, sxy += lx * lp;
                ++cnt;
            }
            const double slope = cnt > 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
            const auto kl = valid.back(), kp = valid[valid.size() - 2];
            const double growth = detail::log_phi(tb.a[kl], tb.b[kl], p.q) - detail::log_phi(tb.a[kp], tb.b[kp], p.q);
            if (slope > 1e-3 && growth > o.rel_tol) {
                res.verdict = Finiteness::NumericallyDivergent;
                res.value = kInf;
                res.argmax_at_infinity = true;
                res.cause = "still growing at the scan horizon";
                res.notes.push_back("heuristic: fitted log-log slope " + std::to_string(slope) + " > 0");
                return res;
            }
        }
        // golden-section refinement inside the bracket around the best scan point
        const double lo = best == 0 ? p.anchor : tb.t[best - 1];
        const double hi = best + 1 < n ? tb.t[best + 1] : tb.t[best];
        if (best + 1 < n && hi > lo) {
            const double b_lo = best == 0 ? 0.0 : tb.b[best - 1];
            const double a_hi = tb.a[best + 1];
            auto eval = [&](double u) {
                const double t = p.anchor + std::exp(u);
                if (!(t > lo && t < hi)) return -kInf;
                const auto bi = detail::piece(p.inner, lo, t, rel);
                const auto ao = detail::piece(p.outer, t, hi, rel);
                if (bi.infinite || ao.infinite) return -kInf;
                return detail::log_phi(a_hi + ao.value, b_lo + bi.value, p.q);
            };
            const double ulo = best == 0 ? std::log(tb.t[0] - p.anchor) - 20.0 : std::log(lo - p.anchor);
            const double uhi = std::log(hi - p.anchor);
            double ux = 0.0;
            const double refined = detail::golden_max(eval, ulo, uhi, ux);
            if (std::isfinite(refined) && refined > best_l) {
                best_l = refined;
                res.argmax = p.anchor + std::exp(ux);
            }
            res.refined = true;
            value = std::exp(best_l);
        }
        res.value = value;
        if (infinite_upper) {
            const auto kl = valid.back();
            const double last = std::exp(detail::log_phi(tb.a[kl], tb.b[kl], p.q));
            if (last >= (1.0 - 1e-6) * value) {
                res.argmax_at_infinity = true;
                res.value = std::max(value, last);
            }
        }
        return res;
    }
}

// ---------------------------------------------------------------------------------------------
// Line quantities

inline std::vector<double> merged_breaks(const weights::LineWeight& a, const weights::LineWeight& b) {
    auto x = a.breakpoints();
    auto y = b.breakpoints();
    x.insert(x.end(), y.begin(), y.end());
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

inline std::function<double(double)> dual_weight(std::function<double(double)> w2, double q) {
    const double e = 1.0 / (1.0 - q);
    return [w2 = std::move(w2), e](double s) {
        const double v = w2(s);
        if (v == 0.0) return kInf;
        return std::pow(v, e);
    };
}

// Analytic classification of B_m^+ from declared power behaviour; nullopt when undecided.
inline std::optional<std::string> bplus_exponent_divergence(const weights::LineWeight& w1,
                                                            const weights::LineWeight& w2, double m, double q) {
    if (auto l = w2.local_power(m); l && *l / (q - 1.0) >= 1.0 && w1(m + 1e-3) > 0.0)
        return "InnerIntegralDiverges: w2 vanishes at the anchor like |s-m|^" + std::to_string(*l);
    const auto a1 = w1.tail_power(true), a2 = w2.tail_power(true);
    if (a1 && *a1 >= -1.0) return "outer integral diverges: w1 tail exponent >= -1";
    if (a1 && w2.tail_fast(true)) return "inner integral grows exponentially against a power tail of w1";
    if (a1 && a2 && *a2 < q - 1.0 && *a1 - *a2 + q > 0.0)
        return "tail exponent a1 - a2 + q = " + std::to_string(*a1 - *a2 + q) + " > 0";
    return std::nullopt;
}

inline SupremumScanResult b_plus(const weights::LineWeight& w1, const weights::LineWeight& w2, double m, double q,
                                 const ScanOptions& o = {}) {
    if (!(q > 1.0)) throw Error(ErrorCode::QOutOfRange, "q must exceed 1");
    weights::validate(w1);
    weights::validate(w2);
    ScanProblem p;
    p.outer = std::cref(w1);
    p.inner = dual_weight(std::cref(w2), q);
    p.anchor = m;
    p.q = q;
    p.breaks = merged_breaks(w1, w2);
    p.length_scale = std::abs(m) + 1.0;
    if (auto why = bplus_exponent_divergence(w1, w2, m, q)) {
        SupremumScanResult r;
        r.verdict = Finiteness::ProvenInfinite;
        r.value = kInf;
        r.cause = *why;
        // numerical cross-check recorded alongside the analytic verdict
        try {
            auto num = scan_supremum(p, o);
            r.scan_points = num.scan_points;
            r.notes.push_back(std::string("numerical cross-check: ") + weights::to_string(num.verdict));
        } catch (const Error&) {
            r.notes.push_back("numerical cross-check failed");
        }
        return r;
    }
    return scan_supremum(p, o);
}

inline SupremumScanResult b_minus(const weights::LineWeight& w1, const weights::LineWeight& w2, double m, double q,
                                  const ScanOptions& o = {}) {
    auto r = b_plus(w1.reflected(), w2.reflected(), -m, q, o);
    if (!r.argmax_at_infinity) r.argmax = -r.argmax;
    return r;
}

// Half-line weight with optional declared power exponents.
struct HalfLineWeight {
    std::function<double(double)> f;
    std::optional<double> tail_power;
    std::optional<double> origin_power;
    double operator()(double r) const { return f(r); }
};

// H_M = sup_rho [int_rho^inf w1][int_0^rho w2^{-1/(q-1)}]^{q-1}
inline SupremumScanResult muckenhoupt_HM(const HalfLineWeight& w1, const HalfLineWeight& w2, double q,
                                         const ScanOptions& o = {}) {
    if (!(q > 1.0)) throw Error(ErrorCode::QOutOfRange, "q must exceed 1");
    ScanProblem p;
    p.outer = w1.f;
    p.inner = dual_weight(w2.f, q);
    p.anchor = 0.0;
    p.q = q;
    if (w1.tail_power && *w1.tail_power >= -1.0) {
        SupremumScanResult r;
        r.verdict = Finiteness::ProvenInfinite;
        r.value = kInf;
        r.cause = "outer integral diverges: w1 tail exponent >= -1";
        return r;
    }
    if (w2.origin_power && *w2.origin_power / (q - 1.0) >= 1.0) {
        SupremumScanResult r;
        r.verdict = Finiteness::ProvenInfinite;
        r.value = kInf;
        r.cause = "InnerIntegralDiverges at 0";
        return r;
    }
    return scan_supremum(p, o);
}

// Same quantity anchored at infinity: sup_rho [int_0^rho w1][int_rho^inf w2^{-1/(q-1)}]^{q-1}.
// Evaluated through r = 1/x, which maps it onto the form above.
inline SupremumScanResult muckenhoupt_HM_at_infinity(const HalfLineWeight& w1, const HalfLineWeight& w2, double q,
                                                     const ScanOptions& o = {}) {
    HalfLineWeight a{[f = w1.f](double x) { return f(1.0 / x) / (x * x); }, std::nullopt, std::nullopt};
    // the dual weight transforms with the Jacobian too, so transform w2 such that its dual picks up 1/x^2
    auto inner = [f = w2.f, q](double x) {
        const double v = f(1.0 / x);
        if (v == 0.0) return kInf;
        return std::pow(v, 1.0 / (1.0 - q)) / (x * x);
    };
    ScanProblem p;
    p.outer = a.f;
    p.inner = inner;
    p.anchor = 0.0;
    p.q = q;
    auto r = scan_supremum(p, o);
    if (r.finite() && !r.argmax_at_infinity && r.argmax > 0.0) r.argmax = 1.0 / r.argmax;
    return r;
}

// Two-sided radial quantity around m for the radial densities a(r) (left side measure) and the
// dual of b(r): max of the right sup over t>m and the left sup over t in (0,m).
inline SupremumScanResult radial_two_sided(const std::function<double(double)>& a, const std::function<double(double)>& b,
                                           double m, double q, const ScanOptions& o = {}) {
    auto dual = dual_weight(b, q);
    ScanProblem right;
    right.outer = a;
    right.inner = dual;
    right.anchor = m;
    right.q = q;
    right.length_scale = m + 1.0;
    auto rr = scan_supremum(right, o);
    ScanProblem left;
    left.outer = [a](double s) { return a(-s); };
    left.inner = [dual](double s) { return dual(-s); };
    left.anchor = -m;
    left.upper = 0.0;
    left.q = q;
    auto rl = scan_supremum(left, o);
    SupremumScanResult out = rr;
    out.notes.push_back(std::string("right supremum ") + weights::to_string(rr.verdict) + " " + std::to_string(rr.value));
    out.notes.push_back(std::string("left supremum ") + weights::to_string(rl.verdict) + " " + std::to_string(rl.value));
    if (!rl.finite() || (rr.finite() && rl.value > rr.value)) {
        out = rl;
        out.argmax = -rl.argmax;
        out.argmax_at_infinity = false;
        out.notes.insert(out.notes.begin(), rr.notes.begin(), rr.notes.end());
        out.notes.push_back("maximum attained on the left side");
    }
    out.scan_points = rr.scan_points + rl.scan_points;
    return out;
}

inline SupremumScanResult h2(const weights::RadialWeightFamily& f, double m, double q, const ScanOptions& o = {}) {
    if (!(q > 1.0)) throw Error(ErrorCode::QOutOfRange, "q must exceed 1");
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "h2 needs m > 0");
    weights::validate(f);
    const int n = f.dimension;
    auto a = [&f, n](double r) { return weights::h_times_power(f, r, n - 1); };
    auto b = [&f, n, q](double r) { return weights::h_times_power(f, r, n - 1 + q); };
    const auto asy = weights::asymptotics(f);
    // Both sups share the exponent sum 0 for power-like h, so finiteness reduces to the
    // finiteness of the outer integrals at 0 and at infinity.
    if (auto why = weights::exponent_divergence(asy, n)) {
        SupremumScanResult r;
        r.verdict = Finiteness::ProvenInfinite;
        r.value = kInf;
        r.cause = "outer integral diverges: " + *why;
        try {
            auto num = radial_two_sided(a, b, m, q, o);
            r.scan_points = num.scan_points;
            r.notes.push_back(std::string("numerical cross-check: ") + weights::to_string(num.verdict));
        } catch (const Error&) {
            r.notes.push_back("numerical cross-check failed");
        }
        return r;
    }
    auto r = radial_two_sided(a, b, m, q, o);
    if (asy.origin && asy.tail && !r.finite())
        r.notes.push_back("warning: exponent analysis predicts a finite value");
    return r;
}

// ---------------------------------------------------------------------------------------------
// Certification

enum class ReportKind { PoincareLine, HardyPoincareRN };

struct CertificationReport {
    ReportKind kind = ReportKind::PoincareLine;
    double q = 2.0;
    double median = 0.0;
    double mass = 0.0;
    SupremumScanResult b_plus, b_minus, h2;
    bool holds = false;
    double max_b = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    std::optional<double> constructive_bound;  // 2^{q-1} max{C1, (H1/|S|)^q C_sph}
    bool constructive_bound_symbolic = false;   // C_sph unknown for q != 2
    std::vector<std::string> notes;
};

struct LinePair {
    weights::LineWeight w1, w2;
    double q = 2.0;
};

inline CertificationReport certify_poincare_line(const LinePair& pair, const ScanOptions& o = {}) {
    if (!(pair.q > 1.0)) throw Error(ErrorCode::QOutOfRange, "q must exceed 1");
    CertificationReport rep;
    rep.kind = ReportKind::PoincareLine;
    rep.q = pair.q;
    const auto mm = weights::line_median(pair.w1);
    rep.median = mm.median;
    rep.mass = mm.mass;
    rep.b_plus = b_plus(pair.w1, pair.w2, mm.median, pair.q, o);
    rep.b_minus = b_minus(pair.w1, pair.w2, mm.median, pair.q, o);
    rep.holds = rep.b_plus.finite() && rep.b_minus.finite();
    rep.max_b = std::max(rep.b_plus.value, rep.b_minus.value);
    rep.lower_bound = lower_factor(pair.q) * rep.max_b;
    rep.upper_bound = upper_factor(pair.q) * rep.max_b;
    rep.notes.push_back("q' = q/(q-1) = " + std::to_string(holder_conjugate(pair.q)));
    for (const auto* s : {&rep.b_plus, &rep.b_minus})
        if (s->verdict == Finiteness::NumericallyDivergent)
            rep.notes.push_back("divergence detected numerically (heuristic): " + s->cause);
    return rep;
}

inline CertificationReport certify_hardy_poincare(const weights::RadialWeightFamily& f, double q,
                                                  const ScanOptions& o = {}) {
    const int n = f.dimension;
    if (n < 2) throw Error(ErrorCode::QOutOfRange, "Hardy-Poincare certification needs N >= 2");
    if (n == 2 && !(q > 1.0 && q <= 2.0)) throw Error(ErrorCode::QOutOfRange, "N=2 requires 1 < q <= 2");
    if (n >= 3 && !(q > 1.0 && q < n)) throw Error(ErrorCode::QOutOfRange, "N>=3 requires 1 < q < N");
    const auto m = weights::mass(f);
    CertificationReport rep;
    rep.kind = ReportKind::HardyPoincareRN;
    rep.q = q;
    if (m.verdict == Finiteness::ProvenInfinite) {
        // the outer integral of H2 is the same tail of h r^{N-1}, so H2 is infinite as well
        rep.median = std::numeric_limits<double>::quiet_NaN();
        rep.mass = kInf;
        rep.h2.verdict = Finiteness::ProvenInfinite;
        rep.h2.value = kInf;
        rep.h2.cause = "outer integral diverges: " + m.cause;
        rep.max_b = rep.lower_bound = rep.upper_bound = kInf;
        rep.notes.push_back("H1 infinite, no median; inequality fails");
        return rep;
    }
    if (!m.finite()) throw Error(ErrorCode::MassInfinite, "H1 not finite: " + m.cause);
    const auto mm = weights::median(f);
    rep.median = mm.median;
    rep.mass = mm.mass;
    rep.h2 = h2(f, mm.median, q, o);
    rep.holds = rep.h2.finite();
    rep.max_b = rep.h2.value;
    rep.lower_bound = lower_factor(q) * rep.max_b;
    rep.upper_bound = upper_factor(q) * rep.max_b;
    if (rep.holds) {
        const double c1 = upper_factor(q) * rep.h2.value;
        if (q == 2.0) {
            const double csph = 1.0 / (n - 1.0);
            const double sphere = std::pow(rep.mass / weights::surface_area(n), q) * csph;
            rep.constructive_bound = std::pow(2.0, q - 1.0) * std::max(c1, sphere);
            rep.notes.push_back("constructive bound uses C_sph = 1/(N-1)");
        } else {
            rep.constructive_bound = std::pow(2.0, q - 1.0) * c1;
            rep.constructive_bound_symbolic = true;
            rep.notes.push_back("C_sph unknown for q != 2: constructive bound is a lower estimate of the true expression");
        }
        rep.notes.push_back(*rep.constructive_bound < rep.upper_bound ? "smaller upper bound: constructive"
                                                                       : "smaller upper bound: two-factor");
    }
    return rep;
}

}  // namespace hardycert::criteria
