#pragma once

// Config-driven front end: strict JSON in, report.json / report.txt / CSV / SVG out.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "criteria.hpp"
#include "error.hpp"
#include "fastdiff.hpp"
#include "hardy_construct.hpp"
#include "optimal_search.hpp"
#include "weights.hpp"

namespace hardycert::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSchema = 1;

enum Exit : int { Ok = 0, ToolFailure = 1, DoesNotHold = 2, BadConfig = 3 };

// ---------------------------------------------------------------- strict schema

inline void allow(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + ": expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw Error(ErrorCode::ConfigError, where + ": unknown field '" + k + "'");
}

inline const json& need(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::ConfigError, where + ": missing field '" + key + "'");
    return j.at(key);
}

inline double num(const json& j, const std::string& where, const char* key, std::optional<double> dflt = {}) {
    if (!j.contains(key)) {
        if (dflt) return *dflt;
        throw Error(ErrorCode::ConfigError, where + ": missing field '" + key + "'");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorCode::ConfigError, where + "." + key + ": expected a number");
    return v.get<double>();
}

inline int integer(const json& j, const std::string& where, const char* key, std::optional<int> dflt = {}) {
    if (!j.contains(key)) {
        if (dflt) return *dflt;
        throw Error(ErrorCode::ConfigError, where + ": missing field '" + key + "'");
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::ConfigError, where + "." + key + ": expected an integer");
    return v.get<int>();
}

inline bool boolean(const json& j, const std::string& where, const char* key, bool dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_boolean()) throw Error(ErrorCode::ConfigError, where + "." + key + ": expected true/false");
    return v.get<bool>();
}

inline std::string text(const json& j, const std::string& where, const char* key,
                        std::optional<std::string> dflt = {}) {
    if (!j.contains(key)) {
        if (dflt) return *dflt;
        throw Error(ErrorCode::ConfigError, where + ": missing field '" + key + "'");
    }
    const auto& v = j.at(key);
    if (!v.is_string()) throw Error(ErrorCode::ConfigError, where + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline std::vector<std::pair<double, double>> node_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(ErrorCode::ConfigError, where + ": expected [[x, y], ...]");
    std::vector<std::pair<double, double>> out;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw Error(ErrorCode::ConfigError, where + ": each node must be [x, y]");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

// ---------------------------------------------------------------- weights

// {kind, params, shift?, multiplier?, support?}
inline weights::LineWeight parse_line_weight(const json& j, const std::string& where) {
    allow(j, where, {"kind", "params", "shift", "multiplier", "support"});
    const std::string kind = text(j, where, "kind");
    const json params = j.contains("params") ? j.at("params") : json::object();
    const std::string pw = where + ".params";
    weights::LineWeight w;
    if (kind == "laplace") {
        allow(params, pw, {"rate"});
        w = weights::LineWeight::laplace(num(params, pw, "rate", 1.0));
    } else if (kind == "gaussian") {
        allow(params, pw, {"sigma"});
        w = weights::LineWeight::gaussian(num(params, pw, "sigma", 1.0));
    } else if (kind == "power") {
        allow(params, pw, {"gamma", "beta", "alpha"});
        w = weights::LineWeight::power_type(num(params, pw, "gamma"), num(params, pw, "beta"), num(params, pw, "alpha"));
    } else if (kind == "bump") {
        allow(params, pw, {"power"});
        w = weights::LineWeight::bump(num(params, pw, "power", 1.0));
    } else if (kind == "tabulated") {
        allow(params, pw, {"nodes"});
        w = weights::LineWeight::tabulated(node_list(need(params, pw, "nodes"), pw + ".nodes"));
    } else {
        throw Error(ErrorCode::ConfigError, where + ".kind: unknown line weight '" + kind + "'");
    }
    w = w.shifted(num(j, where, "shift", 0.0)).scaled(num(j, where, "multiplier", 1.0));
    const std::string s = text(j, where, "support", std::string("all"));
    if (s == "positive") w = w.restricted(weights::Support::Positive);
    else if (s == "negative") w = w.restricted(weights::Support::Negative);
    else if (s != "all") throw Error(ErrorCode::ConfigError, where + ".support: expected all|positive|negative");
    weights::validate(w);
    return w;
}

inline json line_weight_json(const weights::LineWeight& w) {
    json p;
    std::string kind;
    switch (w.kind) {
    case weights::LineKind::Laplace: kind = "laplace", p = {{"rate", w.rate}}; break;
    case weights::LineKind::Gaussian: kind = "gaussian", p = {{"sigma", w.sigma}}; break;
    case weights::LineKind::Power: kind = "power", p = {{"gamma", w.gamma}, {"beta", w.beta}, {"alpha", w.alpha}}; break;
    case weights::LineKind::Bump: kind = "bump", p = {{"power", w.power}}; break;
    case weights::LineKind::Tabulated: kind = "tabulated", p = {{"nodes", w.nodes}}; break;
    case weights::LineKind::Custom: throw Error(ErrorCode::ConfigError, "custom weights are not serializable");
    }
    const char* sup = w.support == weights::Support::All ? "all" : w.support == weights::Support::Positive ? "positive"
                                                                                                          : "negative";
    return {{"kind", kind}, {"params", p}, {"shift", w.shift}, {"multiplier", w.multiplier}, {"support", sup}};
}

// {kind, params, dimension, scale?}
inline weights::RadialWeightFamily parse_family(const json& j, const std::string& where) {
    allow(j, where, {"kind", "params", "dimension", "scale"});
    const std::string kind = text(j, where, "kind");
    const json params = j.contains("params") ? j.at("params") : json::object();
    const std::string pw = where + ".params";
    weights::RadialWeightFamily f;
    if (kind == "power") {
        allow(params, pw, {"gamma", "beta", "alpha"});
        f.kind = weights::PowerType{num(params, pw, "gamma"), num(params, pw, "beta"), num(params, pw, "alpha")};
    } else if (kind == "exponential") {
        allow(params, pw, {"rate"});
        f.kind = weights::Exponential{num(params, pw, "rate", 1.0)};
    } else if (kind == "barenblatt_linearized") {
        allow(params, pw, {"m", "p", "variant", "eps"});
        weights::BarenblattLinearized b;
        b.m = num(params, pw, "m");
        b.p = num(params, pw, "p");
        const std::string v = text(params, pw, "variant", std::string("w1"));
        if (v == "w1") b.variant = weights::LinearizedVariant::W1;
        else if (v == "w2") b.variant = weights::LinearizedVariant::W2;
        else if (v == "w2eps") b.variant = weights::LinearizedVariant::W2Eps;
        else throw Error(ErrorCode::ConfigError, pw + ".variant: expected w1|w2|w2eps");
        b.eps = num(params, pw, "eps", 0.5);
        f.kind = b;
    } else if (kind == "tabulated") {
        allow(params, pw, {"nodes"});
        f.kind = weights::Tabulated{node_list(need(params, pw, "nodes"), pw + ".nodes")};
    } else {
        throw Error(ErrorCode::ConfigError, where + ".kind: unknown radial family '" + kind + "'");
    }
    f.dimension = integer(j, where, "dimension");
    f.scale = num(j, where, "scale", 1.0);
    weights::validate(f);
    return f;
}

inline json family_json(const weights::RadialWeightFamily& f) {
    json out{{"dimension", f.dimension}, {"scale", f.scale}};
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, weights::PowerType>) {
                out["kind"] = "power";
                out["params"] = {{"gamma", k.gamma}, {"beta", k.beta}, {"alpha", k.alpha}};
            } else if constexpr (std::is_same_v<T, weights::Exponential>) {
                out["kind"] = "exponential";
                out["params"] = {{"rate", k.rate}};
            } else if constexpr (std::is_same_v<T, weights::BarenblattLinearized>) {
                const char* v = k.variant == weights::LinearizedVariant::W1   ? "w1"
                                : k.variant == weights::LinearizedVariant::W2 ? "w2"
                                                                              : "w2eps";
                out["kind"] = "barenblatt_linearized";
                out["params"] = {{"m", k.m}, {"p", k.p}, {"variant", v}, {"eps", k.eps}};
            } else {
                out["kind"] = "tabulated";
                out["params"] = {{"nodes", k.nodes}};
            }
        },
        f.kind);
    return out;
}

// {g: {kind, params}, theta, dimension}; q comes from the top level
inline hardy::ThetaLaplaceProfile parse_profile(const json& j, const std::string& where, double q) {
    allow(j, where, {"g", "theta", "dimension"});
    hardy::ThetaLaplaceProfile p;
    const json& g = need(j, where, "g");
    const std::string gw = where + ".g";
    allow(g, gw, {"kind", "params"});
    const std::string kind = text(g, gw, "kind");
    const json params = g.contains("params") ? g.at("params") : json::object();
    if (kind == "power") {
        allow(params, gw + ".params", {"gamma", "beta", "alpha"});
        p.g = hardy::PowerTypeG{num(params, gw, "gamma"), num(params, gw, "beta"), num(params, gw, "alpha")};
    } else if (kind == "tabulated") {
        allow(params, gw + ".params", {"nodes"});
        p.g = hardy::TabulatedG{node_list(need(params, gw, "nodes"), gw + ".params.nodes")};
    } else {
        throw Error(ErrorCode::ConfigError, gw + ".kind: unknown profile '" + kind + "'");
    }
    p.theta = num(j, where, "theta", 2.0);
    p.dimension = integer(j, where, "dimension");
    p.q = q;
    return p;
}

inline json profile_json(const hardy::ThetaLaplaceProfile& p) {
    json g;
    if (const auto* pg = std::get_if<hardy::PowerTypeG>(&p.g))
        g = {{"kind", "power"}, {"params", {{"gamma", pg->gamma}, {"beta", pg->beta}, {"alpha", pg->alpha}}}};
    else
        g = {{"kind", "tabulated"}, {"params", {{"nodes", std::get<hardy::TabulatedG>(p.g).nodes}}}};
    return {{"g", g}, {"theta", p.theta}, {"dimension", p.dimension}};
}

// ---------------------------------------------------------------- numerics

struct Numerics {
    criteria::ScanOptions scan;
    int n_nodes = 512;
    double span = 40.0;
    rayleigh::SearchOptions search;
    bool estimate = false;  // certify-p / certify-hp: also run the Rayleigh search
    rayleigh::CounterexampleOptions counterexample;
    hardy::DeriveOptions derive;
    fastdiff::RunOptions run;
};

inline Numerics parse_numerics(const json& j, const std::string& command) {
    const std::string w = "numerics";
    allow(j, w, {"scan_points", "rel_tol", "horizon_factor", "n_nodes", "span", "restarts", "seed", "max_iterations",
                 "estimate", "budget", "threshold", "constant_grid", "family_conditions", "cells", "tau_end", "dtau",
                 "sample_every", "eps_reg", "tail_fraction", "check_regularization"});
    Numerics n;
    // radial problems live on [1/span, span]; lines on [m - span, m + span]
    const bool radial = command == "derive-h" || command == "certify-hp";
    n.span = radial ? 1e8 : 40.0;
    n.scan.scan_points = integer(j, w, "scan_points", n.scan.scan_points);
    n.scan.rel_tol = num(j, w, "rel_tol", n.scan.rel_tol);
    n.scan.horizon_factor = num(j, w, "horizon_factor", n.scan.horizon_factor);
    n.n_nodes = integer(j, w, "n_nodes", n.n_nodes);
    n.span = num(j, w, "span", n.span);
    n.search.restarts = integer(j, w, "restarts", n.search.restarts);
    const double seed = num(j, w, "seed", 1.0);
    if (seed < 0 || seed != std::floor(seed)) throw Error(ErrorCode::ConfigError, "numerics.seed: expected integer >= 0");
    n.search.seed = static_cast<unsigned>(seed);
    n.search.max_iterations = integer(j, w, "max_iterations", n.search.max_iterations);
    n.estimate = boolean(j, w, "estimate", false);
    n.counterexample.budget = integer(j, w, "budget", n.counterexample.budget);
    n.counterexample.threshold = num(j, w, "threshold", n.counterexample.threshold);
    n.derive.constant_grid = integer(j, w, "constant_grid", n.derive.constant_grid);
    n.derive.family_conditions = boolean(j, w, "family_conditions", n.derive.family_conditions);
    n.run.cells = integer(j, w, "cells", n.run.cells);
    n.run.tau_end = num(j, w, "tau_end", n.run.tau_end);
    n.run.dtau = num(j, w, "dtau", n.run.dtau);
    n.run.sample_every = integer(j, w, "sample_every", n.run.sample_every);
    n.run.eps_reg = num(j, w, "eps_reg", n.run.eps_reg);
    n.run.tail_fraction = num(j, w, "tail_fraction", n.run.tail_fraction);
    n.run.check_regularization = boolean(j, w, "check_regularization", false);
    if (n.scan.scan_points < 8) throw Error(ErrorCode::ConfigError, "numerics.scan_points must be >= 8");
    if (n.n_nodes < 16) throw Error(ErrorCode::ConfigError, "numerics.n_nodes must be >= 16");
    if (!(n.span > 0.0)) throw Error(ErrorCode::ConfigError, "numerics.span must be positive");
    if (n.search.restarts < 1) throw Error(ErrorCode::ConfigError, "numerics.restarts must be >= 1");
    if (n.run.cells < 20) throw Error(ErrorCode::ConfigError, "numerics.cells must be >= 20");
    if (!(n.run.dtau > 0.0) || !(n.run.tau_end > 0.0))
        throw Error(ErrorCode::ConfigError, "numerics.dtau and numerics.tau_end must be positive");
    return n;
}

inline json numerics_json(const Numerics& n) {
    return {{"scan_points", n.scan.scan_points},
            {"rel_tol", n.scan.rel_tol},
            {"horizon_factor", n.scan.horizon_factor},
            {"n_nodes", n.n_nodes},
            {"span", n.span},
            {"restarts", n.search.restarts},
            {"seed", n.search.seed},
            {"max_iterations", n.search.max_iterations},
            {"estimate", n.estimate},
            {"budget", n.counterexample.budget},
            {"threshold", n.counterexample.threshold},
            {"constant_grid", n.derive.constant_grid},
            {"family_conditions", n.derive.family_conditions},
            {"cells", n.run.cells},
            {"tau_end", n.run.tau_end},
            {"dtau", n.run.dtau},
            {"sample_every", n.run.sample_every},
            {"eps_reg", n.run.eps_reg},
            {"tail_fraction", n.run.tail_fraction},
            {"check_regularization", n.run.check_regularization}};
}

// ---------------------------------------------------------------- run config

struct Dynamics {
    fastdiff::DnleParams params;
    fastdiff::InitialDatum initial;
};

struct RunConfig {
    std::string command;
    double q = 2.0;
    std::optional<criteria::LinePair> pair;
    std::optional<weights::RadialWeightFamily> family;
    std::optional<hardy::ThetaLaplaceProfile> profile;
    std::optional<Dynamics> dynamics;
    std::vector<json> runs;  // sweep members, parsed lazily inside the workers
    Numerics numerics;
    std::string output = "out";
    json resolved;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"certify-p", "certify-hp", "derive-h", "estimate", "sweep", "simulate"};
    return c;
}

inline Dynamics parse_dynamics(const json& j) {
    const std::string w = "dynamics";
    allow(j, w, {"m", "p", "N", "initial"});
    Dynamics d;
    d.params.p = num(j, w, "p", 1.8);
    d.params.n = integer(j, w, "N", 3);
    d.params.m = num(j, w, "m", fastdiff::mid_range_m(d.params.p, d.params.n));
    if (j.contains("initial")) {
        const json& i = j.at("initial");
        allow(i, w + ".initial", {"d0", "d1", "blend", "scale"});
        d.initial.d0 = num(i, w + ".initial", "d0", d.initial.d0);
        d.initial.d1 = num(i, w + ".initial", "d1", d.initial.d1);
        d.initial.blend = num(i, w + ".initial", "blend", d.initial.blend);
        d.initial.scale = num(i, w + ".initial", "scale", d.initial.scale);
    }
    if (!(d.initial.d0 > 0.0 && d.initial.d1 > 0.0 && d.initial.scale > 0.0) ||
        !(d.initial.blend >= 0.0 && d.initial.blend <= 1.0))
        throw Error(ErrorCode::ConfigError, "dynamics.initial: need d0, d1, scale > 0 and blend in [0,1]");
    return d;
}

inline json dynamics_json(const Dynamics& d) {
    return {{"m", d.params.m},
            {"p", d.params.p},
            {"N", d.params.n},
            {"initial", {{"d0", d.initial.d0}, {"d1", d.initial.d1}, {"blend", d.initial.blend}, {"scale", d.initial.scale}}}};
}

inline RunConfig parse_config(const json& j, bool nested = false) {
    allow(j, "config", {"command", "q", "pair", "family", "profile", "dynamics", "runs", "numerics", "output"});
    RunConfig c;
    c.command = text(j, "config", "command");
    if (std::find(commands().begin(), commands().end(), c.command) == commands().end())
        throw Error(ErrorCode::ConfigError, "config.command: unknown command '" + c.command + "'");
    if (nested && c.command == "sweep") throw Error(ErrorCode::ConfigError, "sweep runs cannot nest sweeps");
    if (nested && j.contains("output")) throw Error(ErrorCode::ConfigError, "sweep runs choose their own output");
    c.q = num(j, "config", "q", 2.0);
    if (!(c.q > 1.0)) throw Error(ErrorCode::ConfigError, "config.q must exceed 1");
    c.output = text(j, "config", "output", std::string("out"));
    c.numerics = parse_numerics(j.contains("numerics") ? j.at("numerics") : json::object(), c.command);

    const auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (j.contains(k)) throw Error(ErrorCode::ConfigError, "config." + std::string(k) + " not used by " + c.command);
    };
    json r{{"schema", kSchema}, {"command", c.command}, {"q", c.q}, {"output", c.output}};
    if (c.command == "certify-p") {
        forbid({"family", "profile", "dynamics", "runs"});
    } else if (c.command == "certify-hp") {
        forbid({"pair", "profile", "dynamics", "runs"});
    } else if (c.command == "derive-h") {
        forbid({"pair", "family", "dynamics", "runs"});
    } else if (c.command == "estimate") {
        forbid({"family", "dynamics", "runs"});
        if (j.contains("pair") == j.contains("profile"))
            throw Error(ErrorCode::ConfigError, "estimate needs exactly one of config.pair, config.profile");
    } else if (c.command == "simulate") {
        forbid({"pair", "family", "profile", "runs"});
    } else {
        forbid({"pair", "family", "profile", "dynamics"});
    }
    const bool wants_pair = c.command == "certify-p" || (c.command == "estimate" && j.contains("pair"));
    const bool wants_profile = c.command == "derive-h" || (c.command == "estimate" && j.contains("profile"));
    if (wants_pair) {
        const json& p = need(j, "config", "pair");
        allow(p, "pair", {"w1", "w2"});
        c.pair = criteria::LinePair{parse_line_weight(need(p, "pair", "w1"), "pair.w1"),
                                    parse_line_weight(need(p, "pair", "w2"), "pair.w2"), c.q};
        r["pair"] = {{"w1", line_weight_json(c.pair->w1)}, {"w2", line_weight_json(c.pair->w2)}};
    }
    if (c.command == "certify-hp") {
        c.family = parse_family(need(j, "config", "family"), "family");
        r["family"] = family_json(*c.family);
    }
    if (wants_profile) {
        c.profile = parse_profile(need(j, "config", "profile"), "profile", c.q);
        r["profile"] = profile_json(*c.profile);
    }
    if (c.command == "simulate") {
        c.dynamics = parse_dynamics(j.contains("dynamics") ? j.at("dynamics") : json::object());
        r["dynamics"] = dynamics_json(*c.dynamics);
    }
    if (c.command == "sweep") {
        const json& runs = need(j, "config", "runs");
        if (!runs.is_array() || runs.empty()) throw Error(ErrorCode::ConfigError, "config.runs: expected a non-empty array");
        json rr = json::array();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            try {
                rr.push_back(parse_config(runs[i], true).resolved);
            } catch (const Error& e) {
                throw Error(ErrorCode::ConfigError, "runs[" + std::to_string(i) + "]: " + e.what());
            }
            c.runs.push_back(runs[i]);
        }
        r["runs"] = rr;
    }
    r["numerics"] = numerics_json(c.numerics);
    if (nested) r.erase("output");
    c.resolved = r;
    return c;
}

// ---------------------------------------------------------------- writers

inline std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    f << content;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::string str() const {
        std::ostringstream s;
        for (std::size_t i = 0; i < header.size(); ++i) s << (i ? "," : "") << header[i];
        s << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << fmt(r[i]);
            s << "\n";
        }
        return s.str();
    }
};

struct Series {
    std::string name;
    std::vector<double> x, y;
};

struct Plot {
    std::string title, x_label, y_label;
    bool log_x = false, log_y = true;
    std::vector<Series> series;
};

// Static SVG 1.1 line plot. Points that cannot be drawn on a log axis are dropped.
inline std::string svg(const Plot& plt) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    const auto tx = [&](double v) { return plt.log_x ? std::log10(v) : v; };
    const auto ty = [&](double v) { return plt.log_y ? std::log10(v) : v; };
    const auto ok = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!plt.log_x || x > 0) && (!plt.log_y || y > 0);
    };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : plt.series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (ok(s.x[i], s.y[i])) {
                x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
            }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    if (plt.log_y) y0 = std::floor(y0), y1 = std::ceil(y1);
    if (plt.log_x) x0 = std::floor(x0), x1 = std::ceil(x1);
    const auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    const auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << plt.title << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    const auto ticks = [&](double a, double b, bool log) {
        std::vector<double> t;
        if (log) {
            const int step = std::max(1, static_cast<int>(std::ceil((b - a) / 8)));
            for (double v = a; v <= b + 1e-9; v += step) t.push_back(v);
        } else {
            for (int i = 0; i <= 5; ++i) t.push_back(a + (b - a) * i / 5.0);
        }
        return t;
    };
    const auto label = [](double v, bool log) { return log ? "1e" + fmt(v) : fmt(v); };
    for (double v : ticks(x0, x1, plt.log_x))
        s << "<text x=\"" << px(v) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << label(v, plt.log_x) << "</text>\n";
    for (double v : ticks(y0, y1, plt.log_y))
        s << "<text x=\"" << L - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << label(v, plt.log_y) << "</text>\n";
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << plt.x_label << "</text>\n"
      << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << plt.y_label << "</text>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (std::size_t k = 0; k < plt.series.size(); ++k) {
        const auto& sr = plt.series[k];
        s << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < sr.x.size(); ++i)
            if (ok(sr.x[i], sr.y[i])) s << fmt(px(tx(sr.x[i]))) << "," << fmt(py(ty(sr.y[i]))) << " ";
        s << "\"/>\n<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
          << colors[k % 5] << "\">" << sr.name << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json scan_json(const criteria::SupremumScanResult& r) {
    return {{"verdict", weights::to_string(r.verdict)},
            {"value", finite_or_null(r.value)},
            {"argmax", finite_or_null(r.argmax)},
            {"argmax_at_infinity", r.argmax_at_infinity},
            {"cause", r.cause},
            {"notes", r.notes}};
}

inline json report_json(const criteria::CertificationReport& r) {
    json j{{"kind", r.kind == criteria::ReportKind::PoincareLine ? "poincare_line" : "hardy_poincare"},
           {"q", r.q},
           {"median", r.median},
           {"mass", finite_or_null(r.mass)},
           {"holds", r.holds},
           {"max_b", finite_or_null(r.max_b)},
           {"lower_bound", finite_or_null(r.lower_bound)},
           {"upper_bound", finite_or_null(r.upper_bound)},
           {"constructive_bound", r.constructive_bound ? finite_or_null(*r.constructive_bound) : json(nullptr)},
           {"constructive_bound_symbolic", r.constructive_bound_symbolic},
           {"notes", r.notes}};
    if (r.kind == criteria::ReportKind::PoincareLine) {
        j["b_plus"] = scan_json(r.b_plus);
        j["b_minus"] = scan_json(r.b_minus);
    } else {
        j["h2"] = scan_json(r.h2);
    }
    return j;
}

inline json estimate_json(const rayleigh::RayleighEstimate& e) {
    return {{"value", finite_or_null(e.value)},
            {"discrete_value", finite_or_null(e.discrete_value)},
            {"iterations", e.iterations},
            {"converged", e.converged},
            {"method", rayleigh::to_string(e.method)},
            {"rescaling_scales", e.rescaling_scales},
            {"rescaling_trend", e.rescaling_trend},
            {"notes", e.notes}};
}

inline Csv function_csv(const TestFunction& f, const char* x = "x") {
    Csv c{{x, "value"}, {}};
    for (std::size_t i = 0; i < f.grid.size(); ++i) c.rows.push_back({f.grid[i], f.values[i]});
    return c;
}

// Flattens scalar leaves into "a.b.c  value" rows for report.txt.
inline void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        const bool scalars = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
        if (scalars && j.size() <= 8) {
            std::string s;
            for (const auto& e : j) s += (s.empty() ? "" : ", ") + (e.is_string() ? e.get<std::string>() : e.dump());
            out.emplace_back(prefix, "[" + s + "]");
        } else if (scalars) {
            out.emplace_back(prefix, "[" + std::to_string(j.size()) + " entries]");
        } else {
            for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
        }
    } else {
        out.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
    }
}

inline std::string table(const json& report) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(report.at("result"), "", rows);
    std::size_t w = 5;
    for (const auto& r : rows) w = std::max(w, r.first.size());
    std::ostringstream s;
    s << report.at("command").get<std::string>() << "  (exit " << report.at("exit_code").get<int>() << ")\n";
    s << std::string(w + 2 + 24, '-') << "\n";
    for (const auto& [k, v] : rows) s << k << std::string(w + 2 - k.size(), ' ') << v << "\n";
    return s.str();
}

// ---------------------------------------------------------------- commands

struct Outcome {
    int exit_code = Ok;
    json result;
    std::map<std::string, Csv> csv;
    std::map<std::string, Plot> plots;
};

inline Plot line_weights_plot(const criteria::LinePair& pair, double center, double span) {
    Plot p{"weights", "s", "w", false, true, {{"w1", {}, {}}, {"w2", {}, {}}}};
    for (int i = 0; i <= 400; ++i) {
        const double s = center - span + 2.0 * span * i / 400.0;
        p.series[0].x.push_back(s), p.series[0].y.push_back(pair.w1(s));
        p.series[1].x.push_back(s), p.series[1].y.push_back(pair.w2(s));
    }
    return p;
}

inline Outcome certify_p(const RunConfig& c) {
    Outcome o;
    const auto rep = criteria::certify_poincare_line(*c.pair, c.numerics.scan);
    o.result["certification"] = report_json(rep);
    o.plots["weights"] = line_weights_plot(*c.pair, rep.median, std::min(c.numerics.span, 40.0));
    if (!rep.holds) {
        o.exit_code = DoesNotHold;
        auto opt = c.numerics.counterexample;
        opt.nodes = std::max(opt.nodes, 16);
        const auto ce = rayleigh::counterexample_search(*c.pair, opt);
        o.result["counterexample"] = {{"found", ce.witness.has_value()},
                                      {"quotient", finite_or_null(ce.quotient)},
                                      {"side", ce.side},
                                      {"trail", ce.trail},
                                      {"notes", ce.notes}};
        Csv trail{{"round", "quotient"}, {}};
        Plot tp{"counterexample trail", "round", "quotient", false, true, {{"best quotient", {}, {}}}};
        for (std::size_t k = 0; k < ce.trail.size(); ++k) {
            trail.rows.push_back({double(k), ce.trail[k]});
            tp.series[0].x.push_back(double(k)), tp.series[0].y.push_back(ce.trail[k]);
        }
        o.csv["counterexample_trail"] = trail;
        o.plots["counterexample_trail"] = tp;
        if (ce.witness) o.csv["counterexample"] = function_csv(*ce.witness, "s");
        return o;
    }
    if (c.numerics.estimate) {
        const auto e = rayleigh::estimate_poincare_constant(*c.pair, c.numerics.n_nodes, c.numerics.span, c.numerics.search);
        o.result["estimate"] = estimate_json(e);
        o.result["estimate"]["inside_bounds"] = e.value >= rep.lower_bound && e.value <= rep.upper_bound;
        o.csv["maximizer"] = function_csv(e.maximizer, "s");
    }
    return o;
}

inline Outcome certify_hp(const RunConfig& c) {
    Outcome o;
    const auto rep = criteria::certify_hardy_poincare(*c.family, c.q, c.numerics.scan);
    o.result["certification"] = report_json(rep);
    if (!rep.holds) o.exit_code = DoesNotHold;
    Plot p{"radial weight", "r", "h(r)", true, true, {{"h", {}, {}}}};
    Csv w{{"r", "h"}, {}};
    for (int i = 0; i <= 400; ++i) {
        const double r = std::pow(10.0, -4.0 + 8.0 * i / 400.0) * c.family->scale;
        const double h = weights::h(*c.family, r);
        p.series[0].x.push_back(r), p.series[0].y.push_back(h);
        w.rows.push_back({r, h});
    }
    o.csv["weight"] = w;
    o.plots["weight"] = p;
    return o;
}

inline json derivation_json(const hardy::HardyDerivation& d) {
    const auto opt = [](const std::optional<double>& v) { return v ? finite_or_null(*v) : json(nullptr); };
    return {{"c_h", d.c_h},
            {"sign", hardy::to_string(d.sign)},
            {"c1", opt(d.c1)},
            {"c2", opt(d.c2)},
            {"c_h_family", opt(d.c_h_family)},
            {"eta_shift", opt(d.eta_shift)},
            {"optimal", d.optimal},
            {"optimal_condition", d.optimal_condition},
            {"notes", d.notes}};
}

inline Outcome derive_h(const RunConfig& c) {
    Outcome o;
    const auto d = hardy::derive_hardy(*c.profile, c.numerics.derive);
    o.result["derivation"] = derivation_json(d);
    Csv w{{"r", "w1", "w2"}, {}};
    Plot p{"Hardy weights", "r", "weight", true, true, {{"w1", {}, {}}, {"w2", {}, {}}}};
    for (int i = 0; i <= 400; ++i) {
        const double r = std::pow(10.0, -4.0 + 8.0 * i / 400.0);
        const double a = d.w1(r), b = d.w2(r);
        w.rows.push_back({r, a, b});
        p.series[0].x.push_back(r), p.series[0].y.push_back(a);
        p.series[1].x.push_back(r), p.series[1].y.push_back(b);
    }
    o.csv["weights"] = w;
    o.plots["weights"] = p;
    if (c.numerics.estimate) {
        const auto e = rayleigh::estimate_hardy_constant(rayleigh::derivation_pair(d), c.q, c.numerics.n_nodes,
                                                         c.numerics.span, c.numerics.search);
        o.result["estimate"] = estimate_json(e);
        o.csv["maximizer"] = function_csv(e.maximizer, "r");
    }
    return o;
}

inline Outcome estimate(const RunConfig& c) {
    Outcome o;
    rayleigh::RayleighEstimate e;
    Plot p{"maximizer", "", "f", false, false, {{"f", {}, {}}}};
    if (c.pair) {
        e = rayleigh::estimate_poincare_constant(*c.pair, c.numerics.n_nodes, c.numerics.span, c.numerics.search);
        const auto rep = criteria::certify_poincare_line(*c.pair, c.numerics.scan);
        o.result["bounds"] = {{"holds", rep.holds},
                              {"lower_bound", finite_or_null(rep.lower_bound)},
                              {"upper_bound", finite_or_null(rep.upper_bound)}};
        p.x_label = "s";
    } else {
        const auto d = hardy::derive_hardy(*c.profile, c.numerics.derive);
        const double span = c.numerics.span > 1.0 ? c.numerics.span : 1e8;
        e = rayleigh::estimate_hardy_constant(rayleigh::derivation_pair(d), c.q, c.numerics.n_nodes, span,
                                              c.numerics.search);
        o.result["derivation"] = derivation_json(d);
        p.x_label = "r";
        p.log_x = true;
    }
    o.result["estimate"] = estimate_json(e);
    o.csv["maximizer"] = function_csv(e.maximizer, c.pair ? "s" : "r");
    p.series[0].x = e.maximizer.grid;
    p.series[0].y = e.maximizer.values;
    o.plots["maximizer"] = p;
    return o;
}

inline Outcome simulate(const RunConfig& c) {
    Outcome o;
    const auto& d = *c.dynamics;
    const auto tr = fastdiff::run_and_fit(d.initial, d.params, c.numerics.run);
    o.result["dynamics"] = {{"d_star", tr.d_star},
                            {"d_star_continuous", tr.d_star_continuous},
                            {"r_max", tr.r_max},
                            {"fitted_mu", finite_or_null(tr.fitted_mu)},
                            {"fit_window", {tr.fit_lo, tr.fit_hi}},
                            {"fit_r2", tr.fit_r2},
                            {"fit_reliable", tr.fit_reliable},
                            {"c_ck", tr.c_ck},
                            {"already_stationary", tr.already_stationary},
                            {"entropy_monotone", tr.entropy_monotone},
                            {"max_entropy_increase", tr.max_entropy_increase},
                            {"sandwich_kept", tr.sandwich_kept},
                            {"mass_drift_total", tr.mass_drift_total},
                            {"mass_drift_interior", tr.mass_drift_interior},
                            {"stationary_residual", tr.stationary_residual},
                            {"mu_half_eps", finite_or_null(tr.mu_half_eps)},
                            {"samples", tr.samples.size()},
                            {"notes", tr.notes}};
    Csv t{{"tau", "entropy", "fisher", "l1", "mass"}, {}};
    Plot p{"relative entropy", "tau", "E", false, true, {{"E", {}, {}}, {"I", {}, {}}}};
    for (const auto& s : tr.samples) {
        t.rows.push_back({s.tau, s.entropy, s.fisher, s.l1, s.mass});
        p.series[0].x.push_back(s.tau), p.series[0].y.push_back(s.entropy);
        p.series[1].x.push_back(s.tau), p.series[1].y.push_back(s.fisher);
    }
    o.csv["trace"] = t;
    o.plots["entropy"] = p;
    return o;
}

inline json error_json(const std::string& code, const std::string& message) {
    return {{"schema", kSchema}, {"error", {{"code", code}, {"message", message}}}};
}

inline int run_config(const RunConfig& c, const fs::path& out);

inline unsigned pool_size(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HARDY_CERT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

inline Outcome sweep(const RunConfig& c, const fs::path& out) {
    Outcome o;
    const std::size_t n = c.runs.size();
    std::vector<int> codes(n, ToolFailure);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu", i);
            const fs::path dir = out / name;
            try {
                auto sub = parse_config(c.runs[i], true);
                sub.output = dir.string();
                codes[i] = run_config(sub, dir);
            } catch (const std::exception& e) {
                fs::create_directories(dir);
                write_file(dir / "error.json", error_json("ConfigError", e.what()).dump(2) + "\n");
                codes[i] = BadConfig;
            }
        }
    };
    const unsigned threads = pool_size(n);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    Csv summary{{"run", "exit_code"}, {}};
    json runs = json::array();
    int worst = Ok;
    for (std::size_t i = 0; i < n; ++i) {
        summary.rows.push_back({double(i), double(codes[i])});
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu", i);
        runs.push_back({{"run", name}, {"command", c.runs[i].value("command", "")}, {"exit_code", codes[i]}});
        // tool failures dominate verdicts
        if (codes[i] == ToolFailure || codes[i] == BadConfig) worst = ToolFailure;
        else if (codes[i] == DoesNotHold && worst == Ok) worst = DoesNotHold;
    }
    o.result["runs"] = runs;
    o.csv["summary"] = summary;
    o.exit_code = worst;
    return o;
}

inline void write_run_info(const fs::path& out) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    write_file(out / "run_info.json", json{{"schema", kSchema}, {"finished_utc", buf}}.dump(2) + "\n");
}

// Executes a parsed config, writing every artifact under `out`.
inline int run_config(const RunConfig& c, const fs::path& out) {
    fs::create_directories(out);
    Outcome o;
    try {
        if (c.command == "certify-p") o = certify_p(c);
        else if (c.command == "certify-hp") o = certify_hp(c);
        else if (c.command == "derive-h") o = derive_h(c);
        else if (c.command == "estimate") o = estimate(c);
        else if (c.command == "simulate") o = simulate(c);
        else o = sweep(c, out);
    } catch (const Error& e) {
        auto err = error_json(to_string(e.code()), e.what());
        err["config"] = c.resolved;
        write_file(out / "error.json", err.dump(2) + "\n");
        write_run_info(out);
        return ToolFailure;
    } catch (const std::exception& e) {
        auto err = error_json("Internal", e.what());
        err["config"] = c.resolved;
        write_file(out / "error.json", err.dump(2) + "\n");
        write_run_info(out);
        return ToolFailure;
    }
    json report{{"schema", kSchema},
                {"command", c.command},
                {"exit_code", o.exit_code},
                {"config", c.resolved},
                {"result", o.result}};
    write_file(out / "report.json", report.dump(2) + "\n");
    write_file(out / "report.txt", table(report));
    for (const auto& [name, csv] : o.csv) write_file(out / (name + ".csv"), csv.str());
    for (const auto& [name, plot] : o.plots) write_file(out / (name + ".svg"), svg(plot));
    write_run_info(out);
    return o.exit_code;
}

// Parses `config_text` and runs it. `out_override` replaces config.output.
inline int run(const std::string& config_text, const std::optional<std::string>& out_override = {},
               std::ostream& err = std::cerr) {
    const fs::path fallback = out_override ? *out_override : "out";
    const auto fail = [&](const std::string& code, const std::string& msg, const fs::path& dir) {
        err << "hardycert: " << code << ": " << msg << "\n";
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) write_file(dir / "error.json", error_json(code, msg).dump(2) + "\n");
        return BadConfig;
    };
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::parse_error& e) {
        return fail("ConfigError", std::string("malformed JSON: ") + e.what(), fallback);
    }
    RunConfig c;
    try {
        c = parse_config(j);
    } catch (const Error& e) {
        return fail(e.code() == ErrorCode::ConfigError ? "ConfigError" : to_string(e.code()), e.what(), fallback);
    } catch (const json::exception& e) {
        return fail("ConfigError", e.what(), fallback);
    }
    if (out_override) {
        c.output = *out_override;
        c.resolved["output"] = c.output;
    }
    const int code = run_config(c, c.output);
    if (code == ToolFailure) err << "hardycert: run failed, see " << (fs::path(c.output) / "error.json").string() << "\n";
    return code;
}

}  // namespace hardycert::cli
