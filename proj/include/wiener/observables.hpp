#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wiener/dynamics.hpp"
#include "wiener/errors.hpp"

namespace wiener {

/// exp(a sin(2 pi k1 x1) + b cos(2 pi k2 x2)) on the 2-torus.
struct TorusExpTrig {
    double a = 1.0;
    int k1 = 2;
    double b = 1.0;
    int k2 = 3;
};

/// Indicator of the half-open box lo <= x < hi.
struct BoxIndicator {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct Coordinate {
    std::size_t index = 0;
};

/// exp(-|x - center|^2 / width^2).
struct GaussianBump {
    std::vector<double> center;
    double width = 1.0;
};

/// exp(sin(2 pi k x)) on the unit interval.
struct IntervalExpSin {
    int k = 3;
};

/// Arbitrary function on the atoms of a finite system.
struct AtomVector {
    std::vector<double> values;
};

using ObservableSpec = std::variant<TorusExpTrig, BoxIndicator, Coordinate, GaussianBump, IntervalExpSin, AtomVector>;

/// Scalar series y_0..y_m with where it came from.
struct TrajectoryBuffer {
    struct Provenance {
        std::string system = "external";
        std::string observable = "external";
        std::uint64_t seed = 0;
        std::size_t length = 0;
    };

    std::vector<double> values;
    Provenance provenance;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }

    static TrajectoryBuffer from_values(std::vector<double> v) {
        TrajectoryBuffer b;
        b.provenance.length = v.size();
        b.values = std::move(v);
        return b;
    }
};

// Observables used in the numerical experiments.
inline TorusExpTrig torus_f1() { return {1.0, 2, 1.0, 3}; }
inline BoxIndicator torus_f2() { return {{0.0, 0.5}, {0.5, 1.0}}; }
inline TorusExpTrig twist_observable(double b = 1.0) { return {2.0, 2, b, 3}; }
inline IntervalExpSin odometer_observable() { return {3}; }
inline Coordinate lorenz_f1() { return {0}; }

/// Bump centered at the equilibrium x+ = (delta, delta, rho - 1), width delta / 3,
/// delta = sqrt(beta (rho - 1)).
inline GaussianBump lorenz_bump(const Lorenz63& s = {}) {
    const double delta = std::sqrt(s.beta * (s.rho - 1.0));
    return {{delta, delta, s.rho - 1.0}, delta / 3.0};
}

inline std::string observable_name(const ObservableSpec& obs) {
    char buf[200];
    return std::visit(
        [&](const auto& o) -> std::string {
            using O = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<O, TorusExpTrig>) {
                std::snprintf(buf, sizeof buf, "exptrig(%.17g,%d,%.17g,%d)", o.a, o.k1, o.b, o.k2);
                return buf;
            } else if constexpr (std::is_same_v<O, BoxIndicator>) {
                std::string s = "box(";
                for (std::size_t i = 0; i < o.lo.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%s[%.17g,%.17g)", i ? "x" : "", o.lo[i], o.hi[i]);
                    s += buf;
                }
                return s + ")";
            } else if constexpr (std::is_same_v<O, Coordinate>) {
                return "coord(" + std::to_string(o.index) + ")";
            } else if constexpr (std::is_same_v<O, GaussianBump>) {
                std::snprintf(buf, sizeof buf, "bump(w=%.17g)", o.width);
                return buf;
            } else if constexpr (std::is_same_v<O, IntervalExpSin>) {
                return "expsin(" + std::to_string(o.k) + ")";
            } else {
                return "atoms(" + std::to_string(o.values.size()) + ")";
            }
        },
        obs);
}

/// f(x) for a single state.
inline double evaluate(const ObservableSpec& obs, const State& x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return std::visit(
        [&](const auto& o) -> double {
            using O = std::decay_t<decltype(o)>;
            const auto& c = x.coords;
            if constexpr (std::is_same_v<O, TorusExpTrig>) {
                if (c.size() != 2) throw InvalidArgument("evaluate: torus observable needs 2 coordinates");
                return std::exp(o.a * std::sin(two_pi * o.k1 * c[0]) + o.b * std::cos(two_pi * o.k2 * c[1]));
            } else if constexpr (std::is_same_v<O, BoxIndicator>) {
                if (o.lo.size() != c.size() || o.hi.size() != c.size())
                    throw InvalidArgument("evaluate: box dimension mismatch");
                for (std::size_t i = 0; i < c.size(); ++i)
                    if (!(o.lo[i] <= c[i] && c[i] < o.hi[i])) return 0.0;
                return 1.0;
            } else if constexpr (std::is_same_v<O, Coordinate>) {
                if (o.index >= c.size()) throw InvalidArgument("evaluate: coordinate index out of range");
                return c[o.index];
            } else if constexpr (std::is_same_v<O, GaussianBump>) {
                if (o.center.size() != c.size()) throw InvalidArgument("evaluate: bump dimension mismatch");
                double r2 = 0.0;
                for (std::size_t i = 0; i < c.size(); ++i) r2 += (c[i] - o.center[i]) * (c[i] - o.center[i]);
                return std::exp(-r2 / (o.width * o.width));
            } else if constexpr (std::is_same_v<O, IntervalExpSin>) {
                if (c.size() != 1) throw InvalidArgument("evaluate: interval observable needs 1 coordinate");
                return std::exp(std::sin(two_pi * o.k * c[0]));
            } else {
                if (!c.empty() || x.atom >= o.values.size())
                    throw InvalidArgument("evaluate: atom vector does not match the state");
                return o.values[x.atom];
            }
        },
        obs);
}

inline void validate(const ObservableSpec& obs) {
    if (const auto* b = std::get_if<BoxIndicator>(&obs)) {
        if (b->lo.size() != b->hi.size()) throw InvalidArgument("BoxIndicator: lo and hi differ in length");
        for (std::size_t i = 0; i < b->lo.size(); ++i)
            if (!(b->lo[i] < b->hi[i])) throw InvalidArgument("BoxIndicator: requires lo < hi");
    } else if (const auto* g = std::get_if<GaussianBump>(&obs)) {
        if (!(g->width > 0.0)) throw InvalidArgument("GaussianBump: width must be positive");
    }
}

/// Elementwise evaluation along a trajectory.
inline TrajectoryBuffer observe(const ObservableSpec& obs, std::span<const State> traj, const SystemSpec& sys,
                                std::uint64_t seed = 0) {
    if (traj.empty()) throw InvalidArgument("observe: empty trajectory");
    validate(obs);
    TrajectoryBuffer out;
    out.values.reserve(traj.size());
    for (const auto& x : traj) out.values.push_back(evaluate(obs, x));
    out.provenance = {system_name(sys), observable_name(obs), seed, traj.size()};
    return out;
}

/// Observes T^0 x0 .. T^(length-1) x0 without storing the states.
inline TrajectoryBuffer observe_orbit(const ObservableSpec& obs, const SystemSpec& sys, State x0, std::size_t length,
                                      std::uint64_t seed = 0) {
    if (length == 0) throw InvalidArgument("observe_orbit: length must be positive");
    validate(obs);
    TrajectoryBuffer out;
    out.values.reserve(length);
    out.values.push_back(evaluate(obs, x0));
    for (std::size_t i = 1; i < length; ++i) {
        x0 = step(sys, x0);
        out.values.push_back(evaluate(obs, x0));
    }
    out.provenance = {system_name(sys), observable_name(obs), seed, length};
    return out;
}

}  // namespace wiener
