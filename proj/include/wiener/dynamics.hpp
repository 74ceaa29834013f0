#pragma once

// Generators for the measure-preserving systems used in the experiments:
// torus rotation, affine twist, dyadic odometer, Lorenz '63 flow map and
// finite permutations.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "wiener/errors.hpp"
#include "wiener/random.hpp"

namespace wiener {

struct TorusRotation {
    std::vector<double> alpha;
};

/// (x1, x2) -> (x1 + alpha, x1 + x2) mod 1.
struct AffineTwist {
    double alpha = 0.0;
};

/// von Neumann-Kakutani adding machine on [0, 1).
struct Odometer {};

struct Lorenz63 {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double flow_time = 0.05;
    double rk4_step = 5e-4;
};

/// Permutation of {0, ..., N-1}; atom i is sent to perm[i].
struct FinitePermutation {
    std::vector<std::size_t> perm;
};

using SystemSpec = std::variant<TorusRotation, AffineTwist, Odometer, Lorenz63, FinitePermutation>;

/// A point of the state space: real coordinates, or an atom index for
/// finite permutations.
struct State {
    std::vector<double> coords;
    std::size_t atom = 0;

    static State point(std::vector<double> x) { return State{std::move(x), 0}; }
    static State at_atom(std::size_t a) { return State{{}, a}; }

    friend bool operator==(const State&, const State&) = default;
};

inline TorusRotation standard_torus_rotation() { return {{std::sqrt(2.0), std::sqrt(3.0)}}; }
inline AffineTwist standard_affine_twist() { return {std::sqrt(2.0)}; }

/// Cyclic shift i -> i + r mod n.
inline FinitePermutation cyclic_shift(std::size_t n, std::size_t r = 1) {
    FinitePermutation p;
    p.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.perm[i] = (i + r) % n;
    return p;
}

// ---------------------------------------------------------------------------

namespace detail {

inline double wrap_unit(double x) noexcept {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

inline void require_dim(const State& x, std::size_t dim, const char* what) {
    if (x.coords.size() != dim) throw InvalidArgument(std::string(what) + ": state dimension mismatch");
    for (double v : x.coords)
        if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite state");
}

inline bool is_bijection(const std::vector<std::size_t>& perm) {
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t p : perm) {
        if (p >= perm.size() || seen[p]) return false;
        seen[p] = true;
    }
    return true;
}

// Tower level n of x in [1 - 2^-n, 1 - 2^-(n+1)); exact in binary arithmetic.
inline int odometer_level(double x) {
    int n = 0;
    while (n < 1074 && x >= 1.0 - std::ldexp(1.0, -(n + 1))) ++n;
    return n;
}

inline std::array<double, 3> lorenz_rhs(const Lorenz63& s, const std::array<double, 3>& x) noexcept {
    return {s.sigma * (x[1] - x[0]), x[0] * (s.rho - x[2]) - x[1], x[0] * x[1] - s.beta * x[2]};
}

inline std::array<double, 3> rk4_step(const Lorenz63& s, const std::array<double, 3>& x, double h) noexcept {
    auto axpy = [](const std::array<double, 3>& a, double t, const std::array<double, 3>& b) {
        return std::array<double, 3>{a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]};
    };
    const auto k1 = lorenz_rhs(s, x);
    const auto k2 = lorenz_rhs(s, axpy(x, 0.5 * h, k1));
    const auto k3 = lorenz_rhs(s, axpy(x, 0.5 * h, k2));
    const auto k4 = lorenz_rhs(s, axpy(x, h, k3));
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

inline std::size_t lorenz_substeps(double flow_time, double rk4_step) {
    if (!(rk4_step > 0.0) || !(flow_time > 0.0)) throw InvalidArgument("Lorenz63: step and flow time must be positive");
    const double ratio = std::round(flow_time / rk4_step);
    if (std::abs(ratio * rk4_step - flow_time) > 1e-12)
        throw InvalidArgument("Lorenz63: flow_time must be an integer multiple of rk4_step");
    return static_cast<std::size_t>(ratio);
}

}  // namespace detail

/// Time-t flow of Lorenz '63 by classical RK4 with a fixed step.
inline std::array<double, 3> lorenz_flow(const Lorenz63& s, std::array<double, 3> x, double flow_time, double step) {
    const std::size_t n = detail::lorenz_substeps(flow_time, step);
    for (std::size_t i = 0; i < n; ++i) x = detail::rk4_step(s, x, step);
    return x;
}

inline std::size_t state_dimension(const SystemSpec& sys) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, TorusRotation>) return s.alpha.size();
            else if constexpr (std::is_same_v<S, AffineTwist>) return 2;
            else if constexpr (std::is_same_v<S, Odometer>) return 1;
            else if constexpr (std::is_same_v<S, Lorenz63>) return 3;
            else return 0;
        },
        sys);
}

/// Short identifier used in provenance records.
inline std::string system_name(const SystemSpec& sys) {
    char buf[160];
    return std::visit(
        [&](const auto& s) -> std::string {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, TorusRotation>) {
                std::string out = "torus(";
                for (std::size_t i = 0; i < s.alpha.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", s.alpha[i]);
                    out += buf;
                }
                return out + ")";
            } else if constexpr (std::is_same_v<S, AffineTwist>) {
                std::snprintf(buf, sizeof buf, "twist(%.17g)", s.alpha);
                return buf;
            } else if constexpr (std::is_same_v<S, Odometer>) {
                return "odometer";
            } else if constexpr (std::is_same_v<S, Lorenz63>) {
                std::snprintf(buf, sizeof buf, "lorenz63(%.17g,%.17g,%.17g,t=%.17g,h=%.17g)", s.sigma, s.rho, s.beta,
                              s.flow_time, s.rk4_step);
                return buf;
            } else {
                return "perm(" + std::to_string(s.perm.size()) + ")";
            }
        },
        sys);
}

/// One application of the map T.
inline State step(const SystemSpec& sys, const State& x) {
    return std::visit(
        [&](const auto& s) -> State {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, TorusRotation>) {
                detail::require_dim(x, s.alpha.size(), "step");
                State out = x;
                for (std::size_t i = 0; i < s.alpha.size(); ++i)
                    out.coords[i] = detail::wrap_unit(x.coords[i] + s.alpha[i]);
                return out;
            } else if constexpr (std::is_same_v<S, AffineTwist>) {
                detail::require_dim(x, 2, "step");
                return State::point({detail::wrap_unit(x.coords[0] + s.alpha),
                                     detail::wrap_unit(x.coords[0] + x.coords[1])});
            } else if constexpr (std::is_same_v<S, Odometer>) {
                detail::require_dim(x, 1, "step");
                const double v = x.coords[0];
                if (v < 0.0 || v >= 1.0) throw InvalidArgument("step: odometer state must lie in [0, 1)");
                // T(1 - 2^-n + y) = 2^-(n+1) + y, i.e. T(x) = x - 1 + 3 * 2^-(n+1).
                const int n = detail::odometer_level(v);
                const double y = v - (1.0 - std::ldexp(1.0, -n));
                return State::point({y + std::ldexp(1.0, -(n + 1))});
            } else if constexpr (std::is_same_v<S, Lorenz63>) {
                detail::require_dim(x, 3, "step");
                const auto y = lorenz_flow(s, {x.coords[0], x.coords[1], x.coords[2]}, s.flow_time, s.rk4_step);
                return State::point({y[0], y[1], y[2]});
            } else {
                if (x.atom >= s.perm.size()) throw InvalidArgument("step: atom index out of range");
                return State::at_atom(s.perm[x.atom]);
            }
        },
        sys);
}

/// Closed-form inverse for the invertible discrete maps (not Lorenz).
inline State inverse_step(const SystemSpec& sys, const State& x) {
    return std::visit(
        [&](const auto& s) -> State {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, TorusRotation>) {
                detail::require_dim(x, s.alpha.size(), "inverse_step");
                State out = x;
                for (std::size_t i = 0; i < s.alpha.size(); ++i)
                    out.coords[i] = detail::wrap_unit(x.coords[i] - s.alpha[i]);
                return out;
            } else if constexpr (std::is_same_v<S, AffineTwist>) {
                detail::require_dim(x, 2, "inverse_step");
                const double x1 = detail::wrap_unit(x.coords[0] - s.alpha);
                return State::point({x1, detail::wrap_unit(x.coords[1] - x1)});
            } else if constexpr (std::is_same_v<S, Odometer>) {
                detail::require_dim(x, 1, "inverse_step");
                const double z = x.coords[0];
                if (!(z > 0.0) || z >= 1.0)
                    throw InvalidArgument("inverse_step: odometer state must lie in (0, 1); 0 has no preimage");
                // z in [2^-(n+1), 2^-n) is the image of tower level n.
                int n = 0;
                while (z < std::ldexp(1.0, -(n + 1))) ++n;
                const double y = z - std::ldexp(1.0, -(n + 1));
                return State::point({(1.0 - std::ldexp(1.0, -n)) + y});
            } else if constexpr (std::is_same_v<S, Lorenz63>) {
                throw InvalidArgument("inverse_step: no inverse provided for Lorenz63");
            } else {
                if (x.atom >= s.perm.size()) throw InvalidArgument("inverse_step: atom index out of range");
                for (std::size_t i = 0; i < s.perm.size(); ++i)
                    if (s.perm[i] == x.atom) return State::at_atom(i);
                throw InvalidArgument("inverse_step: permutation is not a bijection");
            }
        },
        sys);
}

/// (x0, T x0, ..., T^(length-1) x0).
inline std::vector<State> trajectory(const SystemSpec& sys, const State& x0, std::size_t length) {
    if (length == 0) throw InvalidArgument("trajectory: length must be positive");
    if (const auto* p = std::get_if<FinitePermutation>(&sys); p && !detail::is_bijection(p->perm))
        throw InvalidArgument("trajectory: permutation is not a bijection");
    std::vector<State> out;
    out.reserve(length);
    out.push_back(x0);
    for (std::size_t i = 1; i < length; ++i) out.push_back(step(sys, out.back()));
    return out;
}

/// Sampling protocol for Lorenz initial conditions: a long trajectory of the
/// flow map with flow time `substeps * step`, started near `center`,
/// with `warmup` points discarded and every `stride`-th point kept.
struct LorenzSampling {
    double step = 5.3e-4;
    std::size_t substeps = 40;
    std::size_t warmup = 1000;
    std::size_t stride = 1;
    std::array<double, 3> center{4.0, 7.0, 16.0};
    double perturbation = 0.1;
};

/// N initial points distributed (approximately) by the invariant measure.
inline std::vector<State> sample_initials(const SystemSpec& sys, std::size_t n, std::uint64_t seed,
                                          const LorenzSampling& lorenz = {}) {
    if (n == 0) throw InvalidArgument("sample_initials: N must be positive");
    Rng rng(seed);
    std::vector<State> out;
    out.reserve(n);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Lorenz63>) {
                std::array<double, 3> x = lorenz.center;
                for (auto& v : x) v += rng.uniform(-lorenz.perturbation, lorenz.perturbation);
                auto advance = [&] {
                    for (std::size_t k = 0; k < lorenz.substeps; ++k) x = detail::rk4_step(s, x, lorenz.step);
                };
                for (std::size_t k = 0; k < lorenz.warmup; ++k) advance();
                for (std::size_t i = 0; i < n; ++i) {
                    out.push_back(State::point({x[0], x[1], x[2]}));
                    for (std::size_t k = 0; k < lorenz.stride; ++k) advance();
                }
            } else if constexpr (std::is_same_v<S, FinitePermutation>) {
                if (s.perm.empty()) throw InvalidArgument("sample_initials: empty permutation");
                for (std::size_t i = 0; i < n; ++i) out.push_back(State::at_atom(rng.below(s.perm.size())));
            } else {
                const std::size_t dim = state_dimension(sys);
                for (std::size_t i = 0; i < n; ++i) {
                    std::vector<double> x(dim);
                    for (auto& v : x) v = rng.uniform01();
                    out.push_back(State::point(std::move(x)));
                }
            }
        },
        sys);
    return out;
}

}  // namespace wiener
