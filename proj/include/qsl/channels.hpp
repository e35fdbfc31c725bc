// Copyright 2026 The qsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/numerics.hpp"
#include "qsl/purification.hpp"
#include "qsl/qstate.hpp"
#include "qsl/trajectory.hpp"

namespace qsl::channels {

// Qubit conventions: index 0 is |g> (or |0>), index 1 is |e> (or |1>);
// Z = diag(1, -1). Joint system-environment index is s * dE + e.

// ---- channel kinds ----

/// H(t) = s(t) H0 on any small dimension. H0 commutes with itself at all
/// times, so U(t) = exp(-i H0 S(t)/hbar) with S the integral of s.
struct UnitaryChannel {
    HermitianOperator H0;
    std::function<double(double)> envelope;           // s(t); 1 when empty
    std::function<double(double)> envelope_integral;  // S(t); t when empty
};

/// Survival probability P(t) of |e>; exponential with rate gamma unless a
/// custom P is given (its derivative dP must come with it).
struct AmplitudeDamping {
    double gamma = 0.0;
    std::function<double(double)> P;
    std::function<double(double)> dP;
    bool monotone = true;  // declared, not inferred
};

/// Resonant atom-field exchange with coupling g, field initially in vacuum.
struct JaynesCummings {
    double g = 0.0;
};

/// Single-qubit precession at omega0 with phase damping rate gamma.
struct Dephasing {
    double omega0 = 0.0;
    double gamma = 0.0;
};

/// N independent dephasing qubits, dense representation (small N only).
struct NQubitDephasingDense {
    int n = 1;
    double omega0 = 0.0;
    double gamma = 0.0;
};

using ChannelKind =
    std::variant<UnitaryChannel, AmplitudeDamping, JaynesCummings, Dephasing, NQubitDephasingDense>;

struct ChannelSpec {
    ChannelKind kind;
    DensityOperator initial_state;
};

inline constexpr int kMaxDenseQubits = 6;
inline constexpr int kMaxPurifiedQubits = 4;

// ---- helpers ----

namespace detail {

inline std::optional<ComplexVector> pure_vector(const DensityOperator& rho) {
    const auto ed = eig_hermitian(HermitianOperator(rho.matrix()));
    const Eigen::Index top = ed.values.size() - 1;
    if (ed.values(top) < 1.0 - 1e-10) {
        return std::nullopt;
    }
    return ComplexVector(ed.vectors.col(top));
}

// Amplitude-damping style map with surviving amplitude c (P = c^2).
inline ComplexMatrix damping_map(const ComplexMatrix& r, double c) {
    ComplexMatrix out(2, 2);
    out(0, 0) = r(0, 0) + (1.0 - c * c) * r(1, 1);
    out(1, 1) = c * c * r(1, 1);
    out(0, 1) = c * r(0, 1);
    out(1, 0) = c * r(1, 0);
    return out;
}

inline ComplexMatrix damping_map_derivative(const ComplexMatrix& r, double c, double dc) {
    ComplexMatrix out(2, 2);
    out(1, 1) = 2.0 * c * dc * r(1, 1);
    out(0, 0) = -out(1, 1);
    out(0, 1) = dc * r(0, 1);
    out(1, 0) = dc * r(1, 0);
    return out;
}

// sigma_+ sigma_-^E + sigma_- sigma_+^E: swaps |g,e> and |e,g>.
inline ComplexMatrix exchange_generator() {
    ComplexMatrix k = ComplexMatrix::Zero(4, 4);
    k(1, 2) = k(2, 1) = 1.0;
    return k;
}

inline ComplexMatrix exchange_unitary(double phi) {
    ComplexMatrix u = ComplexMatrix::Identity(4, 4);
    u(1, 1) = u(2, 2) = std::cos(phi);
    u(1, 2) = u(2, 1) = -I * std::sin(phi);
    return u;
}

// Number of excitations away from all-|0>, as a Z eigenvalue sum.
inline double z_sum(std::uint64_t bits, int n) {
    return static_cast<double>(n - 2 * std::popcount(bits));
}

inline void check_qubit(const DensityOperator& rho, const char* who) {
    if (rho.dim() != 2) {
        throw validation_error(std::string(who) + ": qubit state required");
    }
}

inline double pure_fidelity(const ComplexVector& psi, const DensityOperator& rho) {
    return std::clamp(psi.dot(rho.matrix() * psi).real(), 0.0, 1.0);
}

} // namespace detail

// ---- amplitude damping and Jaynes-Cummings ----

/// Populations (rho_gg + (1-P) rho_ee, P rho_ee), coherences times sqrt(P).
inline DensityOperator amp_damp_state(const DensityOperator& rho0, double P) {
    detail::check_qubit(rho0, "amp_damp_state");
    if (!(P >= 0.0 && P <= 1.0)) {
        throw validation_error("amp_damp_state: P must lie in [0, 1]");
    }
    return DensityOperator(detail::damping_map(rho0.matrix(), std::sqrt(P)));
}

/// cos^2(g t) for 0 <= g t <= pi/2, the window up to the first zero.
inline double jaynes_cummings_fidelity(double g, double t) {
    if (!(g >= 0.0) || !(t >= 0.0)) {
        throw validation_error("jaynes_cummings_fidelity: need g >= 0 and t >= 0");
    }
    const double x = g * t;
    if (x > pi / 2 + 1e-12) {
        throw domain_error("jaynes_cummings_fidelity: g t beyond pi/2");
    }
    const double c = std::cos(std::min(x, pi / 2));
    return c * c;
}

struct AmpDampBound {
    double distance = 0.0;  // bound on the Bures angle D(0, tau)
    bool integrated = false;  // non-monotone P: integrated |d phi/dt| instead
};

/// D(0, tau) <= sqrt(<sigma+ sigma->) arccos sqrt(P(tau)) for monotone P;
/// otherwise the integral of sqrt(<sigma+ sigma->) |d arccos sqrt(P)/dt|.
inline AmpDampBound amp_damp_bound(const AmplitudeDamping& ch, const DensityOperator& rho0,
                                   double tau) {
    detail::check_qubit(rho0, "amp_damp_bound");
    if (!(tau >= 0.0)) {
        throw validation_error("amp_damp_bound: tau must be >= 0");
    }
    const double pop_e = std::max(0.0, rho0.matrix()(1, 1).real());
    AmpDampBound out;
    if (tau == 0.0 || pop_e == 0.0) {
        return out;
    }
    if (!ch.P) {
        if (!(ch.gamma >= 0.0)) {
            throw validation_error("amp_damp_bound: gamma must be >= 0");
        }
        out.distance = std::sqrt(pop_e) * std::acos(std::exp(-ch.gamma * tau / 2.0));
        return out;
    }
    if (ch.monotone) {
        out.distance = std::sqrt(pop_e) * std::acos(std::sqrt(std::clamp(ch.P(tau), 0.0, 1.0)));
        return out;
    }
    if (!ch.dP) {
        throw validation_error("amp_damp_bound: non-monotone P needs dP");
    }
    auto speed = [&](double t) {
        const double p = std::clamp(ch.P(t), 0.0, 1.0);
        const double den = std::sqrt(p * (1.0 - p));
        return den > 0.0 ? std::abs(ch.dP(t)) / (2.0 * den) : 0.0;
    };
    numerics::QuadratureSpec q;
    q.singular_left_endpoint = true;
    out.distance = std::sqrt(pop_e) * numerics::integrate(speed, 0.0, tau, q);
    out.integrated = true;
    return out;
}

/// tau >= (2/gamma) ln sec(D / sqrt(<sigma+ sigma->)); infinite when the
/// target is out of reach.
inline double amp_damp_time_bound(double gamma, double pop_e, double D) {
    if (!(gamma > 0.0) || !(pop_e >= 0.0 && pop_e <= 1.0) || !(D >= 0.0)) {
        throw validation_error("amp_damp_time_bound: invalid arguments");
    }
    if (D == 0.0) {
        return 0.0;
    }
    const double x = pop_e > 0.0 ? D / std::sqrt(pop_e) : std::numeric_limits<double>::infinity();
    if (!(x < pi / 2)) {
        return std::numeric_limits<double>::infinity();
    }
    return -2.0 / gamma * std::log(std::cos(x));
}

// ---- single-qubit dephasing ----

/// z fixed; transverse Bloch components rotated by omega0 t and damped by
/// exp(-gamma t).
inline DensityOperator dephasing_state(const DensityOperator& rho0, double t, double omega0,
                                       double gamma) {
    detail::check_qubit(rho0, "dephasing_state");
    if (!(t >= 0.0)) {
        throw validation_error("dephasing_state: t must be >= 0");
    }
    ComplexMatrix r = rho0.matrix();
    const cplx f = std::exp(cplx(-gamma * t, -omega0 * t));
    r(0, 1) *= f;
    r(1, 0) *= std::conj(f);
    return DensityOperator(r);
}

/// Right-hand side of the dephasing master equation,
/// -i[omega0 Z/2, rho] + (gamma/2)(Z rho Z - rho).
inline ComplexMatrix dephasing_generator(const ComplexMatrix& rho, double omega0, double gamma) {
    const ComplexMatrix z = pauli_z();
    const ComplexMatrix h = 0.5 * omega0 * z;
    return -I * (h * rho - rho * h) + 0.5 * gamma * (z * rho * z - rho);
}

/// F_B(0, tau) = (1 + <Z>^2 + dZ^2 exp(-gamma tau) cos(omega0 tau))/2 for a
/// pure initial state.
inline double dephasing_exact_fidelity(double var_z, double mean_z, double tau, double omega0,
                                       double gamma) {
    if (!(var_z >= 0.0) || std::abs(var_z + mean_z * mean_z - 1.0) > 1e-9) {
        throw validation_error("dephasing_exact_fidelity: pure state needs dZ^2 = 1 - <Z>^2");
    }
    return 0.5 * (1.0 + mean_z * mean_z + var_z * std::exp(-gamma * tau) * std::cos(omega0 * tau));
}

/// (dZ/2) sqrt(r^2+1) [E(pi/2, m) - E(asin e^{-gamma tau}, m)], m = r^2/(r^2+1).
inline double dephasing_bound(double delta_z, double tau, double omega0, double gamma) {
    if (!(delta_z >= 0.0) || !(tau >= 0.0) || !(gamma >= 0.0)) {
        throw validation_error("dephasing_bound: need dZ >= 0, tau >= 0, gamma >= 0");
    }
    if (gamma == 0.0) {
        return delta_z * std::abs(omega0) * tau / 2.0;
    }
    const double r = omega0 / gamma;
    const double m = r * r / (r * r + 1.0);
    const double y = std::asin(std::exp(-gamma * tau));
    return 0.5 * delta_z * std::sqrt(r * r + 1.0) *
           (numerics::ellint_e(pi / 2, m) - numerics::ellint_e(y, m));
}

/// The tau -> infinity limit, (dZ/2) sqrt(r^2+1) E(pi/2, r^2/(r^2+1)).
inline double dephasing_bound_infinity(double delta_z, double r) {
    const double m = r * r / (r * r + 1.0);
    return 0.5 * delta_z * std::sqrt(r * r + 1.0) * numerics::ellint_e(pi / 2, m);
}

/// Pure dephasing (omega0 = 0): tau >= (1/gamma) ln sec(2D/dZ).
inline double dephasing_time_bound_pure(double delta_z, double D, double gamma) {
    if (!(gamma > 0.0) || !(D >= 0.0) || !(delta_z >= 0.0)) {
        throw validation_error("dephasing_time_bound_pure: invalid arguments");
    }
    if (D == 0.0) {
        return 0.0;
    }
    const double x = delta_z > 0.0 ? 2.0 * D / delta_z : std::numeric_limits<double>::infinity();
    if (!(x < pi / 2)) {
        return std::numeric_limits<double>::infinity();
    }
    return -std::log(std::cos(x)) / gamma;
}

/// Smallest r for which the dZ = 1 bound at infinite time reaches pi/2.
inline double dephasing_r_crit() {
    return numerics::find_root([](double r) { return dephasing_bound_infinity(1.0, r) - pi / 2; },
                               0.5, 10.0, 1e-13);
}

// ---- trajectories ----

namespace detail {

struct ExchangeProfile {
    std::function<double(double)> c;     // surviving amplitude
    std::function<double(double)> dc;
    std::function<double(double)> phi;  // exchange angle
    std::function<double(double)> dphi;
    bool singular_at_zero = false;
};

inline ChannelTrajectory exchange_trajectory(const ExchangeProfile& prof,
                                             const DensityOperator& rho0, std::string label) {
    check_qubit(rho0, label.c_str());
    ChannelTrajectory tr;
    tr.label = std::move(label);
    const ComplexMatrix r0 = rho0.matrix();
    tr.rho = [r0, prof](double t) { return DensityOperator(damping_map(r0, prof.c(t))); };
    tr.drho = [r0, prof](double t) { return damping_map_derivative(r0, prof.c(t), prof.dc(t)); };
    tr.singular_at_zero = prof.singular_at_zero;
    if (auto psi = pure_vector(rho0)) {
        purification::PurifiedEvolution evo;
        evo.dS = 2;
        evo.dE = 2;
        evo.initial_joint = PureStateVector(kron(*psi, basis_ket(2, 0)));
        evo.U = [prof](double t) { return exchange_unitary(prof.phi(t)); };
        evo.dU_dt = [prof](double t) {
            return ComplexMatrix(-I * prof.dphi(t) * exchange_generator() *
                                 exchange_unitary(prof.phi(t)));
        };
        tr.purified = evo;
        const ComplexVector v = *psi;
        tr.exact_fidelity = [v, rho = tr.rho](double t) { return pure_fidelity(v, rho(t)); };
    }
    return tr;
}

inline void require_open(double t, const char* who) {
    if (!(t > 0.0)) {
        throw domain_error(std::string(who) + ": purification generator diverges at t = 0");
    }
}

} // namespace detail

inline ChannelTrajectory amplitude_damping_trajectory(const AmplitudeDamping& ch,
                                                      const DensityOperator& rho0) {
    detail::ExchangeProfile prof;
    if (ch.P) {
        if (!ch.dP) {
            throw validation_error("amplitude damping: a custom P(t) needs dP(t)");
        }
        if (std::abs(ch.P(0.0) - 1.0) > 1e-12) {
            throw validation_error("amplitude damping: P(0) must be 1");
        }
        auto P = ch.P;
        auto dP = ch.dP;
        prof.c = [P](double t) { return std::sqrt(std::clamp(P(t), 0.0, 1.0)); };
        prof.dc = [P, dP](double t) {
            const double c = std::sqrt(std::clamp(P(t), 0.0, 1.0));
            return c > 0.0 ? dP(t) / (2.0 * c) : 0.0;
        };
        prof.phi = [P](double t) { return std::acos(std::sqrt(std::clamp(P(t), 0.0, 1.0))); };
        prof.dphi = [P, dP](double t) {
            const double p = std::clamp(P(t), 0.0, 1.0);
            const double den = std::sqrt(p * (1.0 - p));
            if (den == 0.0) {
                if (dP(t) == 0.0) {
                    return 0.0;
                }
                throw domain_error("amplitude damping: d arccos sqrt(P)/dt diverges");
            }
            return -dP(t) / (2.0 * den);
        };
    } else {
        if (!(ch.gamma >= 0.0)) {
            throw validation_error("amplitude damping: gamma must be >= 0");
        }
        const double g = ch.gamma;
        prof.c = [g](double t) { return std::exp(-g * t / 2.0); };
        prof.dc = [g](double t) { return -0.5 * g * std::exp(-g * t / 2.0); };
        prof.phi = [g](double t) { return std::acos(std::exp(-g * t / 2.0)); };
        prof.dphi = [g](double t) {
            if (g == 0.0) {
                return 0.0;
            }
            detail::require_open(t, "amplitude damping");
            // d/dt arccos e^{-g t/2} = (g/2) / sqrt(e^{g t} - 1)
            return 0.5 * g / std::sqrt(std::expm1(g * t));
        };
    }
    prof.singular_at_zero = true;
    return detail::exchange_trajectory(prof, rho0, "amplitude-damping");
}

inline ChannelTrajectory jaynes_cummings_trajectory(const JaynesCummings& ch,
                                                    const DensityOperator& rho0) {
    if (!(ch.g >= 0.0)) {
        throw validation_error("jaynes_cummings: g must be >= 0");
    }
    const double g = ch.g;
    detail::ExchangeProfile prof;
    prof.c = [g](double t) { return std::cos(g * t); };
    prof.dc = [g](double t) { return -g * std::sin(g * t); };
    prof.phi = [g](double t) { return g * t; };
    prof.dphi = [g](double) { return g; };
    return detail::exchange_trajectory(prof, rho0, "jaynes-cummings");
}

inline ChannelTrajectory dephasing_trajectory(const Dephasing& ch, const DensityOperator& rho0) {
    detail::check_qubit(rho0, "dephasing");
    if (!(ch.gamma >= 0.0)) {
        throw validation_error("dephasing: gamma must be >= 0");
    }
    const double w0 = ch.omega0;
    const double g = ch.gamma;
    ChannelTrajectory tr;
    tr.label = "dephasing";
    tr.rho = [rho0, w0, g](double t) { return dephasing_state(rho0, t, w0, g); };
    tr.drho = [rho0, w0, g](double t) {
        return dephasing_generator(dephasing_state(rho0, t, w0, g).matrix(), w0, g);
    };
    tr.singular_at_zero = g > 0.0;
    if (auto psi = detail::pure_vector(rho0)) {
        const ComplexMatrix zi = kron(pauli_z(), ComplexMatrix::Identity(2, 2));
        const ComplexMatrix zy = kron(pauli_z(), pauli_y());
        // Environment overlap cos(2 phi) = e^{-g t}, i.e. phi = arccos sqrt(P)
        // with P = (1 + e^{-g t})/2.
        auto phi = [g](double t) { return 0.5 * std::acos(std::exp(-g * t)); };
        auto unitary = [=](double t) {
            ComplexMatrix rot = ComplexMatrix::Zero(4, 4);
            for (int s = 0; s < 2; ++s) {
                const double z = s == 0 ? 1.0 : -1.0;
                for (int e = 0; e < 2; ++e) {
                    rot(2 * s + e, 2 * s + e) = std::exp(-I * (w0 * t * z / 2.0));
                }
            }
            const double p = phi(t);
            return ComplexMatrix(rot * (std::cos(p) * ComplexMatrix::Identity(4, 4) -
                                        I * std::sin(p) * zy));
        };
        purification::PurifiedEvolution evo;
        evo.dS = 2;
        evo.dE = 2;
        evo.initial_joint = PureStateVector(kron(*psi, basis_ket(2, 0)));
        evo.U = unitary;
        evo.dU_dt = [=](double t) {
            double dphi = 0.0;
            if (g > 0.0) {
                detail::require_open(t, "dephasing");
                dphi = 0.5 * g / std::sqrt(std::expm1(2.0 * g * t));
            }
            return ComplexMatrix(-I * (0.5 * w0 * zi + dphi * zy) * unitary(t));
        };
        evo.t_scale = g > 0.0 ? 1.0 / g : 1.0;
        tr.purified = evo;
        const ComplexVector v = *psi;
        tr.exact_fidelity = [v, rho = tr.rho](double t) { return detail::pure_fidelity(v, rho(t)); };
    }
    return tr;
}

/// rho_ab(t) = rho_ab(0) exp(-i omega0 t (z_a - z_b)/2 - gamma t |a xor b|).
inline DensityOperator nqubit_dephasing_state(const DensityOperator& rho0, int n, double t,
                                              double omega0, double gamma) {
    if (n < 1 || n > kMaxDenseQubits) {
        throw validation_error("nqubit_dephasing_state: dense states limited to 1..6 qubits");
    }
    const Eigen::Index d = Eigen::Index{1} << n;
    if (rho0.dim() != d) {
        throw validation_error("nqubit_dephasing_state: state dimension is not 2^N");
    }
    ComplexMatrix r = rho0.matrix();
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            const auto ua = static_cast<std::uint64_t>(a);
            const auto ub = static_cast<std::uint64_t>(b);
            const double dz = detail::z_sum(ua, n) - detail::z_sum(ub, n);
            const double hd = std::popcount(ua ^ ub);
            r(a, b) *= std::exp(cplx(-gamma * t * hd, -omega0 * t * dz / 2.0));
        }
    }
    return DensityOperator(r);
}

inline ChannelTrajectory nqubit_dephasing_dense_trajectory(const NQubitDephasingDense& ch,
                                                           const DensityOperator& rho0) {
    if (!(ch.gamma >= 0.0)) {
        throw validation_error("nqubit dephasing: gamma must be >= 0");
    }
    const int n = ch.n;
    const double w0 = ch.omega0;
    const double g = ch.gamma;
    ChannelTrajectory tr;
    tr.label = "nqubit-dephasing";
    tr.rho = [=](double t) { return nqubit_dephasing_state(rho0, n, t, w0, g); };
    tr.drho = [=](double t) {
        ComplexMatrix r = nqubit_dephasing_state(rho0, n, t, w0, g).matrix();
        const Eigen::Index d = r.rows();
        for (Eigen::Index a = 0; a < d; ++a) {
            for (Eigen::Index b = 0; b < d; ++b) {
                const auto ua = static_cast<std::uint64_t>(a);
                const auto ub = static_cast<std::uint64_t>(b);
                const double dz = detail::z_sum(ua, n) - detail::z_sum(ub, n);
                r(a, b) *= cplx(-g * std::popcount(ua ^ ub), -w0 * dz / 2.0);
            }
        }
        return r;
    };
    tr.singular_at_zero = g > 0.0;
    auto psi = detail::pure_vector(rho0);
    if (psi && n <= kMaxPurifiedQubits) {
        const int m = 2 * n;
        const Eigen::Index dj = Eigen::Index{1} << m;
        ComplexMatrix zsum = ComplexMatrix::Zero(dj, dj);
        std::vector<ComplexMatrix> zy;
        for (int j = 0; j < n; ++j) {
            const ComplexMatrix zj = on_qubit(pauli_z(), j, m);
            zsum += zj;
            zy.push_back(zj * on_qubit(pauli_y(), n + j, m));
        }
        ComplexMatrix zysum = ComplexMatrix::Zero(dj, dj);
        for (const auto& x : zy) {
            zysum += x;
        }
        auto unitary = [=](double t) {
            const double p = 0.5 * std::acos(std::exp(-g * t));
            ComplexMatrix u = ComplexMatrix::Identity(dj, dj);
            for (const auto& x : zy) {
                u = u * (std::cos(p) * ComplexMatrix::Identity(dj, dj) - I * std::sin(p) * x);
            }
            ComplexVector phase(dj);
            for (Eigen::Index k = 0; k < dj; ++k) {
                phase(k) = std::exp(-I * (w0 * t / 2.0) * zsum(k, k).real());
            }
            return ComplexMatrix(phase.asDiagonal() * u);
        };
        purification::PurifiedEvolution evo;
        evo.dS = 1 << n;
        evo.dE = 1 << n;
        evo.initial_joint = PureStateVector(kron(*psi, basis_ket(Eigen::Index{1} << n, 0)));
        evo.U = unitary;
        evo.dU_dt = [=](double t) {
            double dphi = 0.0;
            if (g > 0.0) {
                detail::require_open(t, "nqubit dephasing");
                dphi = 0.5 * g / std::sqrt(std::expm1(2.0 * g * t));
            }
            return ComplexMatrix(-I * (0.5 * w0 * zsum + dphi * zysum) * unitary(t));
        };
        evo.t_scale = g > 0.0 ? 1.0 / g : 1.0;
        tr.purified = evo;
    }
    if (psi) {
        const ComplexVector v = *psi;
        tr.exact_fidelity = [v, rho = tr.rho](double t) { return detail::pure_fidelity(v, rho(t)); };
    }
    return tr;
}

inline ChannelTrajectory unitary_trajectory(const UnitaryChannel& ch, const DensityOperator& rho0) {
    if (ch.H0.dim() != rho0.dim()) {
        throw validation_error("unitary channel: H0 and state dimensions differ");
    }
    if (static_cast<bool>(ch.envelope) != static_cast<bool>(ch.envelope_integral)) {
        throw validation_error("unitary channel: envelope and its integral come together");
    }
    const auto ed = eig_hermitian(ch.H0);
    const ComplexMatrix h0 = ch.H0.matrix();
    const Eigen::Index d = rho0.dim();
    auto s = ch.envelope ? ch.envelope : std::function<double(double)>([](double) { return 1.0; });
    auto S = ch.envelope_integral ? ch.envelope_integral
                                  : std::function<double(double)>([](double t) { return t; });
    auto v_of = [ed, S](double t) {
        ComplexVector ph(ed.values.size());
        for (Eigen::Index k = 0; k < ph.size(); ++k) {
            ph(k) = std::exp(-I * (ed.values(k) * S(t) / hbar));
        }
        return ComplexMatrix(ed.vectors * ph.asDiagonal() * ed.vectors.adjoint());
    };
    ChannelTrajectory tr;
    tr.label = "unitary";
    const ComplexMatrix r0 = rho0.matrix();
    tr.rho = [=](double t) {
        const ComplexMatrix v = v_of(t);
        return DensityOperator(v * r0 * v.adjoint());
    };
    tr.drho = [=](double t) {
        const ComplexMatrix v = v_of(t);
        const ComplexMatrix r = v * r0 * v.adjoint();
        return ComplexMatrix(-I * (s(t) / hbar) * (h0 * r - r * h0));
    };
    purification::PurifiedEvolution evo;
    evo.dS = static_cast<int>(d);
    evo.dE = static_cast<int>(d);
    evo.initial_joint = purify(rho0);
    const ComplexMatrix id_e = ComplexMatrix::Identity(d, d);
    const ComplexMatrix h_joint = kron(h0, id_e);
    evo.U = [=](double t) { return kron(v_of(t), id_e); };
    evo.dU_dt = [=](double t) {
        return ComplexMatrix(-I * (s(t) / hbar) * h_joint * kron(v_of(t), id_e));
    };
    tr.purified = evo;
    if (auto psi = detail::pure_vector(rho0)) {
        const ComplexVector v = *psi;
        tr.exact_fidelity = [v, v_of](double t) {
            return std::clamp(std::norm(v.dot(v_of(t) * v)), 0.0, 1.0);
        };
    }
    return tr;
}

/// Dispatch on the channel kind.
inline ChannelTrajectory make_trajectory(const ChannelSpec& spec, std::vector<double> t_grid = {}) {
    ChannelTrajectory tr = std::visit(
        [&](const auto& k) -> ChannelTrajectory {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, UnitaryChannel>) {
                return unitary_trajectory(k, spec.initial_state);
            } else if constexpr (std::is_same_v<K, AmplitudeDamping>) {
                return amplitude_damping_trajectory(k, spec.initial_state);
            } else if constexpr (std::is_same_v<K, JaynesCummings>) {
                return jaynes_cummings_trajectory(k, spec.initial_state);
            } else if constexpr (std::is_same_v<K, Dephasing>) {
                return dephasing_trajectory(k, spec.initial_state);
            } else {
                return nqubit_dephasing_dense_trajectory(k, spec.initial_state);
            }
        },
        spec.kind);
    tr.t_grid = std::move(t_grid);
    return tr;
}

// ---- N-qubit dephasing, symmetric-sector formulas ----

/// Initial-state descriptor: moments of the collective Z/N.
struct NQubitDephasing {
    int n = 1;
    double omega0 = 0.0;
    double gamma = 0.0;
    double mean_z = 0.0;
    double var_z = 1.0;
};

inline constexpr double kMinQ = 1e-12;

/// q = var_Z / (1 - mean_Z^2), the correlation indicator in [0, 1].
inline double q_parameter(double mean_z, double var_z) {
    const double spread = 1.0 - mean_z * mean_z;
    if (!(spread > 0.0)) {
        throw domain_error("q_parameter: undefined for |<Z>| = 1");
    }
    if (!(var_z >= 0.0)) {
        throw validation_error("q_parameter: variance must be >= 0");
    }
    return var_z / spread;
}

struct QParameter {
    double q = 0.0;
    bool clamped = false;  // raised to kMinQ to avoid the q -> 0 singularity
};

inline QParameter effective_q(const NQubitDephasing& spec) {
    if (spec.n < 1 || !(spec.gamma > 0.0) || !std::isfinite(spec.omega0)) {
        throw validation_error("NQubitDephasing: need N >= 1 and gamma > 0");
    }
    QParameter out;
    out.q = q_parameter(spec.mean_z, spec.var_z);
    if (out.q > 1.0 + 1e-12) {
        throw validation_error("NQubitDephasing: q must lie in [0, 1]");
    }
    out.q = std::min(out.q, 1.0);
    if (out.q < kMinQ) {
        out.q = kMinQ;
        out.clamped = true;
    }
    return out;
}

/// Minimal C_Q over the collective gauge:
/// var_Z [omega0^2 N^2 / (N q (e^{2 gamma t} - 1) + 1) + gamma^2 N / (q (e^{2 gamma t} - 1))].
inline double nqubit_cq_opt(double t, const NQubitDephasing& spec) {
    if (!(t > 0.0)) {
        throw domain_error("nqubit_cq_opt: t must be positive");
    }
    const double q = effective_q(spec).q;
    const double n = spec.n;
    const double em1 = std::expm1(2.0 * spec.gamma * t);
    return spec.var_z * (spec.omega0 * spec.omega0 * n * n / (n * q * em1 + 1.0) +
                         spec.gamma * spec.gamma * n / (q * em1));
}

/// Integral of sqrt(C_Q^opt / 4) over (0, tau].
inline double nqubit_distance_bound(const NQubitDephasing& spec, double tau) {
    if (!(tau >= 0.0)) {
        throw validation_error("nqubit_distance_bound: tau must be >= 0");
    }
    if (tau == 0.0 || spec.var_z == 0.0) {
        return 0.0;
    }
    numerics::QuadratureSpec q;
    q.singular_left_endpoint = true;
    q.max_depth = 30;
    return numerics::integrate([&](double t) { return std::sqrt(nqubit_cq_opt(t, spec) / 4.0); },
                               0.0, tau, q);
}

/// The bound's limit as tau -> infinity.
inline double nqubit_distance_bound_infinity(const NQubitDephasing& spec) {
    const double g = spec.gamma;
    // The speed falls off like exp(-gamma t) beyond t ~ 1/gamma.
    const double t1 = 1.0 / g;
    const double head = nqubit_distance_bound(spec, t1);
    numerics::QuadratureSpec q;
    const double amp = std::sqrt(nqubit_cq_opt(t1, spec) / 4.0) * std::exp(g * t1);
    const double tail = numerics::integrate_exp_tail(
        [&](double t) { return std::sqrt(nqubit_cq_opt(t, spec) / 4.0); }, t1, amp, g, q);
    return head + tail;
}

struct TimeBound {
    double tau = std::numeric_limits<double>::infinity();
    bool reachable = false;
    bool q_clamped = false;
};

/// Smallest tau whose accumulated bound reaches D_target, by bracketed root
/// finding in log tau on the monotone accumulated integral.
inline TimeBound nqubit_time_bound(const NQubitDephasing& spec, double D_target) {
    if (!(D_target > 0.0 && D_target <= pi / 2 + 1e-12)) {
        throw validation_error("nqubit_time_bound: D_target must lie in (0, pi/2]");
    }
    TimeBound out;
    out.q_clamped = effective_q(spec).clamped;
    if (spec.var_z == 0.0 || nqubit_distance_bound_infinity(spec) < D_target) {
        return out;
    }
    const double g = spec.gamma;
    auto f = [&](double log_tau) { return nqubit_distance_bound(spec, std::exp(log_tau)) - D_target; };
    double hi = std::log(1.0 / g);
    while (f(hi) < 0.0) {
        hi += std::log(4.0);
    }
    double lo = hi - std::log(4.0);
    while (f(lo) > 0.0) {
        lo -= std::log(4.0);
    }
    out.tau = std::exp(numerics::find_root(f, lo, hi, 1e-12));
    out.reachable = true;
    return out;
}

/// GHZ relaxation: tau >= (1/gamma) ln sec(2D / (sqrt(N) dZ sqrt(r^2+1))).
inline double ghz_time_bound_sec(const NQubitDephasing& spec, double D) {
    const double r = spec.omega0 / spec.gamma;
    const double x = 2.0 * D / (std::sqrt(static_cast<double>(spec.n)) * std::sqrt(spec.var_z) *
                                std::sqrt(r * r + 1.0));
    if (!(x < pi / 2)) {
        return std::numeric_limits<double>::infinity();
    }
    return -std::log(std::cos(x)) / spec.gamma;
}

/// GHZ large-N fit: tau >= (1/N)(2D/(omega0 dZ))(1 + D/(r dZ)).
inline double ghz_time_bound_coeff(const NQubitDephasing& spec, double D) {
    const double dz = std::sqrt(spec.var_z);
    const double r = spec.omega0 / spec.gamma;
    return (2.0 * D / (spec.omega0 * dz)) * (1.0 + D / (r * dz)) / spec.n;
}

/// Separable large-N asymptote: tau >= (1/N) 2 D^2 / (gamma (1 - <Z>^2)).
inline double sep_time_asymptote_fast(const NQubitDephasing& spec, double D) {
    return 2.0 * D * D / (spec.gamma * (1.0 - spec.mean_z * spec.mean_z)) / spec.n;
}

/// Separable intermediate-N asymptote: tau >= (1/sqrt N) 2D / (omega0 sqrt(1 - <Z>^2)).
inline double sep_time_asymptote_slow(const NQubitDephasing& spec, double D) {
    return 2.0 * D / (spec.omega0 * std::sqrt(1.0 - spec.mean_z * spec.mean_z)) /
           std::sqrt(static_cast<double>(spec.n));
}

/// Transition estimate from the exact separable fidelity: (r^2 - 1) ln sec D.
inline double sep_transition_n(double r, double D) { return (r * r - 1.0) * (-std::log(std::cos(D))); }

/// Transition estimate from the bound's asymptotes: r^2 D^2 / (1 - <Z>^2).
inline double sep_transition_n_bound(double r, double D, double mean_z) {
    return r * r * D * D / (1.0 - mean_z * mean_z);
}

/// GHZ state: (1 + e^{-N gamma tau} cos(N omega0 tau)) / 2.
inline double exact_ghz_fidelity(int n, double tau, double omega0, double gamma) {
    if (n < 1 || !(tau >= 0.0)) {
        throw validation_error("exact_ghz_fidelity: need N >= 1 and tau >= 0");
    }
    return 0.5 * (1.0 + std::exp(-n * gamma * tau) * std::cos(n * omega0 * tau));
}

/// Product of equator states: 2^{-N} (1 + e^{-gamma tau} cos(omega0 tau))^N.
inline double exact_sep_fidelity(int n, double tau, double omega0, double gamma) {
    if (n < 1 || !(tau >= 0.0)) {
        throw validation_error("exact_sep_fidelity: need N >= 1 and tau >= 0");
    }
    const double single = 0.5 * (1.0 + std::exp(-gamma * tau) * std::cos(omega0 * tau));
    return std::pow(single, n);
}

} // namespace qsl::channels
