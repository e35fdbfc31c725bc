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
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/geometry.hpp"
#include "qsl/numerics.hpp"
#include "qsl/parallel.hpp"
#include "qsl/purification.hpp"
#include "qsl/trajectory.hpp"

namespace qsl::bounds {

// ---- energy spectra ----

/// Energies E_n (in units where hbar = qsl::hbar) with weights |c_n|^2.
struct EnergySpectrumState {
    std::vector<double> energies;
    std::vector<double> probabilities;

    void validate() const {
        if (energies.empty()) {
            throw validation_error("EnergySpectrumState: empty spectrum");
        }
        if (energies.size() != probabilities.size()) {
            throw validation_error("EnergySpectrumState: energies and probabilities differ in length");
        }
        double total = 0.0;
        for (std::size_t k = 0; k < energies.size(); ++k) {
            if (!std::isfinite(energies[k])) {
                throw validation_error("EnergySpectrumState: non-finite energy");
            }
            if (!(probabilities[k] >= 0.0)) {
                throw validation_error("EnergySpectrumState: negative probability");
            }
            total += probabilities[k];
        }
        if (std::abs(total - 1.0) > 1e-10) {
            throw validation_error("EnergySpectrumState: probabilities do not sum to 1");
        }
    }

    double mean() const {
        return std::inner_product(energies.begin(), energies.end(), probabilities.begin(), 0.0);
    }

    double stddev() const {
        const double m = mean();
        double v = 0.0;
        for (std::size_t k = 0; k < energies.size(); ++k) {
            v += probabilities[k] * (energies[k] - m) * (energies[k] - m);
        }
        return std::sqrt(v);
    }

    /// <psi0|psi(t)> = sum_n p_n exp(-i E_n t / hbar).
    std::complex<double> overlap(double t) const {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < energies.size(); ++k) {
            acc += probabilities[k] * std::exp(std::complex<double>(0.0, -energies[k] * t / hbar));
        }
        return acc;
    }
};

// ---- Mandelstam-Tamm and Margolus-Levitin ----

/// cos^2(dE t / hbar), defined while dE t / hbar <= pi/2.
inline double mt_fidelity_floor(double delta_e, double t) {
    if (!(delta_e >= 0.0) || !(t >= 0.0)) {
        throw validation_error("mt_fidelity_floor: need dE >= 0 and t >= 0");
    }
    const double x = delta_e * t / hbar;
    if (x > pi / 2 + 1e-12) {
        throw domain_error("mt_fidelity_floor: dE t / hbar beyond pi/2, the floor is undefined");
    }
    const double c = std::cos(std::min(x, pi / 2));
    return c * c;
}

/// Smallest tau with int_0^tau dE(t) dt / hbar = arccos sqrt(F_target); infinite
/// when the accumulated integral levels off below the target.
inline double mt_time_bound(const std::function<double(double)>& delta_e, double F_target) {
    if (!(F_target >= 0.0 && F_target <= 1.0)) {
        throw validation_error("mt_time_bound: F_target must lie in [0, 1]");
    }
    const double target = std::acos(std::sqrt(F_target));
    if (target == 0.0) {
        return 0.0;
    }
    auto accumulated = [&](double tau) {
        return numerics::integrate([&](double t) { return delta_e(t) / hbar; }, 0.0, tau);
    };
    double lo = 0.0;
    double hi = 1.0;
    double prev = accumulated(hi);
    for (int k = 0; prev < target; ++k) {
        if (k == 80) {
            return std::numeric_limits<double>::infinity();
        }
        lo = hi;
        hi *= 2.0;
        const double next = accumulated(hi);
        if (next - prev <= 1e-13 * std::max(1.0, next) && next < target) {
            return std::numeric_limits<double>::infinity();
        }
        prev = next;
    }
    return numerics::find_root([&](double tau) { return accumulated(tau) - target; }, lo, hi,
                               1e-13 * hi);
}

/// pi hbar / (2 <E>), with <E> measured from the ground state. Orthogonality only.
inline double ml_time_bound(double mean_e_above_ground) {
    if (!(mean_e_above_ground > 0.0)) {
        throw validation_error("ml_time_bound: mean energy above the ground state must be > 0");
    }
    return pi * hbar / (2.0 * mean_e_above_ground);
}

// ---- Giovannetti alpha(F) ----

namespace detail {

// a as a function of y on the tangency branch.
inline double giov_a_of_y(double y, double q) {
    return (y + std::sqrt(y * y * (1.0 + q * q) + q * q)) / (1.0 + y * y);
}

inline double giov_residual(double y, double q) {
    return std::sin(y) - (giov_a_of_y(y, q) * (1.0 - q * y) + q) / (1.0 + q * q);
}

} // namespace detail

/// Slope a(q) of the tightest line 1 - a x under cos x + q sin x, from the
/// implicit system in y on [pi - atan(1/q), pi + atan q].
inline double giovannetti_a(double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
        throw validation_error("giovannetti_a: q must be finite and >= 0");
    }
    const double lo = pi - (q > 0.0 ? std::atan(1.0 / q) : pi / 2);
    const double hi = pi + std::atan(q);
    constexpr int kScan = 400;
    double y0 = lo;
    double r0 = detail::giov_residual(y0, q);
    for (int k = 1; k <= kScan; ++k) {
        const double y1 = lo + (hi - lo) * k / kScan;
        const double r1 = detail::giov_residual(y1, q);
        if (r0 == 0.0) {
            return detail::giov_a_of_y(y0, q);
        }
        if ((r0 < 0.0) != (r1 < 0.0)) {
            const double y = numerics::find_root([q](double y) { return detail::giov_residual(y, q); },
                                                 y0, y1, 1e-15);
            return detail::giov_a_of_y(y, q);
        }
        y0 = y1;
        r0 = r1;
    }
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "giovannetti_a: no root of the implicit system for q = %.6g on [%.6g, %.6g]", q, lo,
                  hi);
    throw bracketing_error(msg);
}

struct GiovannettiAlpha {
    double alpha = 0.0;
    double theta = 0.0;  // minimizing angle
    double q = 0.0;      // maximizing q at that angle
};

/// min over theta of max over q >= 0 of [1 - sqrt(F)(cos theta - q sin theta)] 2/(pi a(q)).
/// q is scanned on a log grid over [1e-6, 1e3] (plus q = 0) and refined; theta
/// on a uniform grid and refined. opt_tol sets the refinement precision.
inline GiovannettiAlpha giovannetti_alpha_detail(double F, double opt_tol = 1e-6) {
    if (!(F >= 0.0 && F <= 1.0)) {
        throw validation_error("giovannetti_alpha: F must lie in [0, 1]");
    }
    if (!(opt_tol > 0.0)) {
        throw validation_error("giovannetti_alpha: opt_tol must be positive");
    }
    const int bits = std::clamp(static_cast<int>(std::ceil(-std::log2(opt_tol))) + 4, 8,
                                std::numeric_limits<double>::digits / 2);
    const double sf = std::sqrt(F);
    constexpr int kQ = 600;
    static const auto grid = [] {
        std::vector<std::pair<double, double>> g;  // (log q, a(q))
        g.reserve(kQ);
        for (int k = 0; k < kQ; ++k) {
            const double lq = std::log(1e-6) + (std::log(1e3) - std::log(1e-6)) * k / (kQ - 1);
            g.emplace_back(lq, giovannetti_a(std::exp(lq)));
        }
        return g;
    }();
    static const double a_zero = giovannetti_a(0.0);

    auto value = [sf](double theta, double q, double a) {
        return (1.0 - sf * (std::cos(theta) - q * std::sin(theta))) * 2.0 / (pi * a);
    };
    // Max over the q grid; returns (value, grid index or -1 for q = 0).
    auto coarse = [&](double theta) {
        double best = value(theta, 0.0, a_zero);
        int idx = -1;
        for (int k = 0; k < kQ; ++k) {
            const double v = value(theta, std::exp(grid[k].first), grid[k].second);
            if (v > best) {
                best = v;
                idx = k;
            }
        }
        return std::pair<double, int>{best, idx};
    };
    auto refined = [&](double theta, double* q_at = nullptr) {
        const auto [best, idx] = coarse(theta);
        if (idx < 0 || idx == kQ - 1) {
            if (q_at) {
                *q_at = idx < 0 ? 0.0 : std::exp(grid[idx].first);
            }
            return best;
        }
        const double lo = grid[std::max(idx - 1, 0)].first;
        const double hi = grid[idx + 1].first;
        const auto m = numerics::minimize_scalar(
            [&](double lq) {
                const double q = std::exp(lq);
                return -value(theta, q, giovannetti_a(q));
            },
            lo, hi, bits);
        if (-m.value > best) {
            if (q_at) {
                *q_at = std::exp(m.x);
            }
            return -m.value;
        }
        if (q_at) {
            *q_at = std::exp(grid[idx].first);
        }
        return best;
    };

    constexpr int kTheta = 720;
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k < kTheta; ++k) {
        const double v = coarse(2.0 * pi * k / kTheta).first;
        if (v < best) {
            best = v;
            best_k = k;
        }
    }
    const double step = 2.0 * pi / kTheta;
    const double center = step * best_k;
    const auto m = numerics::minimize_scalar([&](double th) { return refined(th); }, center - step,
                                             center + step, bits);
    GiovannettiAlpha out;
    const double at_center = refined(center);
    if (at_center <= m.value) {
        out.theta = center;
    } else {
        out.theta = m.x;
    }
    out.alpha = refined(out.theta, &out.q);
    return out;
}

inline double giovannetti_alpha(double F, double opt_tol = 1e-6) {
    return giovannetti_alpha_detail(F, opt_tol).alpha;
}

// ---- general bound ----

// RawCq is C_Q of the purification as given, without gauge minimization.
enum class QfiSource { SLD, MinimizedCq, RawCq };

struct BoundReport {
    std::vector<double> t_grid;
    std::vector<double> lhs;  // Bures angle from rho(0)
    std::vector<double> rhs;  // int_0^t sqrt(F_Q/4)
    std::vector<bool> saturated_mask;
    double tol = 1e-6;
    // Some lhs increment exceeded 0.2 rad; the grid is too coarse for the
    // path-length picture (the bound itself is unaffected).
    bool coarse_grid = false;

    double max_violation() const {
        double v = 0.0;
        for (std::size_t k = 0; k < lhs.size(); ++k) {
            v = std::max(v, lhs[k] - rhs[k]);
        }
        return v;
    }
};

inline constexpr double kSaturationTol = 1e-6;

namespace detail {

template <class Fn>
auto with_time(double t, Fn fn) -> decltype(fn()) {
    char at[48];
    std::snprintf(at, sizeof at, " (at t = %.9g)", t);
    try {
        return fn();
    } catch (const non_convergence& e) {
        throw non_convergence(e.what() + std::string(at), e.best_estimate());
    } catch (const domain_error& e) {
        throw domain_error(e.what() + std::string(at));
    } catch (const validation_error& e) {
        throw validation_error(e.what() + std::string(at));
    }
}

// The information is evaluated to about 1e-9 relative; a tighter target only
// makes the adaptive rule chase evaluation noise.
inline const numerics::QuadratureSpec kSpeedQuadrature{1e-12, 1e-9, 18, false};

// int_0^b v(t) dt for v ~ t^(-1/2) at the origin, in u = sqrt(t) where the
// integrand 2 u v(u^2) is smooth. Below u0 = 1e-3 sqrt(b) the smallest
// eigenvalues of rho sit at rounding level and the information cannot be
// evaluated, so [0, u0] is covered by the linear extrapolation of the
// integrand from u0 and 2 u0 (error O(u0^3)).
template <class V>
double singular_head_integral(const V& speed, double b) {
    const double ub = std::sqrt(b);
    const double u0 = 1e-3 * ub;
    auto g = [&](double u) { return 2.0 * u * speed(u * u); };
    const double g1 = g(u0);
    const double g2 = g(2.0 * u0);
    const double head = u0 * (1.5 * g1 - 0.5 * g2);
    return head + numerics::integrate(g, u0, ub, kSpeedQuadrature);
}

} // namespace detail

/// Information at time t from the requested source.
inline double qfi_at(const ChannelTrajectory& path, QfiSource source, double t) {
    return detail::with_time(t, [&] {
        if (source == QfiSource::SLD) {
            return path.qfi(t);
        }
        if (!path.purified) {
            throw validation_error("general_qsl: C_Q needs a purified trajectory");
        }
        if (source == QfiSource::RawCq) {
            return purification::cq_raw(*path.purified, t);
        }
        return purification::minimize_cq(*path.purified,
                                         purification::full_hermitian_basis(path.purified->dE), t)
            .cq;
    });
}

/// lhs(tau) = Bures angle between rho(0) and rho(tau); rhs(tau) = int_0^tau
/// sqrt(F_Q(t)/4) dt, accumulated segment by segment over the grid.
inline BoundReport general_qsl(const ChannelTrajectory& path, QfiSource source,
                               double tol = kSaturationTol) {
    const auto& grid = path.t_grid;
    if (grid.empty() || !(grid.front() >= 0.0)) {
        throw validation_error("general_qsl: need a nonempty time grid starting at t >= 0");
    }
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) {
            throw validation_error("general_qsl: time grid must be strictly increasing");
        }
    }
    BoundReport rep;
    rep.t_grid = grid;
    rep.tol = tol;
    const DensityOperator rho0 = path.rho(0.0);
    auto speed = [&](double t) { return std::sqrt(std::max(0.0, qfi_at(path, source, t)) / 4.0); };

    std::vector<std::pair<double, double>> segments;
    segments.reserve(grid.size());
    double prev = 0.0;
    for (double t : grid) {
        segments.emplace_back(prev, t);
        prev = t;
    }
    const auto pieces = parallel_map(segments, [&](const std::pair<double, double>& seg) {
        const auto [a, b] = seg;
        if (a == b) {
            return 0.0;
        }
        if (path.singular_at_zero && a == 0.0) {
            return detail::singular_head_integral(speed, b);
        }
        return numerics::integrate(speed, a, b, detail::kSpeedQuadrature);
    });
    rep.lhs = parallel_map(grid, [&](double t) {
        return detail::with_time(t, [&] { return geometry::bures_angle(rho0, path.rho(t)); });
    });

    double acc = 0.0;
    double last_lhs = 0.0;
    rep.rhs.reserve(grid.size());
    rep.saturated_mask.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        acc += pieces[k];
        rep.rhs.push_back(acc);
        rep.saturated_mask.push_back(std::abs(acc - rep.lhs[k]) <= tol);
        if (std::abs(rep.lhs[k] - last_lhs) > geometry::kCoarseIncrement) {
            rep.coarse_grid = true;
        }
        last_lhs = rep.lhs[k];
    }
    return rep;
}

struct SecondOrderCheck {
    double fidelity_drop = 0.0;   // 1 - F_B(rho(t0), rho(t0 + dt))
    double qfi_prediction = 0.0;  // F_Q(t0) dt^2 / 4
};

inline SecondOrderCheck second_order_saturation_check(const ChannelTrajectory& path, double t0,
                                                      double dt,
                                                      QfiSource source = QfiSource::SLD) {
    if (!(t0 >= 0.0) || !(dt > 0.0)) {
        throw validation_error("second_order_saturation_check: need t0 >= 0 and dt > 0");
    }
    SecondOrderCheck out;
    out.fidelity_drop = 1.0 - geometry::bures_fidelity(path.rho(t0), path.rho(t0 + dt));
    out.qfi_prediction = qfi_at(path, source, t0) * dt * dt / 4.0;
    return out;
}

// ---- median bounds ----

/// Minimizer of sum_n p_n |E_n - g|. On a flat stretch (half the weight on
/// each side) the midpoint of the two bracketing energies.
inline double weighted_median(const EnergySpectrumState& spec) {
    spec.validate();
    std::vector<std::size_t> order(spec.energies.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return spec.energies[a] < spec.energies[b]; });
    constexpr double kHalfTol = 1e-12;
    double cum = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        cum += spec.probabilities[order[i]];
        if (std::abs(cum - 0.5) <= kHalfTol) {
            // Next level carrying weight closes the flat stretch.
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                if (spec.probabilities[order[j]] > 0.0) {
                    return 0.5 * (spec.energies[order[i]] + spec.energies[order[j]]);
                }
            }
            return spec.energies[order[i]];
        }
        if (cum > 0.5) {
            return spec.energies[order[i]];
        }
    }
    return spec.energies[order.back()];
}

/// <|H - E_med|> = sum_n p_n |E_n - E_med|.
inline double mean_abs_dev_from_median(const EnergySpectrumState& spec) {
    const double med = weighted_median(spec);
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.energies.size(); ++k) {
        acc += spec.probabilities[k] * std::abs(spec.energies[k] - med);
    }
    return acc;
}

/// sqrt(F_B) >= 1 - <|H - E_med|> t / hbar, clamped at -1.
inline double median_bound_weak(const EnergySpectrumState& spec, double t) {
    if (!(t >= 0.0)) {
        throw validation_error("median_bound_weak: t must be >= 0");
    }
    return std::max(-1.0, 1.0 - mean_abs_dev_from_median(spec) * t / hbar);
}

/// tau >= hbar (1 - sqrt F) / <|H - E_med|>; zero spread never moves.
inline double median_time_bound_weak(const EnergySpectrumState& spec, double F) {
    if (!(F >= 0.0 && F <= 1.0)) {
        throw validation_error("median_time_bound_weak: F must lie in [0, 1]");
    }
    const double mad = mean_abs_dev_from_median(spec);
    const double gap = 1.0 - std::sqrt(F);
    if (gap == 0.0) {
        return 0.0;
    }
    return mad > 0.0 ? hbar * gap / mad : std::numeric_limits<double>::infinity();
}

/// |<psi0| (H - E_med) |psi(t)>| for the spectrum's state.
inline std::function<double(double)> median_overlap_integrand(const EnergySpectrumState& spec) {
    const double med = weighted_median(spec);
    return [spec, med](double t) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < spec.energies.size(); ++k) {
            acc += spec.probabilities[k] * (spec.energies[k] - med) *
                   std::exp(std::complex<double>(0.0, -spec.energies[k] * t / hbar));
        }
        return std::abs(acc);
    };
}

/// D_FS(0, tau) <= arccos[1 - int_0^tau |<psi0|H - E_med|psi(t)>| dt / hbar];
/// the arccos caps at pi once its argument passes -1.
inline double median_bound_strong(const std::function<double(double)>& overlap_integrand,
                                  double tau) {
    if (!(tau >= 0.0)) {
        throw validation_error("median_bound_strong: tau must be >= 0");
    }
    const double integral = numerics::integrate(overlap_integrand, 0.0, tau);
    return std::acos(std::clamp(1.0 - integral / hbar, -1.0, 1.0));
}

inline double median_bound_strong(const EnergySpectrumState& spec,
                                  const std::function<double(double)>& overlap_integrand,
                                  double tau) {
    spec.validate();
    return median_bound_strong(overlap_integrand, tau);
}

/// Three-level state {0, hbar omega, 2 hbar omega} with weights
/// (1/2 - p2, 1/2, p2): the strong bound's floor on sqrt(F), in closed form
/// 1 - 2|1/4 - p2| E(omega tau, -p2 (1/2 - p2) / (1/4 - p2)^2).
inline double three_level_strong_floor(double p2, double omega_tau) {
    if (!(p2 >= 0.0 && p2 <= 0.5)) {
        throw validation_error("three_level_strong_floor: p2 must lie in [0, 1/2]");
    }
    if (!(omega_tau >= 0.0)) {
        throw validation_error("three_level_strong_floor: omega tau must be >= 0");
    }
    const double d = 0.25 - p2;
    const double prod = p2 * (0.5 - p2);
    double integral = 0.0;
    if (std::abs(d) < 1e-8) {
        // Limit d -> 0: 2 sqrt(p2 (1/2 - p2)) int_0^x |sin s| ds.
        const double turns = std::floor(omega_tau / pi);
        const double rest = omega_tau - turns * pi;
        integral = 2.0 * std::sqrt(prod) * (2.0 * turns + 1.0 - std::cos(rest));
    } else {
        integral = 2.0 * std::abs(d) * numerics::ellint_e_extended(omega_tau, -prod / (d * d));
    }
    return 1.0 - integral;
}

/// Exact |<psi0|psi(tau)>| for the three-level state.
inline double three_level_exact_overlap(double p2, double omega_tau) {
    const EnergySpectrumState s{{0.0, hbar, 2.0 * hbar}, {0.5 - p2, 0.5, p2}};
    return std::abs(s.overlap(omega_tau));
}

inline EnergySpectrumState three_level_spectrum(double p2, double omega) {
    return {{0.0, hbar * omega, 2.0 * hbar * omega}, {0.5 - p2, 0.5, p2}};
}

// ---- saturation audit ----

struct SaturationSegment {
    double t_begin = 0.0;
    double t_end = 0.0;
    double max_gap = 0.0;
};

/// Maximal runs of consecutive samples with |rhs - lhs| <= tol.
inline std::vector<SaturationSegment> saturation_audit(const BoundReport& report) {
    const std::size_t n = report.t_grid.size();
    if (report.lhs.size() != n || report.rhs.size() != n) {
        throw validation_error("saturation_audit: report arrays differ in length");
    }
    std::vector<SaturationSegment> out;
    bool open = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double gap = std::abs(report.rhs[k] - report.lhs[k]);
        if (gap <= report.tol) {
            if (!open) {
                out.push_back({report.t_grid[k], report.t_grid[k], gap});
                open = true;
            } else {
                out.back().t_end = report.t_grid[k];
                out.back().max_gap = std::max(out.back().max_gap, gap);
            }
        } else {
            open = false;
        }
    }
    return out;
}

} // namespace qsl::bounds
