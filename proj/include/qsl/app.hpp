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
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qsl/bounds.hpp"
#include "qsl/channels.hpp"
#include "qsl/geometry.hpp"
#include "qsl/io/csv.hpp"
#include "qsl/io/scenario.hpp"
#include "qsl/io/svg.hpp"
#include "qsl/parallel.hpp"

namespace qsl::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Command-line overrides applied on top of a scenario.
struct Options {
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;  // 0: hardware concurrency
};

struct Output {
    io::Table table;
    io::Plot plot;
    std::vector<std::string> warnings;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) {
        out[k] = a + (b - a) * k / (n - 1);
    }
    out.back() = b;
    return out;
}

// Distinct integers spread evenly in log10 from 10^lo to 10^hi.
inline std::vector<double> log_integers(int lo, int hi, int per_decade) {
    std::vector<double> out;
    for (int k = lo * per_decade; k <= hi * per_decade; ++k) {
        const double v = std::round(std::pow(10.0, static_cast<double>(k) / per_decade));
        if (out.empty() || v > out.back()) {
            out.push_back(v);
        }
    }
    return out;
}

// ---- state and channel construction ----

inline int qubit_count(Eigen::Index dim) {
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) {
        ++n;
    }
    return (Eigen::Index{1} << n) == dim ? n : -1;
}

inline ComplexVector qubit_ket(double theta, double phi) {
    ComplexVector v(2);
    v << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
    return v;
}

inline ComplexVector product(const ComplexVector& one, int n) {
    ComplexVector out = one;
    for (int k = 1; k < n; ++k) {
        out = kron(out, one);
    }
    return out;
}

inline DensityOperator build_state(const io::StateConfig& s, Eigen::Index dim, std::uint64_t seed) {
    if (s.amplitudes) {
        if (s.amplitudes->size() != dim) {
            throw io::config_error("initial_state: expected " + std::to_string(dim) +
                                   " amplitudes, got " + std::to_string(s.amplitudes->size()));
        }
        return DensityOperator::from_pure(*s.amplitudes);
    }
    if (s.random_rank) {
        Rng rng(seed);
        const int rank = *s.random_rank;
        if (rank < 1 || rank > dim) {
            throw io::config_error("initial_state.random.rank: must lie in [1, dim]");
        }
        return rank == 1 ? DensityOperator::from_pure(random_state(dim, rng))
                         : random_density(dim, rank, rng);
    }
    const int n = qubit_count(dim);
    if (n < 1) {
        throw io::config_error("initial_state: qubit states need a 2^n dimensional system");
    }
    if (s.bloch) {
        return DensityOperator::from_pure(product(qubit_ket(s.bloch->first, s.bloch->second), n));
    }
    if (s.delta_z) {
        return DensityOperator::from_pure(product(qubit_ket(std::asin(*s.delta_z), 0.0), n));
    }
    if (s.preset == "excited") {
        return DensityOperator::from_pure(basis_ket(dim, dim - 1));
    }
    if (s.preset == "ground") {
        return DensityOperator::from_pure(basis_ket(dim, 0));
    }
    if (s.preset == "plus" || s.preset == "product_plus") {
        return DensityOperator::from_pure(product(qubit_ket(pi / 2, 0.0), n));
    }
    ComplexVector ghz = basis_ket(dim, 0) + basis_ket(dim, dim - 1);
    return DensityOperator::from_pure(ghz);
}

inline Eigen::Index channel_dim(const io::ChannelConfig& c) {
    switch (c.kind) {
    case io::ChannelKindId::Unitary:
        return c.hamiltonian->rows();
    case io::ChannelKindId::NQubitDephasing:
        if (c.n < 1 || c.n > channels::kMaxDenseQubits) {
            throw io::config_error("channel.n: dense dephasing supports 1 to " +
                                   std::to_string(channels::kMaxDenseQubits) + " qubits");
        }
        return Eigen::Index{1} << c.n;
    default:
        return 2;
    }
}

inline channels::ChannelKind build_channel(const io::ChannelConfig& c) {
    switch (c.kind) {
    case io::ChannelKindId::Unitary:
        return channels::UnitaryChannel{HermitianOperator(*c.hamiltonian), {}, {}};
    case io::ChannelKindId::AmplitudeDamping:
        return channels::AmplitudeDamping{c.gamma, {}, {}, true};
    case io::ChannelKindId::JaynesCummings:
        return channels::JaynesCummings{c.g};
    case io::ChannelKindId::Dephasing:
        return channels::Dephasing{c.omega0, c.gamma};
    case io::ChannelKindId::NQubitDephasing:
        return channels::NQubitDephasingDense{c.n, c.omega0, c.gamma};
    }
    throw io::config_error("channel: unsupported kind");
}

/// Everything a time-grid command needs, resolved from the scenario.
struct Problem {
    io::ChannelConfig channel;
    DensityOperator rho0;
    ChannelTrajectory path;
    double tol = bounds::kSaturationTol;
};

inline Problem build_problem(const io::Scenario& sc, const Options& opt) {
    if (!sc.channel || !sc.initial_state || !sc.time_grid) {
        throw io::config_error("scenario: this command needs channel, initial_state and time_grid");
    }
    Problem p;
    p.channel = *sc.channel;
    const Eigen::Index dim = channel_dim(p.channel);
    p.rho0 = build_state(*sc.initial_state, dim, opt.seed.value_or(sc.seed));
    try {
        p.path = channels::make_trajectory({build_channel(p.channel), p.rho0}, sc.time_grid->points());
    } catch (const validation_error& e) {
        throw io::config_error(std::string("channel: ") + e.what());
    }
    p.tol = opt.tol.value_or(sc.saturation_tol);
    if (!(p.tol > 0.0)) {
        throw io::config_error("--tol: must be > 0");
    }
    return p;
}

inline const ComplexMatrix& unitary_h(const Problem& p, const char* bound) {
    if (p.channel.kind != io::ChannelKindId::Unitary) {
        throw io::config_error(std::string("bound ") + bound + ": needs a unitary channel");
    }
    return *p.channel.hamiltonian;
}

inline bool is_pure(const DensityOperator& rho) {
    return std::abs((rho.matrix() * rho.matrix()).trace().real() - 1.0) <= 1e-10;
}

inline bounds::EnergySpectrumState spectrum_of(const Problem& p, const char* bound) {
    const ComplexMatrix& h = unitary_h(p, bound);
    if (!is_pure(p.rho0)) {
        throw io::config_error(std::string("bound ") + bound + ": needs a pure initial state");
    }
    const auto ed = eig_hermitian(h);
    bounds::EnergySpectrumState s;
    for (Eigen::Index k = 0; k < ed.values.size(); ++k) {
        const double w = (ed.vectors.col(k).adjoint() * p.rho0.matrix() * ed.vectors.col(k))(0, 0).real();
        s.energies.push_back(ed.values(k));
        s.probabilities.push_back(std::max(0.0, w));
    }
    return s;
}

inline double mean_energy_above_ground(const Problem& p, const char* bound) {
    const ComplexMatrix& h = unitary_h(p, bound);
    const double ground = eig_hermitian(h).values.minCoeff();
    return std::max(0.0, (p.rho0.matrix() * h).trace().real() - ground);
}

inline bounds::QfiSource qfi_source(io::QfiChoice c) {
    switch (c) {
    case io::QfiChoice::CqRaw:
        return bounds::QfiSource::RawCq;
    case io::QfiChoice::CqMin:
        return bounds::QfiSource::MinimizedCq;
    default:
        return bounds::QfiSource::SLD;
    }
}

inline void require_purification(const Problem& p, bounds::QfiSource src) {
    if (src != bounds::QfiSource::SLD && !p.path.purified) {
        throw io::config_error("qfi_source: this channel and state have no purification, use sld");
    }
}

// rhs of the Giovannetti-type bound at time t: arccos sqrt(F*) with
// alpha(F*) = 2 <E> t / (pi hbar).
inline double alpha_rhs(double mean_e, double t, double opt_tol) {
    const double x = 2.0 * mean_e * t / (pi * hbar);
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return pi / 2;
    }
    const double f = numerics::find_root(
        [&](double F) { return bounds::giovannetti_alpha(F, opt_tol) - x; }, 0.0, 1.0, 1e-10);
    return std::acos(std::sqrt(f));
}

inline double closed_form_rhs(const Problem& p, double t) {
    const auto& c = p.channel;
    switch (c.kind) {
    case io::ChannelKindId::Unitary:
        return std::sqrt(variance(HermitianOperator(*c.hamiltonian), p.rho0)) * t / hbar;
    case io::ChannelKindId::AmplitudeDamping:
        return channels::amp_damp_bound(channels::AmplitudeDamping{c.gamma, {}, {}, true}, p.rho0, t)
            .distance;
    case io::ChannelKindId::JaynesCummings: {
        const double g = c.g;
        channels::AmplitudeDamping ch;
        ch.P = [g](double s) { return std::cos(g * s) * std::cos(g * s); };
        ch.dP = [g](double s) { return -g * std::sin(2.0 * g * s); };
        ch.monotone = false;
        return channels::amp_damp_bound(ch, p.rho0, t).distance;
    }
    case io::ChannelKindId::Dephasing: {
        const double dz = std::sqrt(std::max(0.0, variance(HermitianOperator(pauli_z()), p.rho0)));
        return channels::dephasing_bound(dz, t, c.omega0, c.gamma);
    }
    case io::ChannelKindId::NQubitDephasing: {
        const auto d = p.rho0.dim();
        double m1 = 0.0;
        double m2 = 0.0;
        for (Eigen::Index b = 0; b < d; ++b) {
            const double z = channels::detail::z_sum(static_cast<std::uint64_t>(b), c.n) / c.n;
            const double w = p.rho0.matrix()(b, b).real();
            m1 += w * z;
            m2 += w * z * z;
        }
        const channels::NQubitDephasing spec{c.n, c.omega0, c.gamma, m1, std::max(0.0, m2 - m1 * m1)};
        return channels::nqubit_distance_bound(spec, t);
    }
    }
    return kInf;
}

struct Series {
    std::vector<double> t;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double tol = bounds::kSaturationTol;
    bool coarse_grid = false;
};

inline const char* bound_name(io::BoundKind b) {
    switch (b) {
    case io::BoundKind::General:
        return "general";
    case io::BoundKind::MT:
        return "mt";
    case io::BoundKind::ML:
        return "ml";
    case io::BoundKind::Alpha:
        return "alpha";
    case io::BoundKind::MedianWeak:
        return "median_weak";
    case io::BoundKind::MedianStrong:
        return "median_strong";
    case io::BoundKind::ChannelClosedForm:
        return "channel_closed_form";
    }
    return "?";
}

// Validates the scenario against the bound kind before any numerics run.
inline void check_bound(const io::Scenario& sc, const Problem& p) {
    const char* name = bound_name(sc.bound);
    switch (sc.bound) {
    case io::BoundKind::General:
        require_purification(p, qfi_source(sc.qfi_source));
        break;
    case io::BoundKind::MT:
    case io::BoundKind::ML:
    case io::BoundKind::Alpha:
        unitary_h(p, name);
        break;
    case io::BoundKind::MedianWeak:
    case io::BoundKind::MedianStrong:
        spectrum_of(p, name);
        break;
    case io::BoundKind::ChannelClosedForm:
        if (p.channel.kind == io::ChannelKindId::Dephasing && !is_pure(p.rho0)) {
            throw io::config_error("bound channel_closed_form: dephasing form needs a pure state");
        }
        break;
    }
}

// Every bound here is a theorem, so lhs above rhs by more than the tolerance
// can only come from the numerics (an unresolved integrand, say).
inline void check_validity(const Series& s) {
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        if (s.lhs[k] - s.rhs[k] > s.tol) {
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "bound undershoots the distance by %.3g at t = %.9g; the integration "
                          "did not resolve the speed",
                          s.lhs[k] - s.rhs[k], s.t[k]);
            throw non_convergence(msg, s.rhs[k]);
        }
    }
}

inline Series compute_series(const io::Scenario& sc, const Problem& p, unsigned workers) {
    Series s;
    s.t = p.path.t_grid;
    s.tol = p.tol;
    if (sc.bound == io::BoundKind::General) {
        const auto rep = bounds::general_qsl(p.path, qfi_source(sc.qfi_source), p.tol);
        s.lhs = rep.lhs;
        s.rhs = rep.rhs;
        s.coarse_grid = rep.coarse_grid;
        check_validity(s);
        return s;
    }
    s.lhs = parallel_map(
        s.t,
        [&](double t) {
            return bounds::detail::with_time(
                t, [&] { return geometry::bures_angle(p.rho0, p.path.rho(t)); });
        },
        workers);
    std::function<double(double)> rhs;
    switch (sc.bound) {
    case io::BoundKind::MT: {
        const double de = std::sqrt(variance(HermitianOperator(unitary_h(p, "mt")), p.rho0));
        rhs = [de](double t) { return de * t / hbar; };
        break;
    }
    case io::BoundKind::Alpha: {
        const double e = mean_energy_above_ground(p, "alpha");
        const double opt_tol = std::min(1e-6, p.tol);
        rhs = [e, opt_tol](double t) { return alpha_rhs(e, t, opt_tol); };
        break;
    }
    case io::BoundKind::MedianWeak: {
        const auto spec = spectrum_of(p, "median_weak");
        rhs = [spec](double t) {
            return std::acos(std::clamp(bounds::median_bound_weak(spec, t), -1.0, 1.0));
        };
        break;
    }
    case io::BoundKind::MedianStrong: {
        const auto spec = spectrum_of(p, "median_strong");
        const auto integrand = bounds::median_overlap_integrand(spec);
        rhs = [spec, integrand](double t) { return bounds::median_bound_strong(spec, integrand, t); };
        break;
    }
    default:
        rhs = [&p](double t) { return closed_form_rhs(p, t); };
        break;
    }
    s.rhs = parallel_map(
        s.t, [&](double t) { return bounds::detail::with_time(t, [&] { return rhs(t); }); },
        workers);
    check_validity(s);
    return s;
}

inline io::Plot series_plot(const std::string& title, const Series& s, const std::string& rhs_label) {
    io::Plot plot;
    plot.title = title;
    plot.x_label = "t";
    plot.y_label = "angle (rad)";
    plot.series.push_back({"Bures angle", s.t, s.lhs, false});
    plot.series.push_back({rhs_label, s.t, s.rhs, true});
    return plot;
}

// ---- sweeps ----

struct SweepRow {
    double value = 0.0;
    double tau_bound = kInf;
    std::optional<double> tau_exact;
    std::optional<double> slope;
    bool reachable = false;
};

// First tau with F(tau) <= target, scanning up from a lower bound on it.
inline double first_crossing(const std::function<double(double)>& fidelity, double target,
                             double tau_lo) {
    if (fidelity(tau_lo) <= target) {
        return numerics::find_root([&](double t) { return fidelity(t) - target; }, 0.0, tau_lo,
                                   1e-14 * tau_lo);
    }
    const double step = tau_lo / 64.0;
    double a = tau_lo;
    for (int k = 0; k < 64 * 400; ++k) {
        const double b = a + step;
        if (fidelity(b) <= target) {
            return numerics::find_root([&](double t) { return fidelity(t) - target; }, a, b,
                                       1e-14 * b);
        }
        a = b;
    }
    return kInf;
}

inline channels::NQubitDephasing sweep_spec(const io::SweepConfig& c, double value) {
    const int n = c.parameter == io::SweepParam::N ? static_cast<int>(value) : c.n;
    const double r = c.parameter == io::SweepParam::R ? value : c.r;
    channels::NQubitDephasing s;
    s.n = n;
    s.gamma = c.gamma;
    s.omega0 = r * c.gamma;
    if (c.state == io::SweepState::Ghz) {
        s.mean_z = 0.0;
        s.var_z = 1.0;
    } else {
        s.mean_z = c.mean_z;
        s.var_z = (1.0 - c.mean_z * c.mean_z) / n;
    }
    return s;
}

inline std::vector<SweepRow> sweep_rows(const io::SweepConfig& c, unsigned workers) {
    const double target = std::cos(c.distance) * std::cos(c.distance);
    auto rows = parallel_map(
        c.values,
        [&](double v) {
            SweepRow row;
            row.value = v;
            const auto spec = sweep_spec(c, v);
            const auto tb = channels::nqubit_time_bound(spec, c.distance);
            row.tau_bound = tb.tau;
            row.reachable = tb.reachable;
            const bool exact_known = c.state == io::SweepState::Ghz || c.mean_z == 0.0;
            if (exact_known) {
                if (!tb.reachable) {
                    row.tau_exact = kInf;
                } else {
                    std::function<double(double)> f;
                    if (c.state == io::SweepState::Ghz) {
                        f = [&](double t) {
                            return channels::exact_ghz_fidelity(spec.n, t, spec.omega0, spec.gamma);
                        };
                    } else {
                        f = [&](double t) {
                            return channels::exact_sep_fidelity(spec.n, t, spec.omega0, spec.gamma);
                        };
                    }
                    row.tau_exact = first_crossing(f, target, tb.tau);
                }
            }
            return row;
        },
        workers);
    // Local log-log slope of the bound, centered where both neighbours exist.
    const std::size_t m = rows.size();
    for (std::size_t k = 0; k < m && m > 1; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = k + 1 == m ? k : k + 1;
        if (rows[a].reachable && rows[b].reachable) {
            rows[k].slope = (std::log(rows[b].tau_bound) - std::log(rows[a].tau_bound)) /
                            (std::log(rows[b].value) - std::log(rows[a].value));
        }
    }
    return rows;
}

inline io::Cell opt_cell(const std::optional<double>& v) {
    return v ? io::Cell{*v} : io::Cell{};
}

} // namespace detail

// ---- commands ----

inline Output run_bound(const io::Scenario& sc, const Options& opt = {}) {
    const auto p = detail::build_problem(sc, opt);
    detail::check_bound(sc, p);
    if (sc.bound == io::BoundKind::ML) {
        const double e = detail::mean_energy_above_ground(p, "ml");
        const double tau_ml = e > 0.0 ? bounds::ml_time_bound(e) : detail::kInf;
        io::Table table{"bound-ml", {"t", "lhs", "tau_ml", "orthogonal", "consistent"}, {}};
        const auto lhs = parallel_map(
            p.path.t_grid, [&](double t) { return geometry::bures_angle(p.rho0, p.path.rho(t)); },
            opt.workers);
        for (std::size_t k = 0; k < lhs.size(); ++k) {
            const double t = p.path.t_grid[k];
            const bool orth = lhs[k] >= pi / 2 - p.tol;
            table.add({t, lhs[k], tau_ml, orth, !orth || t >= tau_ml - p.tol});
        }
        io::Plot plot;
        plot.title = "Margolus-Levitin";
        plot.x_label = "t";
        plot.y_label = "angle (rad)";
        plot.series.push_back({"Bures angle", p.path.t_grid, lhs, false});
        plot.hmarks.push_back({pi / 2, "pi/2"});
        if (std::isfinite(tau_ml)) {
            plot.vmarks.push_back({tau_ml, "tau_ML"});
        }
        return {table, plot, {}};
    }
    const auto s = detail::compute_series(sc, p, opt.workers);
    io::Table table{"bound", {"t", "lhs", "rhs", "gap", "saturated"}, {}};
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        const double gap = s.rhs[k] - s.lhs[k];
        table.add({s.t[k], s.lhs[k], s.rhs[k], gap, std::abs(gap) <= s.tol});
    }
    Output res{table,
               detail::series_plot(sc.name.empty() ? "bound" : sc.name, s,
                                   std::string("bound (") + detail::bound_name(sc.bound) + ")"),
               {}};
    if (s.coarse_grid) {
        res.warnings.push_back("the distance moves by more than 0.2 rad between samples; "
                               "refine time_grid to follow the path");
    }
    return res;
}

inline Output run_qfi(const io::Scenario& sc, const Options& opt = {}) {
    const auto p = detail::build_problem(sc, opt);
    const auto src = detail::qfi_source(sc.qfi_source);
    detail::require_purification(p, src);
    const auto values = parallel_map(
        p.path.t_grid,
        [&](double t) {
            if (t == 0.0 && p.path.singular_at_zero) {
                return detail::kInf;
            }
            return bounds::qfi_at(p.path, src, t);
        },
        opt.workers);
    io::Table table{"qfi", {"t", "qfi"}, {}};
    for (std::size_t k = 0; k < values.size(); ++k) {
        table.add({p.path.t_grid[k], values[k]});
    }
    io::Plot plot;
    plot.title = sc.name.empty() ? "quantum Fisher information" : sc.name;
    plot.x_label = "t";
    plot.y_label = "F_Q";
    plot.series.push_back({"F_Q", p.path.t_grid, values, false});
    return {table, plot, {}};
}

inline Output run_audit(const io::Scenario& sc, const Options& opt = {}) {
    const auto p = detail::build_problem(sc, opt);
    if (sc.bound == io::BoundKind::ML) {
        throw io::config_error("audit: the ml bound has no rhs curve to audit");
    }
    detail::check_bound(sc, p);
    const auto s = detail::compute_series(sc, p, opt.workers);
    bounds::BoundReport rep;
    rep.t_grid = s.t;
    rep.lhs = s.lhs;
    rep.rhs = s.rhs;
    rep.tol = s.tol;
    io::Table table{"audit", {"t_begin", "t_end", "max_gap"}, {}};
    io::Plot plot = detail::series_plot(sc.name.empty() ? "saturation audit" : sc.name, s, "bound");
    for (const auto& seg : bounds::saturation_audit(rep)) {
        table.add({seg.t_begin, seg.t_end, seg.max_gap});
        plot.vmarks.push_back({seg.t_begin, "saturated from"});
        plot.vmarks.push_back({seg.t_end, "to"});
    }
    return {table, plot, {}};
}

inline Output run_sweep(const io::Scenario& sc, const Options& opt = {}) {
    if (!sc.sweep) {
        throw io::config_error("scenario: the sweep command needs a \"sweep\" section");
    }
    const auto& c = *sc.sweep;
    const auto rows = detail::sweep_rows(c, opt.workers);
    const std::string param = c.parameter == io::SweepParam::N ? "n" : "r";
    io::Table table{"sweep", {param, "tau_bound", "tau_exact", "slope", "reachable"}, {}};
    std::vector<double> xs;
    std::vector<double> tb;
    std::vector<double> xe;
    std::vector<double> te;
    for (const auto& r : rows) {
        table.add({r.value, r.tau_bound, detail::opt_cell(r.tau_exact), detail::opt_cell(r.slope),
                   r.reachable});
        if (r.reachable) {
            xs.push_back(r.value);
            tb.push_back(r.tau_bound);
        }
        if (r.tau_exact && std::isfinite(*r.tau_exact)) {
            xe.push_back(r.value);
            te.push_back(*r.tau_exact);
        }
    }
    io::Plot plot;
    plot.title = sc.name.empty() ? "time bound sweep" : sc.name;
    plot.x_label = param;
    plot.y_label = "tau";
    plot.log_x = true;
    plot.log_y = true;
    plot.series.push_back({"bound", xs, tb, false});
    if (!xe.empty()) {
        plot.series.push_back({"exact", xe, te, true});
    }
    return {table, plot, {}};
}

inline std::vector<double> default_alpha_fidelities() {
    std::vector<double> f;
    for (int k = 0; k < 20; ++k) {
        f.push_back(0.05 * k);
    }
    return f;
}

inline Output run_alpha(const std::vector<double>& fidelities, double opt_tol, unsigned workers = 0) {
    for (double f : fidelities) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw io::config_error("alpha: fidelities must lie in [0, 1]");
        }
    }
    if (!(opt_tol > 0.0)) {
        throw io::config_error("alpha: --tol must be > 0");
    }
    const auto res = parallel_map(
        fidelities, [&](double f) { return bounds::giovannetti_alpha_detail(f, opt_tol); }, workers);
    io::Table table{"alpha", {"fidelity", "alpha", "theta", "q"}, {}};
    std::vector<double> a;
    for (std::size_t k = 0; k < res.size(); ++k) {
        table.add({fidelities[k], res[k].alpha, res[k].theta, res[k].q});
        a.push_back(res[k].alpha);
    }
    io::Plot plot;
    plot.title = "alpha(F)";
    plot.x_label = "F";
    plot.y_label = "alpha";
    plot.series.push_back({"alpha", fidelities, a, false});
    return {table, plot, {}};
}

// ---- figures ----

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"grafbasico", "grafintegral", "exclwindow",
                                                 "dephgenplot", "tauNGHZ",     "tauNsepbound",
                                                 "tauNsep",    "medpre",       "medbom"};
    return ids;
}

class unknown_figure : public io::config_error {
public:
    using io::config_error::config_error;
};

namespace figures {

// Target distance for the N-qubit figures: F_B = 1%.
inline const double kDistance = std::acos(0.1);

inline Output grafbasico(unsigned workers) {
    // (|0> + sqrt2 |1>)/sqrt3 under H = hbar omega Z / 2, omega = 1.
    ComplexVector psi(2);
    psi << 1.0, std::sqrt(2.0);
    const auto rho0 = DensityOperator::from_pure(psi);
    const HermitianOperator h(0.5 * pauli_z());
    const auto path = channels::make_trajectory({channels::UnitaryChannel{h, {}, {}}, rho0});
    const double de = std::sqrt(variance(h, rho0));
    const auto t = detail::linspace(0.0, 2.0 * pi, 181);
    const auto f = parallel_map(
        t, [&](double x) { return geometry::bures_fidelity(rho0, path.rho(x)); }, workers);
    io::Table table{"figure-grafbasico", {"omega_t", "fidelity", "mt_floor"}, {}};
    std::vector<double> floor;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double fl = de * t[k] <= pi / 2 ? bounds::mt_fidelity_floor(de, t[k]) : 0.0;
        floor.push_back(fl);
        table.add({t[k], f[k], fl});
    }
    io::Plot plot{"fidelity and Mandelstam-Tamm floor", "omega t", "F", false, false, {}, {}, {}};
    plot.series.push_back({"exact F", t, f, false});
    plot.series.push_back({"cos^2(dE t / hbar)", t, floor, true});
    return {table, plot, {}};
}

inline Output grafintegral() {
    // dE(t) = dE0 (1 + sin(2t)/2) with dE0 = 1/2; the marked time is where
    // the accumulated area reaches D1 = pi/4.
    const double de0 = 0.5;
    auto de = [de0](double t) { return de0 * (1.0 + 0.5 * std::sin(2.0 * t)); };
    auto area = [de0](double t) { return de0 * (t + 0.25 * (1.0 - std::cos(2.0 * t))); };
    const double d1 = pi / 4;
    const double tau = bounds::mt_time_bound(de, std::cos(d1) * std::cos(d1));
    const auto t = detail::linspace(0.0, 4.0, 161);
    io::Table table{"figure-grafintegral", {"t", "delta_e_over_hbar", "accumulated"}, {}};
    std::vector<double> a;
    std::vector<double> b;
    for (double x : t) {
        a.push_back(de(x) / hbar);
        b.push_back(area(x) / hbar);
        table.add({x, a.back(), b.back()});
    }
    io::Plot plot{"energy spread and accumulated area", "t", "", false, false, {}, {}, {}};
    plot.series.push_back({"dE(t)/hbar", t, a, false});
    plot.series.push_back({"area", t, b, true});
    plot.vmarks.push_back({tau, "tau"});
    plot.hmarks.push_back({d1, "D1"});
    return {table, plot, {}};
}

inline Output exclwindow() {
    const auto r = detail::linspace(0.0, 6.0, 241);
    io::Table table{"figure-exclwindow", {"r", "distance_limit"}, {}};
    std::vector<double> d;
    for (double x : r) {
        d.push_back(channels::dephasing_bound_infinity(1.0, x));
        table.add({x, d.back()});
    }
    io::Plot plot{"reachable distance under dephasing", "r", "D", false, false, {}, {}, {}};
    plot.series.push_back({"bound as tau -> inf", r, d, false});
    plot.hmarks.push_back({pi / 2, "pi/2"});
    plot.vmarks.push_back({channels::dephasing_r_crit(), "r_crit"});
    return {table, plot, {}};
}

inline Output dephgenplot() {
    const double r = 8.0;
    const double gamma = 1.0;
    const auto gt = detail::linspace(0.005, 0.5, 100);
    io::Table table{"figure-dephgenplot",
                    {"delta_z", "gamma_tau", "bound", "exact", "relative_discrepancy"},
                    {}};
    io::Plot plot{"relative discrepancy, r = 8", "gamma tau", "(bound - exact) / exact",
                  false, false, {}, {}, {}};
    for (double dz : {0.25, 0.5, 0.75, 1.0}) {
        const double mz = std::sqrt(1.0 - dz * dz);
        std::vector<double> rel;
        for (double x : gt) {
            const double tau = x / gamma;
            const double b = channels::dephasing_bound(dz, tau, r * gamma, gamma);
            const double f = channels::dephasing_exact_fidelity(dz * dz, mz, tau, r * gamma, gamma);
            const double e = std::acos(std::sqrt(std::clamp(f, 0.0, 1.0)));
            rel.push_back((b - e) / e);
            table.add({dz, x, b, e, rel.back()});
        }
        char label[32];
        std::snprintf(label, sizeof label, "dZ = %.2f", dz);
        plot.series.push_back({label, gt, rel, false});
    }
    return {table, plot, {}};
}

inline Output tau_n_ghz(unsigned workers) {
    io::Table table{"figure-tauNGHZ", {"r", "n", "gamma_tau_bound", "gamma_tau_fit", "slope"}, {}};
    io::Plot plot{"GHZ time bound", "N", "gamma tau", true, true, {}, {}, {}};
    for (double r : {8.0, 40.0, 400.0}) {
        io::SweepConfig c;
        c.parameter = io::SweepParam::N;
        c.values = detail::log_integers(0, 4, 4);
        c.state = io::SweepState::Ghz;
        c.distance = kDistance;
        c.r = r;
        const auto rows = detail::sweep_rows(c, workers);
        std::vector<double> n;
        std::vector<double> tb;
        std::vector<double> fit;
        for (const auto& row : rows) {
            const double f = channels::ghz_time_bound_coeff(detail::sweep_spec(c, row.value), kDistance);
            table.add({r, row.value, row.tau_bound, f, detail::opt_cell(row.slope)});
            n.push_back(row.value);
            tb.push_back(row.tau_bound);
            fit.push_back(f);
        }
        char label[32];
        std::snprintf(label, sizeof label, "r = %g", r);
        plot.series.push_back({label, n, tb, false});
        plot.series.push_back({std::string(label) + " fit", n, fit, true});
    }
    return {table, plot, {}};
}

inline Output tau_n_sep_bound(unsigned workers) {
    const double r = 40.0;
    io::SweepConfig c;
    c.parameter = io::SweepParam::N;
    c.values = detail::log_integers(0, 6, 4);
    c.state = io::SweepState::Separable;
    c.distance = kDistance;
    c.r = r;
    const auto rows = detail::sweep_rows(c, workers);
    io::Table table{"figure-tauNsepbound",
                    {"n", "gamma_tau_bound", "asymptote_slow", "asymptote_fast", "slope"},
                    {}};
    std::vector<double> n;
    std::vector<double> tb;
    std::vector<double> slow;
    std::vector<double> fast;
    for (const auto& row : rows) {
        const auto spec = detail::sweep_spec(c, row.value);
        slow.push_back(channels::sep_time_asymptote_slow(spec, kDistance));
        fast.push_back(channels::sep_time_asymptote_fast(spec, kDistance));
        n.push_back(row.value);
        tb.push_back(row.tau_bound);
        table.add({row.value, row.tau_bound, slow.back(), fast.back(), detail::opt_cell(row.slope)});
    }
    io::Plot plot{"separable time bound, r = 40", "N", "gamma tau", true, true, {}, {}, {}};
    plot.series.push_back({"bound", n, tb, false});
    plot.series.push_back({"~ 1/sqrt(N)", n, slow, true});
    plot.series.push_back({"~ 1/N", n, fast, true});
    plot.vmarks.push_back({channels::sep_transition_n_bound(r, kDistance, 0.0), "transition"});
    return {table, plot, {}};
}

inline Output tau_n_sep(unsigned workers) {
    const double r = 40.0;
    io::SweepConfig c;
    c.parameter = io::SweepParam::N;
    c.values = detail::log_integers(0, 5, 4);
    c.state = io::SweepState::Separable;
    c.distance = kDistance;
    c.r = r;
    const auto rows = detail::sweep_rows(c, workers);
    io::Table table{"figure-tauNsep", {"n", "gamma_tau_bound", "gamma_tau_exact"}, {}};
    std::vector<double> n;
    std::vector<double> tb;
    std::vector<double> te;
    for (const auto& row : rows) {
        n.push_back(row.value);
        tb.push_back(row.tau_bound);
        te.push_back(row.tau_exact.value_or(detail::kInf));
        table.add({row.value, row.tau_bound, detail::opt_cell(row.tau_exact)});
    }
    io::Plot plot{"separable states, bound and exact, r = 40", "N", "gamma tau", true, true,
                  {}, {}, {}};
    plot.series.push_back({"bound", n, tb, false});
    plot.series.push_back({"exact", n, te, true});
    plot.vmarks.push_back({channels::sep_transition_n(r, kDistance), "transition"});
    return {table, plot, {}};
}

inline double mt_sqrt_floor(double de, double t) {
    const double x = de * t / hbar;
    return x <= pi / 2 ? std::cos(x) : 0.0;
}

inline Output medpre() {
    const double p2 = 0.25;
    const double omega = 1.0;
    const auto spec = bounds::three_level_spectrum(p2, omega);
    const double de = spec.stddev();
    const auto t = detail::linspace(0.0, pi, 181);
    io::Table table{"figure-medpre", {"omega_t", "sqrt_fidelity", "median_weak", "mt"}, {}};
    std::vector<double> ex;
    std::vector<double> weak;
    std::vector<double> mt;
    for (double x : t) {
        ex.push_back(bounds::three_level_exact_overlap(p2, x));
        weak.push_back(bounds::median_bound_weak(spec, x / omega));
        mt.push_back(mt_sqrt_floor(de, x / omega));
        table.add({x, ex.back(), weak.back(), mt.back()});
    }
    io::Plot plot{"median bound, p2 = 1/4", "omega t", "sqrt F", false, false, {}, {}, {}};
    plot.series.push_back({"exact", t, ex, false});
    plot.series.push_back({"median (weak)", t, weak, true});
    plot.series.push_back({"Mandelstam-Tamm", t, mt, true});
    plot.vmarks.push_back({pi / (omega * (1.0 + 4.0 * p2)), "tau_ML"});
    return {table, plot, {}};
}

inline Output medbom() {
    const double omega = 1.0;
    const auto t = detail::linspace(0.0, pi, 181);
    io::Table table{"figure-medbom", {"p2", "omega_t", "sqrt_fidelity", "median_strong", "mt"}, {}};
    io::Plot plot{"strong median bound", "omega t", "sqrt F", false, false, {}, {}, {}};
    for (double p2 : {0.1, 0.2, 0.35}) {
        const auto spec = bounds::three_level_spectrum(p2, omega);
        const double de = spec.stddev();
        std::vector<double> ex;
        std::vector<double> strong;
        std::vector<double> mt;
        for (double x : t) {
            ex.push_back(bounds::three_level_exact_overlap(p2, x));
            strong.push_back(bounds::three_level_strong_floor(p2, x));
            mt.push_back(mt_sqrt_floor(de, x / omega));
            table.add({p2, x, ex.back(), strong.back(), mt.back()});
        }
        char label[32];
        std::snprintf(label, sizeof label, "p2 = %.2f", p2);
        plot.series.push_back({std::string("exact, ") + label, t, ex, false});
        plot.series.push_back({std::string("median, ") + label, t, strong, true});
        plot.series.push_back({std::string("MT, ") + label, t, mt, true});
        plot.vmarks.push_back({pi / (1.0 + 4.0 * p2), std::string("tau_ML, ") + label});
    }
    return {table, plot, {}};
}

} // namespace figures

inline Output reproduce_figure(const std::string& id, unsigned workers = 0) {
    if (id == "grafbasico") {
        return figures::grafbasico(workers);
    }
    if (id == "grafintegral") {
        return figures::grafintegral();
    }
    if (id == "exclwindow") {
        return figures::exclwindow();
    }
    if (id == "dephgenplot") {
        return figures::dephgenplot();
    }
    if (id == "tauNGHZ") {
        return figures::tau_n_ghz(workers);
    }
    if (id == "tauNsepbound") {
        return figures::tau_n_sep_bound(workers);
    }
    if (id == "tauNsep") {
        return figures::tau_n_sep(workers);
    }
    if (id == "medpre") {
        return figures::medpre();
    }
    if (id == "medbom") {
        return figures::medbom();
    }
    std::string known;
    for (const auto& k : figure_ids()) {
        known += (known.empty() ? "" : ", ") + k;
    }
    throw unknown_figure("unknown figure id \"" + id + "\" (known: " + known + ")");
}

// ---- command line ----

namespace detail {

inline int fail(std::ostream& err, const char* stage, const std::string& msg, int code) {
    err << "qsl: error [" << stage << "]: " << msg << "\n";
    return code;
}

} // namespace detail

/// Entry point of the qsl tool. Writes CSV to --out (or the scenario's
/// output.csv, or `out`), and SVG when a path is given.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App cli{"Quantum speed limits: bounds, information, sweeps and figures", "qsl"};
    cli.require_subcommand(1);
    std::string config;
    std::string out_path;
    std::string svg_path;
    Options opt;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    std::string figure_id;
    std::vector<double> fidelities;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config, "scenario JSON file");
        if (needs_config) {
            c->required();
        }
        sub->add_option("--out", out_path, "CSV output path (default: stdout)");
        sub->add_option("--svg", svg_path, "SVG output path");
        sub->add_option("--tol", tol, "saturation tolerance (alpha: optimizer tolerance)");
        sub->add_option("--workers", workers, "worker threads, 0 for all cores");
        sub->add_option("--seed", seed, "seed for random initial states");
    };
    auto* bound = cli.add_subcommand("bound", "evaluate a speed-limit bound on a time grid");
    auto* qfi = cli.add_subcommand("qfi", "quantum Fisher information on a time grid");
    auto* sweep = cli.add_subcommand("sweep", "time bound over qubit number or r");
    auto* figure = cli.add_subcommand("figure", "regenerate a figure's data");
    auto* audit = cli.add_subcommand("audit", "saturation segments of a bound");
    auto* alpha = cli.add_subcommand("alpha", "tabulate alpha(F)");
    for (auto* s : {bound, qfi, sweep, audit}) {
        common(s, true);
    }
    common(figure, false);
    figure->add_option("id", figure_id, "figure id")->required();
    common(alpha, false);
    alpha->add_option("--fidelity", fidelities, "fidelities to tabulate (default 0, 0.05, ..., 0.95)");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return detail::fail(err, "parse", e.what(), kExitConfig);
    }
    opt.tol = tol;
    opt.seed = seed;
    opt.workers = workers;

    io::Scenario sc;
    if (!config.empty()) {
        try {
            sc = io::load_scenario(config);
        } catch (const io::config_error& e) {
            return detail::fail(err, "config", e.what(), kExitConfig);
        }
    }
    if (out_path.empty()) {
        out_path = sc.csv_path;
    }
    if (svg_path.empty()) {
        svg_path = sc.svg_path;
    }

    Output result;
    const char* stage = "compute";
    try {
        if (bound->parsed()) {
            result = run_bound(sc, opt);
        } else if (qfi->parsed()) {
            result = run_qfi(sc, opt);
        } else if (sweep->parsed()) {
            result = run_sweep(sc, opt);
        } else if (audit->parsed()) {
            result = run_audit(sc, opt);
        } else if (alpha->parsed()) {
            result = run_alpha(fidelities.empty() ? default_alpha_fidelities() : fidelities,
                               opt.tol.value_or(1e-6), opt.workers);
        } else {
            result = reproduce_figure(figure_id, opt.workers);
        }
        for (const auto& w : result.warnings) {
            err << "qsl: warning: " << w << "\n";
        }
        stage = "output";
        const std::string csv = io::to_csv(result.table);
        if (out_path.empty()) {
            out << csv;
        } else {
            io::write_file(out_path, csv);
        }
        if (!svg_path.empty()) {
            io::write_file(svg_path, io::render_svg(result.plot));
        }
    } catch (const io::config_error& e) {
        return detail::fail(err, "config", e.what(), kExitConfig);
    } catch (const std::exception& e) {
        return detail::fail(err, stage, e.what(), kExitNumeric);
    }
    return kExitOk;
}

} // namespace qsl::app
