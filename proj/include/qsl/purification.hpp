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
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsl/core.hpp"
#include "qsl/estimation.hpp"
#include "qsl/parallel.hpp"
#include "qsl/qstate.hpp"

namespace qsl::purification {

/// A joint unitary U(t) on S x E (joint index s * dE + e) together with the
/// initial joint pure state.
struct PurifiedEvolution {
    int dS = 1;
    int dE = 1;
    std::function<ComplexMatrix(double)> U;
    // Optional analytic dU/dt; a central difference is used otherwise.
    std::function<ComplexMatrix(double)> dU_dt;
    PureStateVector initial_joint;
    // Characteristic time of the evolution, sets the finite-difference step.
    double t_scale = 1.0;

    Eigen::Index joint_dim() const { return static_cast<Eigen::Index>(dS) * dE; }

    void validate() const {
        if (dS < 1 || dE < 1) {
            throw validation_error("PurifiedEvolution: dimensions must be positive");
        }
        if (!U) {
            throw validation_error("PurifiedEvolution: missing U(t)");
        }
        if (initial_joint.dim() != joint_dim()) {
            throw validation_error("PurifiedEvolution: initial state has wrong dimension");
        }
        if (!(t_scale > 0.0)) {
            throw validation_error("PurifiedEvolution: t_scale must be positive");
        }
    }

    double fd_step() const { return 1e-7 * t_scale; }

    ComplexMatrix derivative(double t) const {
        if (dU_dt) {
            return dU_dt(t);
        }
        const double h = fd_step();
        if (t - h < 0.0) {
            // One-sided second-order stencil; U may be undefined for t < 0.
            return (-3.0 * U(t) + 4.0 * U(t + h) - U(t + 2.0 * h)) / (2.0 * h);
        }
        return (U(t + h) - U(t - h)) / (2.0 * h);
    }

    ComplexVector evolved(double t) const { return U(t) * initial_joint.normalized(); }

    DensityOperator reduced_state(double t) const {
        return partial_trace(PureStateVector(evolved(t)), dS, dE, Keep::S);
    }

    /// d/dt Tr_E |psi(t)><psi(t)|.
    ComplexMatrix reduced_derivative(double t) const {
        const ComplexVector psi0 = initial_joint.normalized();
        const ComplexVector v = U(t) * psi0;
        const ComplexVector dv = derivative(t) * psi0;
        const ComplexMatrix joint = dv * v.adjoint() + v * dv.adjoint();
        return partial_trace_matrix(joint, dS, dE, Keep::S);
    }
};

/// Hermitian generators on E. A parameter vector theta selects the gauge
/// sum_k theta_k g_k, embedded as I_S (x) g.
struct GaugeFamily {
    std::vector<HermitianOperator> basis;
    std::string label;

    void validate(int dE) const {
        for (const auto& g : basis) {
            if (g.dim() != dE) {
                throw validation_error("GaugeFamily '" + label + "': generator does not act on E");
            }
        }
    }
};

struct CorrectedHamiltonian {
    HermitianOperator H;
    // Anti-Hermitian part removed by symmetrization; large values point to a
    // poor derivative.
    double residual = 0.0;
};

struct CqReport {
    double t = 0.0;
    double cq = 0.0;
    std::vector<double> optimal_theta;
    // lambda_max / lambda_min of the generator covariance; infinite when the
    // pseudo-inverse path was taken.
    double variance_matrix_condition = 1.0;
    double hamiltonian_residual = 0.0;
};

inline constexpr double kUnitaryTol = 1e-9;

namespace detail {

inline void require_unitary(const ComplexMatrix& u, double t) {
    const Eigen::Index n = u.rows();
    const double dev = (u.adjoint() * u - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(dev <= kUnitaryTol)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "non-unitary U at t = %.6g (deviation %.3g)", t, dev);
        throw validation_error(buf);
    }
}

} // namespace detail

/// i hbar U^dagger dU/dt, the generator referred back to the initial state.
inline CorrectedHamiltonian corrected_hamiltonian_with_residual(const PurifiedEvolution& evo,
                                                                double t) {
    evo.validate();
    const ComplexMatrix u = evo.U(t);
    if (u.rows() != evo.joint_dim() || u.cols() != evo.joint_dim()) {
        throw validation_error("corrected_hamiltonian: U has wrong dimension");
    }
    detail::require_unitary(u, t);
    const ComplexMatrix h = I * hbar * (u.adjoint() * evo.derivative(t));
    return {HermitianOperator::symmetrized(h), 0.5 * (h - h.adjoint()).cwiseAbs().maxCoeff()};
}

inline HermitianOperator corrected_hamiltonian(const PurifiedEvolution& evo, double t) {
    return corrected_hamiltonian_with_residual(evo, t).H;
}

/// 4 Var(H)/hbar^2 in the initial joint state, no gauge.
inline double cq_raw(const PurifiedEvolution& evo, double t) {
    const auto h = corrected_hamiltonian(evo, t);
    return 4.0 * variance(h, evo.initial_joint) / (hbar * hbar);
}

/// Minimizes 4 Var(H + U^dagger (I (x) sum_k theta_k g_k) U)/hbar^2 over theta.
/// The variance is a quadratic form in theta, so the minimizer solves the
/// normal equations of the generator covariance.
inline CqReport minimize_cq(const PurifiedEvolution& evo, const GaugeFamily& family, double t) {
    family.validate(evo.dE);
    const auto ch = corrected_hamiltonian_with_residual(evo, t);
    const ComplexMatrix u = evo.U(t);
    const ComplexVector psi = evo.initial_joint.normalized();
    const ComplexMatrix id_s = ComplexMatrix::Identity(evo.dS, evo.dS);

    const std::size_t k = family.basis.size();
    // Centered vectors (A - <A>) psi; covariances are real parts of overlaps.
    auto centered = [&](const ComplexMatrix& a) {
        const ComplexVector v = a * psi;
        return ComplexVector(v - psi.dot(v) * psi);
    };
    const ComplexVector w0 = centered(ch.H.matrix());
    std::vector<ComplexVector> w;
    w.reserve(k);
    for (const auto& g : family.basis) {
        w.push_back(centered(u.adjoint() * kron(id_s, g.matrix()) * u));
    }

    CqReport out;
    out.t = t;
    out.hamiltonian_residual = ch.residual;
    out.optimal_theta.assign(k, 0.0);
    if (k == 0) {
        out.cq = 4.0 * w0.squaredNorm() / (hbar * hbar);
        return out;
    }

    Eigen::MatrixXd cov(k, k);
    Eigen::VectorXd c(k);
    for (std::size_t a = 0; a < k; ++a) {
        c(a) = w0.dot(w[a]).real();
        for (std::size_t b = a; b < k; ++b) {
            cov(a, b) = cov(b, a) = w[a].dot(w[b]).real();
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lmax = std::max(lam.maxCoeff(), 0.0);
    const double cut = 1e-12 * std::max(lmax, std::numeric_limits<double>::min());
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(k);
    bool singular = false;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) > cut) {
            inv(i) = 1.0 / lam(i);
        } else {
            singular = true;
        }
    }
    out.variance_matrix_condition =
        singular ? std::numeric_limits<double>::infinity() : lmax / lam.minCoeff();
    const Eigen::VectorXd theta =
        -(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose()) * c;

    // Evaluate the variance directly at the optimum rather than through the
    // quadratic form, which would lose digits to cancellation.
    ComplexVector total = w0;
    for (std::size_t a = 0; a < k; ++a) {
        out.optimal_theta[a] = theta(a);
        total += theta(a) * w[a];
    }
    out.cq = 4.0 * total.squaredNorm() / (hbar * hbar);
    return out;
}

/// C_Q at an arbitrary gauge parameter, for checking the optimum.
inline double cq_at(const PurifiedEvolution& evo, const GaugeFamily& family, double t,
                    const std::vector<double>& theta) {
    family.validate(evo.dE);
    if (theta.size() != family.basis.size()) {
        throw validation_error("cq_at: theta length does not match the family");
    }
    const ComplexMatrix u = evo.U(t);
    const ComplexMatrix id_s = ComplexMatrix::Identity(evo.dS, evo.dS);
    ComplexMatrix gauge = ComplexMatrix::Zero(evo.dE, evo.dE);
    for (std::size_t a = 0; a < theta.size(); ++a) {
        gauge += theta[a] * family.basis[a].matrix();
    }
    const ComplexMatrix total =
        corrected_hamiltonian(evo, t).matrix() + u.adjoint() * kron(id_s, gauge) * u;
    return 4.0 * variance(HermitianOperator::symmetrized(total), evo.initial_joint) / (hbar * hbar);
}

// ---- gauge families ----

/// Traceless Hermitian basis of dimension d (generalized Gell-Mann matrices).
/// The identity is left out: it shifts the generator by a constant and never
/// changes the variance.
inline GaugeFamily full_hermitian_basis(int d) {
    if (d < 1) {
        throw validation_error("full_hermitian_basis: dimension must be positive");
    }
    GaugeFamily fam;
    fam.label = "full";
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            ComplexMatrix s = ComplexMatrix::Zero(d, d);
            s(j, k) = s(k, j) = 1.0;
            fam.basis.emplace_back(s);
            ComplexMatrix a = ComplexMatrix::Zero(d, d);
            a(j, k) = -I;
            a(k, j) = I;
            fam.basis.emplace_back(a);
        }
    }
    for (int l = 1; l < d; ++l) {
        ComplexMatrix z = ComplexMatrix::Zero(d, d);
        const double norm = std::sqrt(2.0 / (l * (l + 1.0)));
        for (int j = 0; j < l; ++j) {
            z(j, j) = norm;
        }
        z(l, l) = -l * norm;
        fam.basis.emplace_back(z);
    }
    return fam;
}

/// sum_j X_j, sum_j Y_j, sum_j Z_j on an n-qubit environment, in that order.
inline GaugeFamily collective_pauli_family(int n) {
    if (n < 1) {
        throw validation_error("collective_pauli_family: need at least one qubit");
    }
    const Eigen::Index d = Eigen::Index{1} << n;
    GaugeFamily fam;
    fam.label = "collective-xyz";
    for (const ComplexMatrix& p : {pauli_x(), pauli_y(), pauli_z()}) {
        ComplexMatrix acc = ComplexMatrix::Zero(d, d);
        for (int j = 0; j < n; ++j) {
            acc += on_qubit(p, j, n);
        }
        fam.basis.emplace_back(acc);
    }
    return fam;
}

// ---- dephasing closed form ----

/// Coefficients of hbar-scaled gauge alpha X + beta Y + delta Z (summed over
/// environment qubits) that minimize C_Q for N-qubit dephasing.
struct DephasingGauge {
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double q = 0.0;
};

/// Closed form for the collective X/Y/Z family. The sign of alpha refers to
/// the purification exp(-i omega0 t Z/2) exp(-i phi Z (x) Y) with the standard
/// Pauli Y and environment starting in |0>.
inline DephasingGauge dephasing_gauge_closed_form(double t, int n, double omega0, double gamma,
                                                  double mean_z, double var_z) {
    if (!(t > 0.0)) {
        throw domain_error("dephasing_gauge_closed_form: t must be positive");
    }
    if (n < 1 || !(gamma > 0.0) || !std::isfinite(omega0)) {
        throw validation_error("dephasing_gauge_closed_form: need N >= 1, gamma > 0");
    }
    if (!(var_z >= 0.0) || !(std::abs(mean_z) <= 1.0)) {
        throw validation_error("dephasing_gauge_closed_form: invalid Z moments");
    }
    DephasingGauge out;
    const double spread = 1.0 - mean_z * mean_z;
    out.q = spread > 1e-15 ? var_z / spread : 0.0;
    if (out.q > 1.0 + 1e-12) {
        throw validation_error("dephasing_gauge_closed_form: q must lie in [0, 1]");
    }
    out.q = std::min(out.q, 1.0);
    const double em1 = std::expm1(2.0 * gamma * t);
    const double eh = std::exp(gamma * t);
    const double nq = n * out.q;
    const double den = 1.0 + em1 * nq;
    out.beta = -(hbar * gamma / 2.0) * mean_z / std::sqrt(em1);
    out.alpha = -(hbar * omega0 / 2.0) * eh * std::sqrt(em1) * nq / den;
    out.delta = -(hbar * omega0 / 2.0) * eh * nq * mean_z / den;
    return out;
}

// ---- tightness ----

struct TightnessSample {
    double t = 0.0;
    double cq = 0.0;
    double qfi = 0.0;
};

struct TightnessReport {
    double max_gap = 0.0;
    std::vector<TightnessSample> samples;
};

/// Minimized C_Q over the full environment basis against the SLD value of the
/// reduced trajectory, per time.
inline TightnessReport tightness_check(const PurifiedEvolution& evo,
                                       const std::vector<double>& t_grid) {
    evo.validate();
    const GaugeFamily fam = full_hermitian_basis(evo.dE);
    TightnessReport out;
    out.samples = parallel_map(t_grid, [&](double t) {
        TightnessSample s;
        s.t = t;
        s.cq = minimize_cq(evo, fam, t).cq;
        s.qfi = estimation::solve_sld(evo.reduced_state(t), evo.reduced_derivative(t)).qfi;
        return s;
    });
    for (const auto& s : out.samples) {
        out.max_gap = std::max(out.max_gap, std::abs(s.cq - s.qfi));
    }
    return out;
}

} // namespace qsl::purification
