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
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qsl/core.hpp"
#include "qsl/geometry.hpp"
#include "qsl/numerics.hpp"
#include "qsl/qstate.hpp"

namespace qsl::estimation {

/// Central-difference step used when no analytic derivative is supplied.
inline double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

// ---- classical Fisher information ----

struct ParamProbModel {
    std::function<std::vector<double>(double)> prob;
    // Optional analytic dP/dx.
    std::function<std::vector<double>(double)> dprob;

    std::vector<double> derivative(double x) const {
        if (dprob) {
            return dprob(x);
        }
        const double h = fd_step(x);
        const auto up = prob(x + h);
        const auto dn = prob(x - h);
        std::vector<double> d(up.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] = (up[k] - dn[k]) / (2.0 * h);
        }
        return d;
    }
};

struct FisherInfo {
    double value = 0.0;
    // An outcome with vanishing probability has a non-vanishing derivative;
    // that term was dropped and the true information may be larger.
    bool singular = false;
};

inline constexpr double kProbFloor = 1e-14;
inline constexpr double kDerivFloor = 1e-12;

/// sum_k (dP_k)^2 / P_k for given outcome probabilities and derivatives.
inline FisherInfo fisher_sum(std::span<const double> p, std::span<const double> dp) {
    if (p.size() != dp.size()) {
        throw validation_error("classical_fisher: derivative length mismatch");
    }
    FisherInfo out;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < kProbFloor) {
            if (std::abs(dp[k]) >= kDerivFloor) {
                out.singular = true;
            }
            continue;
        }
        out.value += dp[k] * dp[k] / p[k];
    }
    return out;
}

inline FisherInfo classical_fisher(const ParamProbModel& model, double x) {
    const auto p = model.prob(x);
    double total = 0.0;
    for (double v : p) {
        if (!(v >= -1e-15) || !std::isfinite(v)) {
            throw validation_error("classical_fisher: negative or non-finite probability");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw validation_error("classical_fisher: probabilities sum to " + std::to_string(total));
    }
    const auto dp = model.derivative(x);
    return fisher_sum(p, dp);
}

struct ExpansionCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// (D_H(x, x+dx)^2, F(x) dx^2 / 8); the two agree to O(dx^3).
inline ExpansionCheck hellinger_rate_check(const ParamProbModel& model, double x, double dx) {
    const double d = geometry::hellinger_distance(model.prob(x), model.prob(x + dx));
    return {d * d, classical_fisher(model, x).value * dx * dx / 8.0};
}

// ---- quantum Fisher information ----

struct StateFamily {
    std::function<DensityOperator(double)> rho;
    // Optional analytic d rho / dx.
    std::function<ComplexMatrix(double)> drho;

    ComplexMatrix derivative(double x) const {
        if (drho) {
            return drho(x);
        }
        const double h = fd_step(x);
        return (rho(x + h).matrix() - rho(x - h).matrix()) / (2.0 * h);
    }
};

struct SLDResult {
    HermitianOperator L;
    int support_rank = 0;
    double qfi = 0.0;
    // max |(rho L + L rho)/2 - d rho| over matrix elements on the support.
    double residual = 0.0;
};

inline constexpr double kSupportEps = 1e-10;
// With an analytic derivative the matrix elements carry only rounding error,
// so much smaller eigenvalue pairs can be kept.
inline constexpr double kAnalyticSupportEps = 1e-14;

/// Symmetric logarithmic derivative from the eigenbasis of rho:
/// L_ij = 2 (d rho)_ij / (lambda_i + lambda_j), zero where the sum is below
/// the support cutoff. qfi = Tr(rho L^2).
inline SLDResult solve_sld(const DensityOperator& rho, const ComplexMatrix& drho,
                           double support_eps = kSupportEps) {
    if (drho.rows() != rho.dim() || drho.cols() != rho.dim()) {
        throw validation_error("solve_sld: derivative dimension mismatch");
    }
    if (std::abs(drho.trace()) > 1e-9) {
        throw validation_error("solve_sld: derivative of rho is not traceless");
    }
    const auto ed = eig_hermitian(HermitianOperator(rho.matrix()));
    const ComplexMatrix d = ed.vectors.adjoint() * (0.5 * (drho + drho.adjoint())) * ed.vectors;
    const Eigen::Index n = rho.dim();
    ComplexMatrix l = ComplexMatrix::Zero(n, n);
    SLDResult out;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (ed.values(i) > support_eps) {
            ++out.support_rank;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = ed.values(i) + ed.values(j);
            if (s > support_eps) {
                l(i, j) = 2.0 * d(i, j) / s;
                const cplx back = 0.5 * s * l(i, j) - d(i, j);
                out.residual = std::max(out.residual, std::abs(back));
            }
        }
    }
    const ComplexMatrix lfull = ed.vectors * l * ed.vectors.adjoint();
    out.L = HermitianOperator::symmetrized(lfull);
    out.qfi = std::max(0.0, (rho.matrix() * out.L.matrix() * out.L.matrix()).trace().real());
    return out;
}

inline SLDResult solve_sld(const StateFamily& family, double x) {
    return solve_sld(family.rho(x), family.derivative(x));
}

/// (1 - F_B(rho(x), rho(x+dx)), qfi dx^2 / 4); the two agree to O(dx^3).
inline ExpansionCheck fidelity_expansion_check(const StateFamily& family, double x, double dx) {
    const double f = geometry::bures_fidelity(family.rho(x), family.rho(x + dx));
    return {1.0 - f, solve_sld(family, x).qfi * dx * dx / 4.0};
}

// ---- measurement oracle ----

namespace detail {

inline std::array<double, 3> bloch(const ComplexMatrix& m) {
    return {(m * pauli_x()).trace().real(), (m * pauli_y()).trace().real(),
            (m * pauli_z()).trace().real()};
}

inline std::array<double, 3> direction(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

} // namespace detail

/// Largest classical Fisher information among projective qubit measurements,
/// searched on a grid x grid lattice of Bloch directions and refined by
/// coordinate-wise Brent steps. A lower bound on the quantum value.
inline double qfi_measurement_oracle(const StateFamily& family, double x, int grid) {
    const DensityOperator rho = family.rho(x);
    if (rho.dim() != 2) {
        throw validation_error("qfi_measurement_oracle: qubit families only");
    }
    if (grid < 2) {
        throw validation_error("qfi_measurement_oracle: grid must be >= 2");
    }
    const auto r = detail::bloch(rho.matrix());
    const auto dr = detail::bloch(family.derivative(x));

    auto fisher = [&](double theta, double phi) {
        const auto n = detail::direction(theta, phi);
        const double nr = detail::dot3(n, r);
        const double ndr = detail::dot3(n, dr);
        const std::array<double, 2> p{0.5 * (1.0 + nr), 0.5 * (1.0 - nr)};
        const std::array<double, 2> dp{0.5 * ndr, -0.5 * ndr};
        return fisher_sum(p, dp).value;
    };

    double best = -1.0;
    double bt = 0.0;
    double bp = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double theta = pi * (i + 0.5) / grid;
        for (int j = 0; j < grid; ++j) {
            const double phi = 2.0 * pi * j / grid;
            const double f = fisher(theta, phi);
            if (f > best) {
                best = f;
                bt = theta;
                bp = phi;
            }
        }
    }
    double dt = pi / grid;
    double dphi = 2.0 * pi / grid;
    for (int sweep = 0; sweep < 4; ++sweep) {
        const auto mt = numerics::minimize_scalar([&](double t) { return -fisher(t, bp); },
                                                  bt - dt, bt + dt);
        if (-mt.value > best) {
            best = -mt.value;
            bt = mt.x;
        }
        const auto mp = numerics::minimize_scalar([&](double p) { return -fisher(bt, p); },
                                                  bp - dphi, bp + dphi);
        if (-mp.value > best) {
            best = -mp.value;
            bp = mp.x;
        }
        dt *= 0.5;
        dphi *= 0.5;
    }
    return std::max(best, 0.0);
}

} // namespace qsl::estimation
