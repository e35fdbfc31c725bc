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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qsl/channels.hpp"
#include "qsl/purification.hpp"

using namespace qsl;
using namespace qsl::purification;

namespace {

ComplexVector qubit(double theta, double phi) {
    ComplexVector v(2);
    v << std::cos(theta / 2), std::exp(I * phi) * std::sin(theta / 2);
    return v;
}

DensityOperator pure(const ComplexVector& v) { return DensityOperator::from_pure(v); }

PurifiedEvolution constant_h(const HermitianOperator& h, const ComplexVector& psi) {
    PurifiedEvolution evo;
    evo.dS = static_cast<int>(h.dim());
    evo.dE = 1;
    evo.initial_joint = PureStateVector(psi);
    evo.U = [h](double t) { return herm_exp(h, -I * t / hbar); };
    evo.dU_dt = [h](double t) {
        return ComplexMatrix(-I / hbar * h.matrix() * herm_exp(h, -I * t / hbar));
    };
    return evo;
}

PurifiedEvolution dephasing_evo(const ComplexVector& psi, double w0, double g) {
    return *channels::dephasing_trajectory({w0, g}, pure(psi)).purified;
}

// N-qubit product of identical qubit states.
ComplexVector product_state(int n, const ComplexVector& one) {
    ComplexVector v = one;
    for (int j = 1; j < n; ++j) {
        v = kron(v, one);
    }
    return v;
}

// Moments of the collective Z/N in a dense N-qubit pure state.
std::pair<double, double> collective_moments(const ComplexVector& psi, int n) {
    double m1 = 0.0, m2 = 0.0;
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
        const double z = (n - 2.0 * std::popcount(static_cast<std::uint64_t>(k))) / n;
        m1 += std::norm(psi(k)) * z;
        m2 += std::norm(psi(k)) * z * z;
    }
    return {m1, m2 - m1 * m1};
}

double deltah_min_nq(double t, int n, double w0, double g, double mean, double var) {
    const double q = var / (1.0 - mean * mean);
    const double em1 = std::expm1(2.0 * g * t);
    return var * (w0 * w0 * n * n / (n * q * em1 + 1.0) + g * g * n / (q * em1));
}

} // namespace

// ---- corrected Hamiltonian and raw C_Q ----

TEST(CorrectedHamiltonian, ConstantHamiltonianIsReturnedUnchanged) {
    Rng rng(3);
    const auto h = random_hermitian(3, rng);
    const auto evo = constant_h(h, random_state(3, rng));
    for (double t : {0.0, 0.4, 2.5}) {
        EXPECT_LT((corrected_hamiltonian(evo, t).matrix() - h.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(CorrectedHamiltonian, AmplitudeDampingIsExchangeTimesAngleRate) {
    const double g = 0.9, t = 0.7;
    const auto tr = channels::amplitude_damping_trajectory({g, {}, {}, true}, pure(qubit(pi, 0)));
    const double dphi = 0.5 * g / std::sqrt(std::expm1(g * t));
    const ComplexMatrix expect = hbar * dphi * channels::detail::exchange_generator();
    EXPECT_LT((corrected_hamiltonian(*tr.purified, t).matrix() - expect).cwiseAbs().maxCoeff(), 1e-12);
    // 4 <sigma+ sigma-> (d arccos sqrt P / dt)^2 with <sigma+ sigma-> = 1
    EXPECT_NEAR(cq_raw(*tr.purified, t), 4.0 * dphi * dphi, 1e-12);
}

TEST(CorrectedHamiltonian, DephasingCoefficient) {
    const double w0 = 1.3, g = 0.7, t = 0.45;
    const auto evo = dephasing_evo(qubit(1.1, 0.3), w0, g);
    const ComplexMatrix expect =
        hbar * (0.5 * w0 * kron(pauli_z(), ComplexMatrix::Identity(2, 2)) +
                (0.5 * g / std::sqrt(std::expm1(2 * g * t))) * kron(pauli_z(), pauli_y()));
    EXPECT_LT((corrected_hamiltonian(evo, t).matrix() - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CorrectedHamiltonian, ExpectationMatchesEvolvedFrameGenerator) {
    Rng rng(8);
    const auto evo = dephasing_evo(random_state(2, rng), 0.8, 0.5);
    const double t = 0.9;
    const ComplexMatrix u = evo.U(t);
    const HermitianOperator h_lab =
        HermitianOperator::symmetrized(I * hbar * evo.dU_dt(t) * u.adjoint());
    const PureStateVector evolved(evo.evolved(t));
    EXPECT_NEAR(expectation(corrected_hamiltonian(evo, t), evo.initial_joint),
                expectation(h_lab, evolved), 1e-12);
}

TEST(CqRaw, FrozenEvolutionIsZero) {
    Rng rng(1);
    PurifiedEvolution evo;
    evo.dS = 2;
    evo.dE = 2;
    evo.initial_joint = PureStateVector(random_state(4, rng));
    evo.U = [](double) { return ComplexMatrix(ComplexMatrix::Identity(4, 4)); };
    evo.dU_dt = [](double) { return ComplexMatrix(ComplexMatrix::Zero(4, 4)); };
    EXPECT_EQ(cq_raw(evo, 1.0), 0.0);
}

TEST(CqRaw, UnoptimizedDephasing) {
    const double w0 = 1.3, g = 0.7, t = 0.8;
    const ComplexVector psi = qubit(0.9, 0.2);
    const double mz = std::cos(0.9);
    const double var = 1.0 - mz * mz;
    const double expect = 4.0 * (w0 * w0 * var / 4.0 + (g * g / 4.0) / std::expm1(2 * g * t));
    EXPECT_NEAR(cq_raw(dephasing_evo(psi, w0, g), t), expect, 1e-12);
}

TEST(CqRaw, NonUnitaryIsRejected) {
    PurifiedEvolution evo;
    evo.dS = 2;
    evo.dE = 1;
    evo.initial_joint = PureStateVector(qubit(1.0, 0.0));
    evo.U = [](double) { return ComplexMatrix(1.01 * ComplexMatrix::Identity(2, 2)); };
    evo.dU_dt = [](double) { return ComplexMatrix(ComplexMatrix::Zero(2, 2)); };
    EXPECT_THROW(cq_raw(evo, 0.3), validation_error);
}

TEST(CqRaw, DephasingGeneratorDivergesAtZero) {
    EXPECT_THROW(cq_raw(dephasing_evo(qubit(1.0, 0.0), 1.0, 0.5), 0.0), domain_error);
}

TEST(CqRaw, FiniteDifferenceFallbackReportsSmallResidual) {
    auto evo = dephasing_evo(qubit(1.2, 0.4), 1.1, 0.6);
    const double t = 0.7;
    const double exact = cq_raw(evo, t);
    evo.dU_dt = nullptr;
    const auto ch = corrected_hamiltonian_with_residual(evo, t);
    EXPECT_LT(ch.residual, 1e-7);
    EXPECT_NEAR(cq_raw(evo, t), exact, 1e-6);
}

// ---- gauge minimization ----

TEST(MinimizeCq, EmptyFamilyIsRaw) {
    const auto evo = dephasing_evo(qubit(0.7, 0.1), 1.3, 0.7);
    const auto rep = minimize_cq(evo, GaugeFamily{{}, "none"}, 0.6);
    EXPECT_NEAR(rep.cq, cq_raw(evo, 0.6), 1e-12);
    EXPECT_TRUE(rep.optimal_theta.empty());
}

TEST(MinimizeCq, SingleQubitDephasingMatchesClosedForm) {
    const double w0 = 1.3, g = 0.7;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> th(0.2, pi - 0.2), ph(0.0, 2 * pi), tt(0.05, 2.0);
    const auto fam = collective_pauli_family(1);
    for (int trial = 0; trial < 10; ++trial) {
        const double theta = th(rng), t = tt(rng);
        const auto evo = dephasing_evo(qubit(theta, ph(rng)), w0, g);
        const auto rep = minimize_cq(evo, fam, t);
        const double mz = std::cos(theta);
        const double var = 1.0 - mz * mz;
        // dZ^2 (omega0^2 e^{-2 gamma t} + gamma^2 / (e^{2 gamma t} - 1))
        const double expect = var * (w0 * w0 * std::exp(-2 * g * t) + g * g / std::expm1(2 * g * t));
        EXPECT_NEAR(rep.cq, expect, 1e-9 * std::max(1.0, expect));
        const auto cf = dephasing_gauge_closed_form(t, 1, w0, g, mz, var);
        EXPECT_NEAR(rep.optimal_theta[0], cf.alpha, 1e-8);
        EXPECT_NEAR(rep.optimal_theta[1], cf.beta, 1e-8);
        EXPECT_NEAR(rep.optimal_theta[2], cf.delta, 1e-8);
    }
}

TEST(MinimizeCq, EquatorStateReproducesClosedForm) {
    const double w0 = 2.0, g = 0.4, t = 0.9;
    const auto evo = dephasing_evo(qubit(pi / 2, 0.0), w0, g);
    const auto rep = minimize_cq(evo, collective_pauli_family(1), t);
    const auto cf = dephasing_gauge_closed_form(t, 1, w0, g, 0.0, 1.0);
    EXPECT_NEAR(cf.q, 1.0, 1e-15);
    EXPECT_NEAR(rep.optimal_theta[0], cf.alpha, 1e-8);
    EXPECT_NEAR(rep.optimal_theta[1], cf.beta, 1e-8);
    EXPECT_NEAR(rep.optimal_theta[2], cf.delta, 1e-8);
}

TEST(MinimizeCq, CollectiveFamilyOnSeveralQubits) {
    const double w0 = 1.1, g = 0.6;
    Rng rng(5);
    for (int n = 2; n <= 3; ++n) {
        for (int trial = 0; trial < 2; ++trial) {
            const ComplexVector psi = random_state(Eigen::Index{1} << n, rng);
            const auto tr = channels::nqubit_dephasing_dense_trajectory({n, w0, g}, pure(psi));
            const auto [mean, var] = collective_moments(psi, n);
            const double t = 0.3 + 0.4 * trial;
            const auto rep = minimize_cq(*tr.purified, collective_pauli_family(n), t);
            const double expect = deltah_min_nq(t, n, w0, g, mean, var);
            EXPECT_NEAR(rep.cq, expect, 1e-9 * expect) << "N=" << n;
            const auto cf = dephasing_gauge_closed_form(t, n, w0, g, mean, var);
            EXPECT_NEAR(rep.optimal_theta[0], cf.alpha, 1e-8);
            EXPECT_NEAR(rep.optimal_theta[1], cf.beta, 1e-8);
            EXPECT_NEAR(rep.optimal_theta[2], cf.delta, 1e-8);
        }
    }
}

TEST(MinimizeCq, FrozenDenseRegression) {
    // Two-qubit state with uneven weights, t = 0.8, omega0 = 1.3, gamma = 0.7.
    ComplexVector psi(4);
    psi << 0.6, cplx(0.2, 0.3), cplx(-0.1, 0.4), 0.5;
    psi.normalize();
    const auto tr = channels::nqubit_dephasing_dense_trajectory({2, 1.3, 0.7}, pure(psi));
    const auto rep = minimize_cq(*tr.purified, collective_pauli_family(2), 0.8);
    const auto [mean, var] = collective_moments(psi, 2);
    EXPECT_NEAR(rep.cq, deltah_min_nq(0.8, 2, 1.3, 0.7, mean, var), 1e-10);
    EXPECT_GT(rep.cq, 0.0);
}

TEST(MinimizeCq, PerturbingTheOptimumNeverLowersCq) {
    Rng rng(21);
    const auto tr = channels::nqubit_dephasing_dense_trajectory({2, 0.9, 0.8},
                                                                pure(random_state(4, rng)));
    const auto fam = collective_pauli_family(2);
    const double t = 0.5;
    const auto rep = minimize_cq(*tr.purified, fam, t);
    EXPECT_NEAR(cq_at(*tr.purified, fam, t, rep.optimal_theta), rep.cq, 1e-10);
    for (std::size_t k = 0; k < fam.basis.size(); ++k) {
        for (double d : {-1e-4, 1e-4}) {
            auto th = rep.optimal_theta;
            th[k] += d;
            EXPECT_GE(cq_at(*tr.purified, fam, t, th), rep.cq - 1e-12);
        }
    }
}

TEST(MinimizeCq, SingularCovarianceTakesPseudoInverse) {
    // A repeated generator makes the covariance singular.
    const auto evo = dephasing_evo(qubit(1.0, 0.5), 1.0, 0.5);
    GaugeFamily fam = collective_pauli_family(1);
    fam.basis.push_back(fam.basis[0]);
    const auto rep = minimize_cq(evo, fam, 0.7);
    EXPECT_TRUE(std::isinf(rep.variance_matrix_condition));
    EXPECT_NEAR(rep.cq, minimize_cq(evo, collective_pauli_family(1), 0.7).cq, 1e-10);
}

TEST(MinimizeCq, UpperBoundsTheQuantumFisherInformation) {
    Rng rng(31);
    const auto fam = collective_pauli_family(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto tr = channels::dephasing_trajectory({1.5, 0.5}, pure(random_state(2, rng)));
        const double t = 0.1 + 0.1 * trial;
        EXPECT_GE(minimize_cq(*tr.purified, fam, t).cq, tr.qfi(t) - 1e-8);
        EXPECT_GE(cq_raw(*tr.purified, t), tr.qfi(t) - 1e-8);
    }
}

TEST(MinimizeCq, MixedUnitaryCanonicalPurification) {
    Rng rng(12);
    const auto rho = random_density(3, 3, rng);
    const auto h = random_hermitian(3, rng);
    const auto tr = channels::unitary_trajectory({h, {}, {}}, rho);
    const double t = 0.6;
    // Without a gauge the canonical purification gives 4 Var_rho(H).
    const auto raw = minimize_cq(*tr.purified, GaugeFamily{{}, "none"}, t);
    EXPECT_NEAR(raw.cq, 4.0 * variance(h, rho) / (hbar * hbar), 1e-10);
    // The full environment gauge reaches the SLD value, which for a mixed
    // state lies below 4 Var_rho(H).
    const auto full = minimize_cq(*tr.purified, full_hermitian_basis(3), t);
    EXPECT_NEAR(full.cq, tr.qfi(t), 1e-8);
    EXPECT_LE(full.cq, raw.cq + 1e-10);
}

TEST(MinimizeCq, MixedCommutingStateHasZeroInformation) {
    ComplexMatrix r = ComplexMatrix::Zero(2, 2);
    r(0, 0) = 0.3;
    r(1, 1) = 0.7;
    const HermitianOperator h(0.5 * pauli_z());
    const auto tr = channels::unitary_trajectory({h, {}, {}}, DensityOperator(r));
    EXPECT_NEAR(minimize_cq(*tr.purified, GaugeFamily{{}, "none"}, 1.0).cq, 4 * 0.21, 1e-12);
    EXPECT_NEAR(minimize_cq(*tr.purified, full_hermitian_basis(2), 1.0).cq, 0.0, 1e-12);
}

TEST(GaugeFamily, GaugeLeavesTheReducedStateUnchanged) {
    Rng rng(4);
    const auto evo = dephasing_evo(random_state(2, rng), 1.2, 0.3);
    const auto fam = full_hermitian_basis(2);
    for (double t : {0.2, 1.0, 3.0}) {
        const ComplexVector psi = evo.evolved(t);
        for (const auto& g : fam.basis) {
            const ComplexMatrix v = kron(ComplexMatrix(ComplexMatrix::Identity(2, 2)),
                                         herm_exp(g, -I * 0.37));
            const auto a = partial_trace(PureStateVector(psi), 2, 2, Keep::S);
            const auto b = partial_trace(PureStateVector(ComplexVector(v * psi)), 2, 2, Keep::S);
            EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(GaugeFamily, FullBasisIsTracelessAndComplete) {
    EXPECT_TRUE(full_hermitian_basis(1).basis.empty());
    for (int d = 2; d <= 4; ++d) {
        const auto fam = full_hermitian_basis(d);
        ASSERT_EQ(static_cast<int>(fam.basis.size()), d * d - 1);
        Eigen::MatrixXcd gram(d * d - 1, d * d - 1);
        for (int a = 0; a < d * d - 1; ++a) {
            EXPECT_NEAR(std::abs(fam.basis[a].matrix().trace()), 0.0, 1e-14);
            for (int b = 0; b < d * d - 1; ++b) {
                gram(a, b) = (fam.basis[a].matrix() * fam.basis[b].matrix()).trace();
            }
        }
        EXPECT_LT((gram - 2.0 * Eigen::MatrixXcd::Identity(d * d - 1, d * d - 1)).cwiseAbs().maxCoeff(),
                  1e-12);
    }
}

TEST(GaugeFamily, WrongDimensionIsRejected) {
    const auto evo = dephasing_evo(qubit(1.0, 0.0), 1.0, 0.5);
    EXPECT_THROW(minimize_cq(evo, full_hermitian_basis(3), 0.5), validation_error);
}

// ---- dephasing closed form ----

TEST(DephasingClosedForm, ZeroMeanHasNoBetaOrDelta) {
    const auto cf = dephasing_gauge_closed_form(0.4, 3, 1.2, 0.8, 0.0, 1.0 / 3.0);
    EXPECT_EQ(cf.beta, 0.0);
    EXPECT_EQ(cf.delta, 0.0);
    EXPECT_LT(cf.alpha, 0.0);
}

TEST(DephasingClosedForm, MagnitudesOfPrintedCoefficients) {
    // |alpha| = (omega0/2) e^{gamma t} sqrt(e^{2 gamma t} - 1) N q / (1 + (e^{2 gamma t} - 1) N q)
    const double t = 0.3, w0 = 2.0, g = 0.5, mz = 0.4, var = 0.5;
    const int n = 2;
    const auto cf = dephasing_gauge_closed_form(t, n, w0, g, mz, var);
    const double q = var / (1 - mz * mz), e = std::exp(2 * g * t);
    EXPECT_NEAR(std::abs(cf.alpha),
                (w0 / 2) * std::exp(g * t) * std::sqrt(e - 1) * n * q / (1 + (e - 1) * n * q), 1e-14);
    EXPECT_NEAR(cf.beta, -(g / 2) * mz / std::sqrt(e - 1), 1e-14);
}

TEST(DephasingClosedForm, Errors) {
    EXPECT_THROW(dephasing_gauge_closed_form(0.0, 1, 1.0, 1.0, 0.0, 1.0), domain_error);
    EXPECT_THROW(dephasing_gauge_closed_form(-1.0, 1, 1.0, 1.0, 0.0, 1.0), domain_error);
    EXPECT_THROW(dephasing_gauge_closed_form(1.0, 1, 1.0, 1.0, 0.0, -0.1), validation_error);
    EXPECT_THROW(dephasing_gauge_closed_form(1.0, 1, 1.0, 1.0, 0.5, 0.9), validation_error);
}

TEST(DephasingClosedForm, SymmetricSeparableFourQubits) {
    // Product of four identical qubits: q = 1/4. The closed-form gauge
    // reproduces the optimal C_Q when substituted into the variance.
    const double w0 = 1.4, g = 0.5, t = 0.35, theta = 1.1;
    const int n = 4;
    const ComplexVector psi = product_state(n, qubit(theta, 0.3));
    const auto [mean, var] = collective_moments(psi, n);
    EXPECT_NEAR(var / (1 - mean * mean), 0.25, 1e-12);
    const auto tr = channels::nqubit_dephasing_dense_trajectory({n, w0, g}, pure(psi));
    const auto cf = dephasing_gauge_closed_form(t, n, w0, g, mean, var);
    const double cq = cq_at(*tr.purified, collective_pauli_family(n), t, {cf.alpha, cf.beta, cf.delta});
    EXPECT_NEAR(cq, deltah_min_nq(t, n, w0, g, mean, var), 1e-9);
}

// ---- tightness ----

TEST(Tightness, AmplitudeDampingRawPurificationIsOptimal) {
    const auto tr = channels::amplitude_damping_trajectory({0.8, {}, {}, true}, pure(qubit(pi, 0)));
    const auto rep = tightness_check(*tr.purified, {0.1, 0.5, 1.0, 2.0, 4.0});
    EXPECT_LT(rep.max_gap, 1e-8);
    for (const auto& s : rep.samples) {
        EXPECT_NEAR(cq_raw(*tr.purified, s.t), s.qfi, 1e-8 * std::max(1.0, s.qfi));
    }
}

TEST(Tightness, SingleQubitDephasing) {
    const double w0 = 1.3, g = 0.7, theta = 0.8;
    const auto evo = dephasing_evo(qubit(theta, 1.0), w0, g);
    const auto rep = tightness_check(evo, {0.05, 0.3, 0.9, 2.0});
    EXPECT_LT(rep.max_gap, 1e-8);
    const double var = std::pow(std::sin(theta), 2);
    for (const auto& s : rep.samples) {
        EXPECT_NEAR(s.cq, var * (w0 * w0 * std::exp(-2 * g * s.t) + g * g / std::expm1(2 * g * s.t)),
                    1e-8);
    }
}

TEST(Tightness, RandomJointUnitary) {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        const auto h = random_hermitian(4, rng);
        const ComplexVector psi = kron(random_state(2, rng), basis_ket(2, 0));
        PurifiedEvolution evo = constant_h(h, psi);
        evo.dS = 2;
        evo.dE = 2;
        const auto rep = tightness_check(evo, {0.3, 0.8, 1.7});
        EXPECT_LT(rep.max_gap, 1e-6);
    }
}
