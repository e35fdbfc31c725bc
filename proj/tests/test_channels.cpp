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
#include "qsl/geometry.hpp"

using namespace qsl;
using namespace qsl::channels;

namespace {

ComplexVector qubit(double theta, double phi) {
    ComplexVector v(2);
    v << std::cos(theta / 2), std::exp(I * phi) * std::sin(theta / 2);
    return v;
}

DensityOperator pure(const ComplexVector& v) { return DensityOperator::from_pure(v); }

const DensityOperator kExcited = pure(qubit(pi, 0.0));
const DensityOperator kGround = pure(qubit(0.0, 0.0));
const DensityOperator kEquator = pure(qubit(pi / 2, 0.0));

double angle(double fidelity) { return std::acos(std::sqrt(std::clamp(fidelity, 0.0, 1.0))); }

ComplexVector ghz(int n) {
    ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << n);
    v(0) = v(v.size() - 1) = 1.0 / std::sqrt(2.0);
    return v;
}

ComplexVector equator_product(int n) {
    ComplexVector v = qubit(pi / 2, 0.0);
    for (int j = 1; j < n; ++j) {
        v = kron(v, qubit(pi / 2, 0.0));
    }
    return v;
}

// Single-qubit speed sqrt(r^2 e^{-2u} + 1/(e^{2u} - 1)) integrated over u.
constexpr double kR8HalfIntegral = 3.3515211498293827688;
constexpr double kR8FullIntegral = 8.2475287332311515287;
constexpr double kRCrit = 2.6005809140765965054;

} // namespace

// ---- amplitude damping ----

TEST(AmpDampState, UnitSurvivalIsIdentity) {
    Rng rng(1);
    const auto rho = random_density(2, 2, rng);
    EXPECT_LT((amp_damp_state(rho, 1.0).matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AmpDampState, ExcitedStateDecays) {
    const auto r = amp_damp_state(kExcited, 0.3).matrix();
    EXPECT_NEAR(r(0, 0).real(), 0.7, 1e-15);
    EXPECT_NEAR(r(1, 1).real(), 0.3, 1e-15);
    EXPECT_NEAR(std::abs(r(0, 1)), 0.0, 1e-15);
}

TEST(AmpDampState, TracePreservedAndErrors) {
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        const auto rho = random_density(2, 2, rng);
        EXPECT_NEAR(amp_damp_state(rho, 0.05 * k).matrix().trace().real(), 1.0, 1e-14);
    }
    EXPECT_THROW(amp_damp_state(kExcited, 1.2), validation_error);
    EXPECT_THROW(amp_damp_state(kExcited, -0.1), validation_error);
}

TEST(AmpDampBound, GroundStateNeverMoves) {
    const AmplitudeDamping ch{0.5, {}, {}, true};
    for (double tau : {0.0, 1.0, 10.0}) {
        EXPECT_EQ(amp_damp_bound(ch, kGround, tau).distance, 0.0);
    }
}

TEST(AmpDampBound, ExcitedStateIsSaturated) {
    const double g = 0.7;
    const AmplitudeDamping ch{g, {}, {}, true};
    const auto tr = amplitude_damping_trajectory(ch, kExcited);
    for (double tau : {0.01, 0.5, 2.0, 9.0}) {
        const double b = amp_damp_bound(ch, kExcited, tau).distance;
        EXPECT_NEAR(b, std::acos(std::exp(-g * tau / 2)), 1e-15);
        EXPECT_NEAR(b, geometry::bures_angle(tr.rho(0.0), tr.rho(tau)), 1e-8);
        EXPECT_NEAR(amp_damp_time_bound(g, 1.0, b), tau, 1e-9 * std::max(1.0, tau));
    }
    EXPECT_EQ(amp_damp_bound(ch, kExcited, 0.0).distance, 0.0);
}

TEST(AmpDampBound, NonMonotoneSurvivalIsIntegrated) {
    AmplitudeDamping ch;
    ch.P = [](double t) { return std::pow(std::cos(t), 2); };
    ch.dP = [](double t) { return -std::sin(2 * t); };
    ch.monotone = false;
    // arccos|cos t| rises to pi/2 and falls back; its total variation over
    // [0, 2] is 2 while the endpoint formula would give arccos|cos 2|.
    const auto b = amp_damp_bound(ch, kExcited, 2.0);
    EXPECT_TRUE(b.integrated);
    EXPECT_NEAR(b.distance, 2.0, 1e-8);
    ch.monotone = true;
    EXPECT_NEAR(amp_damp_bound(ch, kExcited, 2.0).distance, std::acos(std::abs(std::cos(2.0))), 1e-14);
}

TEST(AmpDampBound, TimeBoundUnreachable) {
    EXPECT_TRUE(std::isinf(amp_damp_time_bound(1.0, 0.25, 1.0)));
    EXPECT_EQ(amp_damp_time_bound(1.0, 0.25, 0.0), 0.0);
}

// ---- Jaynes-Cummings ----

TEST(JaynesCummings, FidelityExamples) {
    EXPECT_EQ(jaynes_cummings_fidelity(1.3, 0.0), 1.0);
    EXPECT_NEAR(jaynes_cummings_fidelity(2.0, pi / 4), 0.0, 1e-15);
    EXPECT_NEAR(jaynes_cummings_fidelity(1.0, pi / 4), 0.5, 1e-15);
    EXPECT_THROW(jaynes_cummings_fidelity(1.0, 2.0), domain_error);
}

TEST(JaynesCummings, TrajectoryMatchesClosedForm) {
    const double g = 1.7;
    const auto tr = jaynes_cummings_trajectory({g}, kExcited);
    for (int k = 0; k <= 20; ++k) {
        const double t = (pi / 2 / g) * k / 20.0;
        EXPECT_NEAR(geometry::bures_fidelity(tr.rho(0.0), tr.rho(t)), jaynes_cummings_fidelity(g, t),
                    1e-12);
        EXPECT_NEAR(tr.exact_fidelity(t), jaynes_cummings_fidelity(g, t), 1e-14);
    }
}

// ---- single-qubit dephasing ----

TEST(DephasingState, EigenstateIsUnchanged) {
    const auto r = dephasing_state(kGround, 3.0, 1.2, 0.4);
    EXPECT_LT((r.matrix() - kGround.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DephasingState, FullDecoherenceLimit) {
    const auto r = dephasing_state(kEquator, 60.0, 0.0, 1.0);
    EXPECT_LT((r.matrix() - 0.5 * ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DephasingState, MasterEquationConsistency) {
    Rng rng(6);
    const double w0 = 1.4, g = 0.6;
    for (int k = 0; k < 10; ++k) {
        const auto rho0 = random_density(2, 2, rng);
        const double t = 0.2 + 0.3 * k, h = 1e-5;
        const ComplexMatrix fd =
            (dephasing_state(rho0, t + h, w0, g).matrix() - dephasing_state(rho0, t - h, w0, g).matrix()) /
            (2 * h);
        const ComplexMatrix rhs = dephasing_generator(dephasing_state(rho0, t, w0, g).matrix(), w0, g);
        EXPECT_LT((fd - rhs).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(DephasingExactFidelity, Examples) {
    EXPECT_NEAR(dephasing_exact_fidelity(0.64, 0.6, 0.0, 2.0, 0.5), 1.0, 1e-15);
    EXPECT_EQ(dephasing_exact_fidelity(0.0, 1.0, 3.0, 2.0, 0.5), 1.0);
    for (double tau : {0.1, 1.0, 4.0}) {
        EXPECT_NEAR(dephasing_exact_fidelity(1.0, 0.0, tau, 0.0, 0.8), 0.5 * (1 + std::exp(-0.8 * tau)),
                    1e-15);
    }
    EXPECT_THROW(dephasing_exact_fidelity(0.5, 0.5, 1.0, 1.0, 1.0), validation_error);
}

TEST(DephasingExactFidelity, AgreesWithBuresFidelity) {
    const double w0 = 2.2, g = 0.3, theta = 1.0;
    const auto tr = dephasing_trajectory({w0, g}, pure(qubit(theta, 0.4)));
    const double mz = std::cos(theta);
    for (double tau : {0.0, 0.3, 1.1, 5.0}) {
        const double f = dephasing_exact_fidelity(1 - mz * mz, mz, tau, w0, g);
        EXPECT_NEAR(geometry::bures_fidelity(tr.rho(0.0), tr.rho(tau)), f, 1e-12);
        EXPECT_NEAR(tr.exact_fidelity(tau), f, 1e-14);
    }
}

TEST(DephasingBound, FrozenReferenceIntegrals) {
    EXPECT_NEAR(2 * dephasing_bound(1.0, 0.5, 8.0, 1.0), kR8HalfIntegral, 1e-11);
    EXPECT_NEAR(2 * dephasing_bound_infinity(1.0, 8.0), kR8FullIntegral, 1e-11);
    // Time and rates scale together.
    EXPECT_NEAR(2 * dephasing_bound(1.0, 0.25, 16.0, 2.0), kR8HalfIntegral, 1e-11);
}

TEST(DephasingBound, WeakDampingRecoversUnitaryBound) {
    const double w0 = 1.5, tau = 0.8, dz = 0.6;
    EXPECT_NEAR(dephasing_bound(dz, tau, w0, 1e-7), w0 * dz * tau / 2, 1e-6);
    EXPECT_EQ(dephasing_bound(dz, tau, w0, 0.0), w0 * dz * tau / 2);
}

TEST(DephasingBound, PureDephasingClosedForm) {
    for (double tau : {0.1, 1.0, 3.0}) {
        EXPECT_NEAR(dephasing_bound(0.8, tau, 0.0, 1.3), 0.4 * std::acos(std::exp(-1.3 * tau)), 1e-12);
        const double D = dephasing_bound(0.8, tau, 0.0, 1.3);
        EXPECT_NEAR(dephasing_time_bound_pure(0.8, D, 1.3), tau, 1e-9 * tau);
    }
    // Equator state: saturated, F_B = P(tau).
    const auto tr = dephasing_trajectory({0.0, 0.9}, kEquator);
    for (double tau : {0.2, 1.0, 2.5}) {
        EXPECT_NEAR(dephasing_bound(1.0, tau, 0.0, 0.9), geometry::bures_angle(tr.rho(0), tr.rho(tau)),
                    1e-10);
    }
    EXPECT_TRUE(std::isinf(dephasing_time_bound_pure(1.0, pi / 4, 1.0)));
}

TEST(DephasingBound, CriticalRatio) {
    EXPECT_NEAR(dephasing_r_crit(), kRCrit, 1e-10);
    EXPECT_LT(dephasing_bound_infinity(1.0, 2.5), pi / 2);
    EXPECT_GT(dephasing_bound_infinity(1.0, 2.7), pi / 2);
}

TEST(DephasingBound, NeverBelowExactAngle) {
    for (double r : {0.5, 2.0, 8.0}) {
        for (double theta : {0.4, 1.0, pi / 2}) {
            const double mz = std::cos(theta), dz = std::sin(theta);
            for (int k = 1; k <= 40; ++k) {
                const double tau = 0.1 * k;
                const double exact = angle(dephasing_exact_fidelity(dz * dz, mz, tau, r, 1.0));
                EXPECT_GE(dephasing_bound(dz, tau, r, 1.0), exact - 1e-12);
            }
        }
    }
}

TEST(DephasingBound, StaysCloseToExactBeforeFirstMinimum) {
    // r = 8, equator state: relative gap below 25% until the exact fidelity
    // reaches its first minimum.
    const double r = 8.0;
    double prev = 1.0;
    for (int k = 1; k < 2000; ++k) {
        const double tau = 1e-3 * k;
        const double f = dephasing_exact_fidelity(1.0, 0.0, tau, r, 1.0);
        if (f > prev) {
            break;
        }
        prev = f;
        const double exact = angle(f);
        EXPECT_LT((dephasing_bound(1.0, tau, r, 1.0) - exact) / exact, 0.25) << "tau=" << tau;
    }
}

// ---- purified consistency ----

TEST(Purified, PartialTraceReproducesChannel) {
    Rng rng(10);
    std::uniform_real_distribution<double> times(1e-3, 4.0);
    const ComplexVector psi = random_state(2, rng);
    const std::vector<ChannelTrajectory> catalog = {
        amplitude_damping_trajectory({0.9, {}, {}, true}, pure(psi)),
        jaynes_cummings_trajectory({1.1}, pure(psi)),
        dephasing_trajectory({1.3, 0.7}, pure(psi)),
    };
    for (const auto& tr : catalog) {
        ASSERT_TRUE(tr.purified.has_value()) << tr.label;
        for (int k = 0; k < 50; ++k) {
            const double t = times(rng);
            const auto red = tr.purified->reduced_state(t);
            EXPECT_LT((red.matrix() - tr.rho(t).matrix()).cwiseAbs().maxCoeff(), 1e-8) << tr.label;
            EXPECT_LT((tr.purified->reduced_derivative(t) - tr.drho(t)).cwiseAbs().maxCoeff(), 1e-8)
                << tr.label;
        }
    }
}

TEST(Purified, UnitaryAtTimeZero) {
    const auto tr = dephasing_trajectory({1.3, 0.7}, kEquator);
    EXPECT_LT((tr.purified->U(0.0) - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Purified, MixedInitialStateHasNoExchangePurification) {
    Rng rng(3);
    const auto tr = amplitude_damping_trajectory({0.5, {}, {}, true}, random_density(2, 2, rng));
    EXPECT_FALSE(tr.purified.has_value());
    EXPECT_FALSE(static_cast<bool>(tr.exact_fidelity));
}

TEST(Trajectory, DispatchOnKind) {
    const auto tr = make_trajectory({Dephasing{1.0, 0.5}, kEquator}, {0.1, 0.2});
    EXPECT_EQ(tr.label, "dephasing");
    EXPECT_EQ(tr.t_grid.size(), 2u);
    EXPECT_TRUE(tr.singular_at_zero);
    const auto jc = make_trajectory({JaynesCummings{1.0}, kExcited});
    EXPECT_FALSE(jc.singular_at_zero);
}

TEST(Trajectory, UnitaryChannelWithEnvelope) {
    Rng rng(14);
    const auto h = random_hermitian(3, rng);
    UnitaryChannel ch{h, [](double t) { return 1.0 + t; }, [](double t) { return t + 0.5 * t * t; }};
    const auto tr = unitary_trajectory(ch, pure(random_state(3, rng)));
    const double t = 0.7, d = 1e-6;
    const ComplexMatrix fd = (tr.rho(t + d).matrix() - tr.rho(t - d).matrix()) / (2 * d);
    EXPECT_LT((fd - tr.drho(t)).cwiseAbs().maxCoeff(), 1e-8);
    // Pure state: SLD value is 4 s(t)^2 Var(H0).
    EXPECT_NEAR(tr.qfi(t), 4 * std::pow(1.0 + t, 2) * variance(h, tr.rho(0.0)), 1e-9);
}

// ---- N-qubit dephasing ----

TEST(QParameter, Examples) {
    // GHZ: <Z/N> = 0, Var = 1.
    EXPECT_EQ(q_parameter(0.0, 1.0), 1.0);
    // Product of N equator states: Var(Z/N) = 1/N.
    EXPECT_NEAR(q_parameter(0.0, 1.0 / 7), 1.0 / 7, 1e-15);
    // |0101...>: no fluctuation of the collective Z.
    EXPECT_EQ(q_parameter(0.0, 0.0), 0.0);
    EXPECT_THROW(q_parameter(1.0, 0.0), domain_error);
}

TEST(NQubitCq, SingleQubitCollapse) {
    const double w0 = 1.3, g = 0.7, theta = 0.9;
    const double mz = std::cos(theta), var = 1 - mz * mz;
    for (double t : {0.05, 0.5, 2.0}) {
        const double single = var * (w0 * w0 * std::exp(-2 * g * t) + g * g / std::expm1(2 * g * t));
        EXPECT_NEAR(nqubit_cq_opt(t, {1, w0, g, mz, var}), single, 1e-10 * single);
    }
    const double dz = std::sqrt(var);
    EXPECT_NEAR(nqubit_distance_bound({1, w0, g, mz, var}, 1.4), dephasing_bound(dz, 1.4, w0, g), 1e-10);
}

TEST(NQubitCq, GhzAndSeparableIntegrands) {
    const double r = 8.0, g = 1.0;
    const int n = 50;
    for (double u : {0.01, 0.2, 1.0}) {
        const double e = std::expm1(2 * u);
        // 2 dD/du = sqrt(N) sqrt(r^2 N / (N (e^{2u} - 1) + 1) + 1/(e^{2u} - 1))
        const double ghz = std::sqrt(n) * std::sqrt(r * r * n / (n * e + 1) + 1 / e);
        EXPECT_NEAR(2 * std::sqrt(nqubit_cq_opt(u, {n, r, g, 0.0, 1.0}) / 4), ghz, 1e-10 * ghz);
        // sqrt(N) sqrt(1 - <Z>^2) sqrt(r^2 e^{-2u} + 1/(e^{2u} - 1))
        const double mz = 0.3;
        const double sep = std::sqrt(n) * std::sqrt(1 - mz * mz) * std::sqrt(r * r * std::exp(-2 * u) + 1 / e);
        EXPECT_NEAR(2 * std::sqrt(nqubit_cq_opt(u, {n, r, g, mz, (1 - mz * mz) / n}) / 4), sep,
                    1e-10 * sep);
    }
}

TEST(NQubitCq, SeparableBoundIsEllipticForm) {
    const double r = 40.0, mz = 0.2;
    const int n = 30;
    const double m = r * r / (r * r + 1);
    for (double tau : {0.01, 0.3, 2.0}) {
        const double expect = 0.5 * std::sqrt(n) * std::sqrt(1 - mz * mz) * std::sqrt(r * r + 1) *
                              (numerics::ellint_e(pi / 2, m) - numerics::ellint_e(std::asin(std::exp(-tau)), m));
        EXPECT_NEAR(nqubit_distance_bound({n, r, 1.0, mz, (1 - mz * mz) / n}, tau), expect, 1e-9);
    }
}

TEST(NQubitCq, QValidation) {
    EXPECT_THROW(nqubit_cq_opt(0.5, {2, 1.0, 1.0, 0.0, 1.5}), validation_error);
    EXPECT_THROW(nqubit_cq_opt(0.0, {2, 1.0, 1.0, 0.0, 0.5}), domain_error);
    const NQubitDephasing anti{4, 1.0, 1.0, 0.0, 0.0};
    EXPECT_TRUE(effective_q(anti).clamped);
    EXPECT_EQ(nqubit_cq_opt(0.5, anti), 0.0);
    EXPECT_FALSE(nqubit_time_bound(anti, 0.5).reachable);
    EXPECT_TRUE(nqubit_time_bound(anti, 0.5).q_clamped);
}

TEST(NQubitTimeBound, InvertsTheAccumulatedIntegral) {
    const NQubitDephasing s{20, 8.0, 1.0, 0.0, 1.0};
    const double D = std::acos(0.1);
    const auto tb = nqubit_time_bound(s, D);
    ASSERT_TRUE(tb.reachable);
    EXPECT_NEAR(nqubit_distance_bound(s, tb.tau), D, 1e-9);
    EXPECT_LT(nqubit_time_bound(s, 1e-6).tau, 1e-9);
    // Out of reach: pure dephasing of one qubit never exceeds pi/4.
    EXPECT_FALSE(nqubit_time_bound({1, 0.0, 1.0, 0.0, 1.0}, 1.0).reachable);
}

TEST(NQubitTimeBound, GhzRelaxationsAndFit) {
    const double D = std::acos(0.1);
    for (double r : {8.0, 40.0, 400.0}) {
        for (int n : {100, 10000}) {
            const NQubitDephasing s{n, r, 1.0, 0.0, 1.0};
            const double tau = nqubit_time_bound(s, D).tau;
            EXPECT_LE(ghz_time_bound_sec(s, D), tau);
            EXPECT_NEAR(ghz_time_bound_coeff(s, D) / tau, 1.0, 0.1) << "r=" << r << " N=" << n;
        }
    }
}

TEST(NQubitTimeBound, SeparableAsymptotes) {
    const double D = std::acos(0.1), r = 40.0;
    auto tau = [&](int n) { return nqubit_time_bound({n, r, 1.0, 0.0, 1.0 / n}, D).tau; };
    const NQubitDephasing big{1000000, r, 1.0, 0.0, 1e-6};
    EXPECT_NEAR(tau(1000000) / sep_time_asymptote_fast(big, D), 1.0, 0.01);
    const NQubitDephasing small{10, r, 1.0, 0.0, 0.1};
    EXPECT_NEAR(tau(10) / sep_time_asymptote_slow(small, D), 1.0, 0.05);
}

TEST(NQubitExact, GhzFidelity) {
    EXPECT_EQ(exact_ghz_fidelity(5, 0.0, 1.0, 1.0), 1.0);
    for (double tau : {0.1, 0.7}) {
        EXPECT_NEAR(exact_ghz_fidelity(1, tau, 2.0, 0.5), dephasing_exact_fidelity(1.0, 0.0, tau, 2.0, 0.5),
                    1e-15);
        EXPECT_NEAR(exact_ghz_fidelity(6, tau, 2.0, 0.5), exact_ghz_fidelity(12, tau / 2, 2.0, 0.5), 1e-14);
    }
}

TEST(NQubitExact, SeparableFidelityAndTransition) {
    EXPECT_EQ(exact_sep_fidelity(5, 0.0, 1.0, 1.0), 1.0);
    EXPECT_NEAR(exact_sep_fidelity(1, 0.4, 2.0, 0.5), dephasing_exact_fidelity(1.0, 0.0, 0.4, 2.0, 0.5),
                1e-15);
    const double D = 0.94 * pi / 2;
    EXPECT_NEAR(sep_transition_n(8.0, D), 63.0 * std::log(1.0 / std::cos(D)), 1e-12);
    EXPECT_NEAR(sep_transition_n_bound(8.0, D, 0.0), 64.0 * D * D, 1e-12);
}

TEST(NQubitExact, DenseStatesMatchAnalyticFormulas) {
    const double w0 = 1.7, g = 0.4;
    for (int n = 1; n <= 4; ++n) {
        const auto tg = nqubit_dephasing_dense_trajectory({n, w0, g}, pure(ghz(n)));
        const auto ts = nqubit_dephasing_dense_trajectory({n, w0, g}, pure(equator_product(n)));
        for (double tau : {0.1, 0.6, 1.5}) {
            EXPECT_NEAR(tg.exact_fidelity(tau), exact_ghz_fidelity(n, tau, w0, g), 1e-12);
            EXPECT_NEAR(ts.exact_fidelity(tau), exact_sep_fidelity(n, tau, w0, g), 1e-12);
            // The optimized C_Q bounds the information of the dense family.
            EXPECT_LE(tg.qfi(tau), nqubit_cq_opt(tau, {n, w0, g, 0.0, 1.0}) + 1e-8);
            EXPECT_LE(ts.qfi(tau), nqubit_cq_opt(tau, {n, w0, g, 0.0, 1.0 / n}) + 1e-8);
        }
    }
    EXPECT_THROW(nqubit_dephasing_state(pure(ghz(2)), 7, 0.1, 1.0, 1.0), validation_error);
}

TEST(NQubitExact, ExactAnglesRespectTheBound) {
    const double w0 = 8.0, g = 1.0;
    for (int n : {1, 4, 32, 256}) {
        const NQubitDephasing sg{n, w0, g, 0.0, 1.0};
        const NQubitDephasing ss{n, w0, g, 0.0, 1.0 / n};
        for (int k = 1; k <= 30; ++k) {
            const double tau = 0.02 * k / std::sqrt(static_cast<double>(n));
            EXPECT_GE(nqubit_distance_bound(sg, tau), angle(exact_ghz_fidelity(n, tau, w0, g)) - 1e-10);
            EXPECT_GE(nqubit_distance_bound(ss, tau), angle(exact_sep_fidelity(n, tau, w0, g)) - 1e-10);
        }
    }
}
