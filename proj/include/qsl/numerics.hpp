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
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "qsl/core.hpp"

namespace qsl::numerics {

// ---- quadrature ----

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_depth = 20;
    // Integrand may diverge integrably (like 1/sqrt(t - a)) at the left end.
    bool singular_left_endpoint = false;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
            throw validation_error("QuadratureSpec: tolerances must be positive");
        }
        if (max_depth < 1) {
            throw validation_error("QuadratureSpec: max_depth must be >= 1");
        }
    }
};

namespace detail {

template <class F>
double gk_integrate(F&& f, double a, double b, const QuadratureSpec& spec) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    // Boost floors each leaf's error at a few ulps of the leaf estimate taken
    // before the interval Jacobian is applied. On a short interval that
    // floor exceeds any relative target and the recursion runs to max_depth,
    // so the integral is always posed on [0, 1].
    const double width = b - a;
    auto unit = [&](double x) { return width * f(a + width * x); };
    double err = 0.0;
    double l1 = 0.0;
    const double value = GK::integrate(unit, 0.0, 1.0, static_cast<unsigned>(spec.max_depth),
                                       spec.rel_tol, &err, &l1);
    if (!std::isfinite(value)) {
        throw non_convergence("integrate: non-finite estimate", value);
    }
    // Boost stops a leaf when its error is below rel_tol times either its own
    // estimate or a depth-halved share of the total, so the summed estimate is
    // bounded by 2 rel_tol L1.
    const double tol =
        std::max(spec.abs_tol, 2.0 * spec.rel_tol * std::max(std::abs(value), l1));
    if (err > tol) {
        char msg[128];
        std::snprintf(msg, sizeof msg,
                      "integrate: max_depth exhausted (error estimate %.3g, target %.3g)", err,
                      tol);
        throw non_convergence(msg, value);
    }
    return value;
}

} // namespace detail

/// Adaptive 15-point Gauss-Kronrod quadrature of f over [a, b].
///
/// With spec.singular_left_endpoint the substitution t = a + u^2 removes
/// integrable 1/sqrt(t - a) behaviour. The rule never samples the endpoints.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw validation_error("integrate: need finite a <= b");
    }
    if (a == b) {
        return 0.0;
    }
    if (spec.singular_left_endpoint) {
        auto g = [&](double u) { return 2.0 * u * f(a + u * u); };
        return detail::gk_integrate(g, 0.0, std::sqrt(b - a), spec);
    }
    return detail::gk_integrate(f, a, b, spec);
}

/// Integral over [a, inf) of an integrand bounded by amplitude * exp(-rate t).
///
/// The range is cut where the envelope's remaining tail, amplitude *
/// exp(-rate b) / rate, drops below abs_tol / 100.
template <class F>
double integrate_exp_tail(F&& f, double a, double amplitude, double rate,
                          const QuadratureSpec& spec = {}) {
    if (!(rate > 0.0) || !(amplitude >= 0.0)) {
        throw validation_error("integrate_exp_tail: need rate > 0 and amplitude >= 0");
    }
    const double cutoff = 1e-2 * spec.abs_tol;
    double b = a;
    if (amplitude / rate > cutoff) {
        b = std::log(amplitude / (rate * cutoff)) / rate;
    }
    b = std::max(b, a);
    return integrate(std::forward<F>(f), a, b, spec);
}

// ---- elliptic integral of the second kind ----

struct EllipticArg {
    double y = 0.0;  // amplitude, radians
    double m = 0.0;  // parameter, m <= 1 (negative allowed)
};

/// E(y | m) = int_0^y sqrt(1 - m sin^2 t) dt for 0 <= y <= pi/2, m <= 1.
inline double ellint_e(EllipticArg arg) {
    const double y = arg.y;
    const double m = arg.m;
    if (!(m <= 1.0) || !std::isfinite(m)) {
        throw domain_error("ellint_e: parameter m must satisfy m <= 1");
    }
    if (!(y >= 0.0) || y > pi / 2 + 1e-15) {
        throw domain_error("ellint_e: amplitude must lie in [0, pi/2]");
    }
    if (m == 0.0) {
        return y;
    }
    auto integrand = [m](double t) {
        const double s = std::sin(t);
        return std::sqrt(std::max(0.0, 1.0 - m * s * s));
    };
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-12;
    spec.max_depth = 25;
    return integrate(integrand, 0.0, std::min(y, pi / 2), spec);
}

inline double ellint_e(double y, double m) { return ellint_e(EllipticArg{y, m}); }

/// E(y | m) for any real amplitude, from E(k pi + s) = 2k E(pi/2) + E(s)
/// and oddness in s.
inline double ellint_e_extended(double y, double m) {
    if (!std::isfinite(y)) {
        throw domain_error("ellint_e_extended: non-finite amplitude");
    }
    const double k = std::round(y / pi);
    const double s = y - k * pi;
    const double tail = ellint_e(std::abs(s), m);
    return 2.0 * k * ellint_e(pi / 2, m) + (s < 0.0 ? -tail : tail);
}

// ---- scalar root finding and minimization ----

/// Bracketed root of f in [lo, hi] (TOMS 748). Stops when the bracket is
/// narrower than tol or f vanishes exactly.
template <class F>
double find_root(F&& f, double lo, double hi, double tol = 1e-12) {
    if (!(lo <= hi)) {
        throw validation_error("find_root: need lo <= hi");
    }
    const double flo = f(lo);
    const double fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi)) {
        throw domain_error("find_root: non-finite function value at bracket end");
    }
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw bracketing_error("find_root: no sign change on [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
    }
    std::uintmax_t max_iter = 200;
    auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto bracket =
        boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, max_iter);
    if (max_iter >= 200) {
        throw non_convergence("find_root: iteration budget exhausted",
                              0.5 * (bracket.first + bracket.second));
    }
    return 0.5 * (bracket.first + bracket.second);
}

struct Minimum {
    double x;
    double value;
};

/// Local minimum of f on [lo, hi] by Brent's parabolic/golden method.
template <class F>
Minimum minimize_scalar(F&& f, double lo, double hi,
                        int bits = std::numeric_limits<double>::digits) {
    if (!(lo < hi)) {
        throw validation_error("minimize_scalar: need lo < hi");
    }
    std::uintmax_t max_iter = 500;
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, bits, max_iter);
    return {r.first, r.second};
}

} // namespace qsl::numerics
