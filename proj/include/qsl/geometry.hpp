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
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qsl/core.hpp"
#include "qsl/qstate.hpp"

namespace qsl::geometry {

// ---- Fubini-Study ----

/// ds^2 = <dpsi|dpsi>/<psi|psi> - |<psi|dpsi>|^2/<psi|psi>^2.
inline double fs_line_element(const PureStateVector& psi, const ComplexVector& dpsi) {
    if (dpsi.size() != psi.dim()) {
        throw validation_error("fs_line_element: dimension mismatch");
    }
    const ComplexVector& v = psi.amplitudes();
    const double n2 = v.squaredNorm();
    // Project out the collinear part first; this is the same expression
    // without the cancellation between the two terms.
    const ComplexVector perp = dpsi - (v.dot(dpsi) / n2) * v;
    return perp.squaredNorm() / n2;
}

/// arccos(|<a|b>| / (|a| |b|)), evaluated as an angle between the parallel
/// and perpendicular parts of b so that small distances keep full precision.
inline double fs_distance(const PureStateVector& a, const PureStateVector& b) {
    if (a.dim() != b.dim()) {
        throw validation_error("fs_distance: dimension mismatch");
    }
    const ComplexVector ua = a.normalized();
    const ComplexVector ub = b.normalized();
    const cplx overlap = ua.dot(ub);
    const double sin_part = (ub - overlap * ua).norm();
    return std::atan2(sin_part, std::abs(overlap));
}

// ---- Bures ----

namespace detail {

// Square root of a density matrix, with eigenvalues below the resolvable
// floor (a few ulps of the largest) set to zero.
inline ComplexMatrix density_sqrt(const DensityOperator& rho) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
    const RealVector& lam = es.eigenvalues();
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                         static_cast<double>(rho.dim()) * std::max(lam.maxCoeff(), 0.0);
    RealVector s(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        s(k) = lam(k) > floor ? std::sqrt(lam(k)) : 0.0;
    }
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, computed as the squared trace norm
/// of sqrt(rho) sqrt(sigma).
inline double bures_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw validation_error("bures_fidelity: dimension mismatch");
    }
    const ComplexMatrix prod = detail::density_sqrt(rho) * detail::density_sqrt(sigma);
    Eigen::JacobiSVD<ComplexMatrix> svd(prod);
    const double root = svd.singularValues().sum();
    return std::clamp(root * root, 0.0, 1.0);
}

/// sqrt(2) sqrt(1 - sqrt(F_B)), evaluated as min over unitaries U of
/// |sqrt(rho) - sqrt(sigma) U| in the Frobenius norm. The difference keeps
/// full precision for nearby states, where 1 - sqrt(F_B) cancels.
inline double bures_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw validation_error("bures_distance: dimension mismatch");
    }
    const ComplexMatrix sr = detail::density_sqrt(rho);
    const ComplexMatrix ss = detail::density_sqrt(sigma);
    // sqrt(rho) sqrt(sigma) = W S V^dag; U = V W^dag makes Tr(sqrt(rho) sqrt(sigma) U) = Tr S.
    Eigen::JacobiSVD<ComplexMatrix> svd(sr * ss, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const ComplexMatrix u = svd.matrixV() * svd.matrixU().adjoint();
    return std::min(std::sqrt(2.0), (sr - ss * u).norm());
}

/// arccos sqrt(F_B) = 2 arcsin(d_B / 2).
inline double bures_angle(const DensityOperator& rho, const DensityOperator& sigma) {
    return 2.0 * std::asin(0.5 * bures_distance(rho, sigma));
}

// ---- classical distributions ----

namespace detail {

inline void check_distribution(std::span<const double> p, const char* who) {
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw validation_error(std::string(who) + ": negative or non-finite probability");
        }
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        throw validation_error(std::string(who) + ": probabilities do not sum to 1");
    }
}

} // namespace detail

/// sum_k sqrt(P_k Q_k).
inline double bhattacharyya(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw validation_error("bhattacharyya: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += std::sqrt(std::max(0.0, p[k]) * std::max(0.0, q[k]));
    }
    return acc;
}

/// sqrt(1/2 sum_k (sqrt(Q_k) - sqrt(P_k))^2).
inline double hellinger_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw validation_error("hellinger_distance: length mismatch");
    }
    detail::check_distribution(p, "hellinger_distance");
    detail::check_distribution(q, "hellinger_distance");
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double d = std::sqrt(q[k]) - std::sqrt(p[k]);
        acc += d * d;
    }
    return std::min(1.0, std::sqrt(0.5 * acc));
}

// ---- geodesics ----

struct GeodesicSpec {
    PureStateVector start;
    PureStateVector end;
    std::vector<double> xi;  // nondecreasing, xi.front() = 0, xi.back() = 1

    void validate() const {
        if (start.dim() != end.dim()) {
            throw validation_error("GeodesicSpec: endpoint dimensions differ");
        }
        if (xi.size() < 2 || xi.front() != 0.0 || xi.back() != 1.0) {
            throw validation_error("GeodesicSpec: xi must run from 0 to 1");
        }
        for (std::size_t k = 1; k < xi.size(); ++k) {
            if (xi[k] < xi[k - 1]) {
                throw validation_error("GeodesicSpec: xi must be nondecreasing");
            }
        }
    }
};

namespace detail {

struct GeodesicFrame {
    ComplexVector psi0;     // normalized start
    ComplexVector psi1;     // unit vector orthogonal to psi0 (empty if collinear)
    ComplexVector end_hat;  // normalized end
    cplx f_end;             // <psi0|end_hat>
    double g_end;           // |end_hat - f_end psi0|
    bool orthogonal;
    bool collinear;
};

inline GeodesicFrame geodesic_frame(const PureStateVector& start, const PureStateVector& end) {
    GeodesicFrame fr;
    fr.psi0 = start.normalized();
    fr.end_hat = end.normalized();
    fr.f_end = fr.psi0.dot(fr.end_hat);
    const ComplexVector resid = fr.end_hat - fr.f_end * fr.psi0;
    fr.g_end = resid.norm();
    fr.collinear = fr.g_end <= 1e-14;
    fr.orthogonal = std::abs(fr.f_end) <= 1e-14;
    if (!fr.collinear) {
        fr.psi1 = resid / fr.g_end;
    }
    return fr;
}

inline PureStateVector geodesic_at(const GeodesicFrame& fr, double xi) {
    if (xi == 0.0) {
        return PureStateVector(fr.psi0);
    }
    if (xi == 1.0) {
        return PureStateVector(fr.end_hat);
    }
    if (fr.collinear) {
        throw validation_error("geodesic_point: collinear endpoints have no interior geodesic");
    }
    if (fr.orthogonal) {
        // One of the great circles through the pair: the one that keeps the
        // phase of the supplied end vector.
        return PureStateVector(std::cos(xi * pi / 2) * fr.psi0 + std::sin(xi * pi / 2) * fr.end_hat);
    }
    const cplx z_end = fr.g_end / fr.f_end;
    return PureStateVector(fr.psi0 + xi * z_end * fr.psi1);
}

} // namespace detail

/// |psi(xi)> = |psi0> + xi (g_f/f_f) |psi1>, the projective straight line
/// between the endpoints.
inline PureStateVector geodesic_point(const GeodesicSpec& spec, std::size_t index) {
    spec.validate();
    if (index >= spec.xi.size()) {
        throw validation_error("geodesic_point: index out of range");
    }
    return detail::geodesic_at(detail::geodesic_frame(spec.start, spec.end), spec.xi[index]);
}

/// All points of the spec in one pass.
inline std::vector<PureStateVector> geodesic_points(const GeodesicSpec& spec) {
    spec.validate();
    const auto fr = detail::geodesic_frame(spec.start, spec.end);
    std::vector<PureStateVector> out;
    out.reserve(spec.xi.size());
    for (double x : spec.xi) {
        out.push_back(detail::geodesic_at(fr, x));
    }
    return out;
}

/// The xi at which the geodesic has covered the fraction s of the distance.
inline double geodesic_xi_for_fraction(const PureStateVector& start, const PureStateVector& end,
                                       double s) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw validation_error("geodesic_xi_for_fraction: s must lie in [0, 1]");
    }
    const auto fr = detail::geodesic_frame(start, end);
    if (fr.orthogonal || fr.collinear) {
        return s;
    }
    const double z = fr.g_end / std::abs(fr.f_end);
    return std::tan(s * std::atan(z)) / z;
}

// ---- paths ----

struct StatePath {
    std::vector<double> times;
    std::vector<DensityOperator> states;

    void validate() const {
        if (times.size() < 2 || times.size() != states.size()) {
            throw validation_error("StatePath: need >= 2 samples with matching times");
        }
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (!(times[k] > times[k - 1])) {
                throw validation_error("StatePath: times must be strictly increasing");
            }
            if (states[k].dim() != states[0].dim()) {
                throw validation_error("StatePath: states differ in dimension");
            }
        }
    }
};

struct PathLength {
    double length = 0.0;
    double max_increment = 0.0;
    // Some increment exceeded 0.2 rad; refine the grid for second-order accuracy.
    bool coarse_grid = false;
};

inline constexpr double kCoarseIncrement = 0.2;

/// Sum of Bures angles between consecutive samples.
inline PathLength path_length(const StatePath& path) {
    path.validate();
    PathLength out;
    for (std::size_t k = 1; k < path.states.size(); ++k) {
        const double step = bures_angle(path.states[k - 1], path.states[k]);
        out.length += step;
        out.max_increment = std::max(out.max_increment, step);
    }
    out.coarse_grid = out.max_increment > kCoarseIncrement;
    return out;
}

} // namespace qsl::geometry
