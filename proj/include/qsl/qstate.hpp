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
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "qsl/core.hpp"

namespace qsl {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

// ---- operator types ----

namespace detail {

inline double hermitian_residual(const ComplexMatrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw validation_error(std::string(who) + ": matrix must be square and non-empty");
    }
    if (!a.allFinite()) {
        throw validation_error(std::string(who) + ": non-finite entry");
    }
}

} // namespace detail

/// Square matrix equal to its adjoint. The check is relative to the matrix
/// scale: |A - A^dag| <= 1e-12 max(1, |A|); the stored matrix is symmetrized.
class HermitianOperator {
public:
    HermitianOperator() = default;

    explicit HermitianOperator(const ComplexMatrix& a) {
        detail::require_square(a, "HermitianOperator");
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        if (detail::hermitian_residual(a) > 1e-12 * scale) {
            throw validation_error("HermitianOperator: matrix is not Hermitian");
        }
        m_ = 0.5 * (a + a.adjoint());
    }

    /// (A + A^dag)/2 without the Hermiticity check, for operators assembled
    /// from finite differences or long products.
    static HermitianOperator symmetrized(const ComplexMatrix& a) {
        detail::require_square(a, "HermitianOperator");
        HermitianOperator h;
        h.m_ = 0.5 * (a + a.adjoint());
        return h;
    }

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    ComplexMatrix m_;
};

struct EigenDecomposition {
    RealVector values;      // ascending
    ComplexMatrix vectors;  // columns are eigenvectors
};

inline EigenDecomposition eig_hermitian(const HermitianOperator& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.matrix());
    if (es.info() != Eigen::Success) {
        throw non_convergence("eig_hermitian: eigensolver failed", 0.0);
    }
    return {es.eigenvalues(), es.eigenvectors()};
}

inline EigenDecomposition eig_hermitian(const ComplexMatrix& a) {
    return eig_hermitian(HermitianOperator(a));
}

/// Unit-trace positive semidefinite operator.
class DensityOperator {
public:
    DensityOperator() = default;

    explicit DensityOperator(const ComplexMatrix& rho) {
        detail::require_square(rho, "DensityOperator");
        if (detail::hermitian_residual(rho) > 1e-12) {
            throw validation_error("DensityOperator: matrix is not Hermitian");
        }
        m_ = 0.5 * (rho + rho.adjoint());
        const double tr = m_.trace().real();
        if (std::abs(tr - 1.0) > 1e-10) {
            throw validation_error("DensityOperator: trace " + std::to_string(tr) + " != 1");
        }
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10) {
            throw validation_error("DensityOperator: negative eigenvalue");
        }
    }

    static DensityOperator from_pure(const ComplexVector& psi) {
        if (psi.size() == 0 || !(psi.norm() > 0.0)) {
            throw validation_error("DensityOperator: zero state vector");
        }
        const ComplexVector u = psi / psi.norm();
        return DensityOperator(u * u.adjoint());
    }

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    ComplexMatrix m_;
};

/// Ray representative. Normalization is not required; consumers normalize
/// through inner products.
class PureStateVector {
public:
    PureStateVector() = default;

    explicit PureStateVector(ComplexVector v) : v_(std::move(v)) {
        if (v_.size() == 0 || !v_.allFinite() || !(v_.norm() > 0.0)) {
            throw validation_error("PureStateVector: need a finite nonzero vector");
        }
    }

    const ComplexVector& amplitudes() const noexcept { return v_; }
    Eigen::Index dim() const noexcept { return v_.size(); }
    ComplexVector normalized() const { return v_ / v_.norm(); }
    DensityOperator density() const { return DensityOperator::from_pure(v_); }

private:
    ComplexVector v_;
};

// ---- matrix functions ----

/// Principal square root of a PSD operator. Eigenvalues in [-1e-8, 0) are
/// clamped to zero; anything more negative is a domain error.
inline HermitianOperator herm_sqrt(const HermitianOperator& a) {
    const auto ed = eig_hermitian(a);
    const double scale = std::max(1.0, ed.values.cwiseAbs().maxCoeff());
    if (ed.values.minCoeff() < -1e-8 * scale) {
        throw domain_error("herm_sqrt: operator is not positive semidefinite");
    }
    const RealVector s = ed.values.cwiseMax(0.0).cwiseSqrt();
    return HermitianOperator::symmetrized(ed.vectors * s.asDiagonal() * ed.vectors.adjoint());
}

/// exp(scale * A) through the eigendecomposition of A. Unitary when scale is
/// purely imaginary.
inline ComplexMatrix herm_exp(const HermitianOperator& a, cplx scale) {
    const auto ed = eig_hermitian(a);
    ComplexVector d(ed.values.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        d(k) = std::exp(scale * ed.values(k));
    }
    return ed.vectors * d.asDiagonal() * ed.vectors.adjoint();
}

// ---- composite systems ----

enum class Keep { S, E };

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
    ComplexVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

// Joint index convention: |s>|e> sits at s * dE + e.

/// Partial trace of an arbitrary joint operator (used for derivatives of
/// reduced states, which are not density operators).
inline ComplexMatrix partial_trace_matrix(const ComplexMatrix& joint, int dS, int dE, Keep keep) {
    if (dS < 1 || dE < 1 || joint.rows() != static_cast<Eigen::Index>(dS) * dE ||
        joint.cols() != joint.rows()) {
        throw validation_error("partial_trace: joint dimension does not match dS * dE");
    }
    if (keep == Keep::S) {
        ComplexMatrix out = ComplexMatrix::Zero(dS, dS);
        for (int a = 0; a < dS; ++a) {
            for (int b = 0; b < dS; ++b) {
                cplx acc = 0.0;
                for (int e = 0; e < dE; ++e) {
                    acc += joint(a * dE + e, b * dE + e);
                }
                out(a, b) = acc;
            }
        }
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(dE, dE);
    for (int a = 0; a < dE; ++a) {
        for (int b = 0; b < dE; ++b) {
            cplx acc = 0.0;
            for (int s = 0; s < dS; ++s) {
                acc += joint(s * dE + a, s * dE + b);
            }
            out(a, b) = acc;
        }
    }
    return out;
}

inline DensityOperator partial_trace(const DensityOperator& joint, int dS, int dE, Keep keep) {
    return DensityOperator(partial_trace_matrix(joint.matrix(), dS, dE, keep));
}

/// Reduced state of a joint pure state, without forming the joint density.
inline DensityOperator partial_trace(const PureStateVector& joint, int dS, int dE, Keep keep) {
    if (dS < 1 || dE < 1 || joint.dim() != static_cast<Eigen::Index>(dS) * dE) {
        throw validation_error("partial_trace: joint dimension does not match dS * dE");
    }
    const ComplexVector psi = joint.normalized();
    // Row s of M holds the environment amplitudes of |s>.
    ComplexMatrix m(dS, dE);
    for (int s = 0; s < dS; ++s) {
        for (int e = 0; e < dE; ++e) {
            m(s, e) = psi(s * dE + e);
        }
    }
    ComplexMatrix out = keep == Keep::S ? ComplexMatrix(m * m.adjoint())
                                        : ComplexMatrix(m.transpose() * m.conjugate());
    return DensityOperator(0.5 * (out + out.adjoint()));
}

/// sum_i sqrt(lambda_i) |i>_S |i>_E in the eigenbasis of rho; dim E = dim S.
/// Environment label 0 goes to the largest eigenvalue.
inline PureStateVector purify(const DensityOperator& rho) {
    const auto ed = eig_hermitian(HermitianOperator(rho.matrix()));
    const Eigen::Index d = rho.dim();
    ComplexVector out = ComplexVector::Zero(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double w = std::sqrt(std::max(0.0, ed.values(i)));
        if (w == 0.0) {
            continue;
        }
        ComplexVector e = ComplexVector::Zero(d);
        e(d - 1 - i) = 1.0;
        out += w * kron(ComplexVector(ed.vectors.col(i)), e);
    }
    return PureStateVector(out);
}

// ---- moments ----

namespace detail {

inline void require_dim(Eigen::Index a, Eigen::Index b, const char* who) {
    if (a != b) {
        throw validation_error(std::string(who) + ": dimension mismatch");
    }
}

} // namespace detail

inline double expectation(const HermitianOperator& a, const DensityOperator& rho) {
    detail::require_dim(a.dim(), rho.dim(), "expectation");
    return (rho.matrix() * a.matrix()).trace().real();
}

inline double expectation(const HermitianOperator& a, const PureStateVector& psi) {
    detail::require_dim(a.dim(), psi.dim(), "expectation");
    const ComplexVector& v = psi.amplitudes();
    return v.dot(a.matrix() * v).real() / v.squaredNorm();
}

inline double variance(const HermitianOperator& a, const DensityOperator& rho) {
    detail::require_dim(a.dim(), rho.dim(), "variance");
    const ComplexMatrix ra = rho.matrix() * a.matrix();
    const double mean = ra.trace().real();
    const double second = (ra * a.matrix()).trace().real();
    return std::max(0.0, second - mean * mean);
}

inline double variance(const HermitianOperator& a, const PureStateVector& psi) {
    detail::require_dim(a.dim(), psi.dim(), "variance");
    const ComplexVector& v = psi.amplitudes();
    const ComplexVector av = a.matrix() * v;
    const double n2 = v.squaredNorm();
    const double mean = v.dot(av).real() / n2;
    return std::max(0.0, av.squaredNorm() / n2 - mean * mean);
}

// ---- Pauli operators and basis states ----

inline ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0.0, -I, I, 0.0;
    return m;
}

inline ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

inline ComplexVector basis_ket(Eigen::Index dim, Eigen::Index index) {
    if (index < 0 || index >= dim) {
        throw validation_error("basis_ket: index out of range");
    }
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return v;
}

/// op acting on qubit j of an n-qubit register (qubit 0 is most significant).
inline ComplexMatrix on_qubit(const ComplexMatrix& op, int j, int n) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int k = 0; k < n; ++k) {
        out = kron(out, k == j ? op : ComplexMatrix(ComplexMatrix::Identity(2, 2)));
    }
    return out;
}

// ---- random instances ----

using Rng = std::mt19937_64;

inline ComplexVector random_state(Eigen::Index dim, Rng& rng) {
    std::normal_distribution<double> g;
    ComplexVector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        v(k) = cplx(g(rng), g(rng));
    }
    return v / v.norm();
}

inline HermitianOperator random_hermitian(Eigen::Index dim, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> g;
    ComplexMatrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            a(i, j) = cplx(g(rng), g(rng));
        }
    }
    return HermitianOperator::symmetrized(scale * a);
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
inline ComplexMatrix random_unitary(Eigen::Index dim, Rng& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            a(i, j) = cplx(g(rng), g(rng));
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(a);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < dim; ++k) {
        const cplx d = r(k, k);
        q.col(k) *= std::abs(d) > 0.0 ? d / std::abs(d) : cplx(1.0);
    }
    return q;
}

/// Random density operator of the given rank (partial trace of a random
/// pure state on dim x rank).
inline DensityOperator random_density(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
    if (rank < 1 || rank > dim) {
        throw validation_error("random_density: rank must lie in [1, dim]");
    }
    const ComplexVector psi = random_state(dim * rank, rng);
    return partial_trace(PureStateVector(psi), static_cast<int>(dim), static_cast<int>(rank),
                         Keep::S);
}

} // namespace qsl
