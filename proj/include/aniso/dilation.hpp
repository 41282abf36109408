#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/numerics.hpp"

namespace aniso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Positive-definite quadratic form P plus a radius s0. The open set
/// {x : x'Px < s0^2} has unit volume and expands by at least a factor r
/// under the dilation matrix that built it.
struct EllipsoidForm {
    Matrix P;
    double radius = 0.0;

    /// |x|_P = sqrt(x' P x).
    double norm(const Vector& x) const { return std::sqrt(x.dot(P * x)); }
};

namespace detail {

/// Eigenvalue moduli from the real Schur form; complex pairs show up as 2x2
/// diagonal blocks whose modulus is sqrt(|det block|).
inline std::vector<double> schur_moduli(const Matrix& a) {
    Eigen::RealSchur<Matrix> schur(a);
    if (schur.info() != Eigen::Success) throw Error("Schur decomposition failed");
    const Matrix& t = schur.matrixT();
    const int n = int(a.rows());
    std::vector<double> mods;
    mods.reserve(std::size_t(n));
    for (int i = 0; i < n;) {
        if (i + 1 < n && std::fabs(t(i + 1, i)) > 0.0) {
            double det2 = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
            double m = std::sqrt(std::fabs(det2));
            mods.push_back(m);
            mods.push_back(m);
            i += 2;
        } else {
            mods.push_back(std::fabs(t(i, i)));
            i += 1;
        }
    }
    std::sort(mods.begin(), mods.end());
    return mods;
}

inline double spectral_norm_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    double lo = std::fabs(es.eigenvalues().minCoeff());
    double hi = std::fabs(es.eigenvalues().maxCoeff());
    return std::max(lo, hi);
}

} // namespace detail

struct DilationOptions {
    std::optional<double> lambda_minus; // default: 1 + 0.95*(|l1| - 1)
    std::optional<double> lambda_plus;  // default: |ln| * 1.05
    std::optional<double> delta;        // default: 0.999 * lambda_minus^2
};

class Dilation;
EllipsoidForm build_ellipsoid(const Matrix& matrix, double delta);

/// A validated expansive matrix together with its spectral data and the
/// unit-volume ellipsoid that seeds the dilated-ball family B_i = A^i * Delta.
/// Immutable after construction; all queries are pure.
class Dilation {
  public:
    static Dilation validate(const Matrix& matrix, const DilationOptions& opts = {}) {
        if (matrix.rows() != matrix.cols() || matrix.rows() < 1)
            throw DimensionMismatch("dilation matrix must be square and nonempty");
        if (!matrix.allFinite())
            throw DimensionMismatch("dilation matrix has non-finite entries");

        Dilation d;
        d.matrix_ = matrix;
        d.n_ = int(matrix.rows());

        Eigen::PartialPivLU<Matrix> lu(matrix);
        double det = lu.determinant();
        if (std::fabs(det) < 1e-12)
            throw Singular("dilation matrix is numerically singular");
        d.b_ = std::fabs(det);
        d.inverse_ = lu.inverse();

        d.lambda_abs_ = detail::schur_moduli(matrix);
        if (d.lambda_abs_.front() <= 1.0 + 1e-9)
            throw NotExpansive("eigenvalue modulus " + std::to_string(d.lambda_abs_.front()) +
                               " is not strictly greater than 1");

        const double l1 = d.lambda_abs_.front();
        const double ln = d.lambda_abs_.back();
        d.lambda_minus_ = opts.lambda_minus.value_or(1.0 + 0.95 * (l1 - 1.0));
        d.lambda_plus_ = opts.lambda_plus.value_or(ln * 1.05);
        if (!(1.0 < d.lambda_minus_ && d.lambda_minus_ < l1))
            throw Error("lambda_minus must lie strictly in (1, |lambda_1|)");
        if (!(ln < d.lambda_plus_))
            throw Error("lambda_plus must exceed the largest eigenvalue modulus");

        double delta = opts.delta.value_or(0.999 * d.lambda_minus_ * d.lambda_minus_);
        if (!(delta > 1.0))
            throw Error("ellipsoid delta must be > 1");
        d.ellipsoid_ = build_ellipsoid(matrix, delta);
        d.expansion_r_ = std::sqrt(delta);
        d.delta_ = delta;
        return d;
    }

    const Matrix& matrix() const { return matrix_; }
    const Matrix& inverse() const { return inverse_; }
    int n() const { return n_; }
    double b() const { return b_; }
    const std::vector<double>& lambda_abs() const { return lambda_abs_; }
    double lambda_minus() const { return lambda_minus_; }
    double lambda_plus() const { return lambda_plus_; }
    double expansion_r() const { return expansion_r_; }
    double delta() const { return delta_; }
    const EllipsoidForm& ellipsoid() const { return ellipsoid_; }

    /// A^k x by repeated multiplication (k of either sign).
    Vector apply_power(int k, const Vector& x) const {
        Vector y = x;
        const Matrix& m = (k >= 0) ? matrix_ : inverse_;
        for (int j = 0; j < std::abs(k); ++j) y = m * y;
        return y;
    }

    /// Dense matrix power A^k.
    Matrix power(int k) const {
        Matrix y = Matrix::Identity(n_, n_);
        const Matrix& m = (k >= 0) ? matrix_ : inverse_;
        for (int j = 0; j < std::abs(k); ++j) y = m * y;
        return y;
    }

    /// Open-ball membership x in B_i = A^i Delta, boundary excluded:
    /// |A^{-i} x|_P < s0 * (1 - 1e-12). Strictness keeps the step quasi-norm
    /// well defined under floating point.
    bool ball_member(const Vector& x, int i) const {
        Vector y = apply_power(-i, x);
        return ellipsoid_.norm(y) < ellipsoid_.radius * (1.0 - 1e-12);
    }

    /// The validated dilation for A^T. Determinant and eigenvalue moduli are
    /// transpose-invariant, so they are copied verbatim; only the ellipsoid
    /// is rebuilt.
    Dilation transpose() const {
        Dilation d;
        d.matrix_ = matrix_.transpose();
        d.inverse_ = inverse_.transpose();
        d.n_ = n_;
        d.b_ = b_;
        d.lambda_abs_ = lambda_abs_;
        d.lambda_minus_ = lambda_minus_;
        d.lambda_plus_ = lambda_plus_;
        d.delta_ = delta_;
        d.expansion_r_ = expansion_r_;
        d.ellipsoid_ = build_ellipsoid(d.matrix_, delta_);
        return d;
    }

    /// Axis-aligned half-widths of the bounding box of x0 + B_i (centered at
    /// x0). Along axis k the extremal coordinate over {x' Q x < s0^2} is
    /// s0 * sqrt((Q^{-1})_kk) with Q = A^{-i,T} P A^{-i}.
    Vector ball_half_widths(int i) const {
        Matrix ai = power(i);
        Matrix qinv = ai * ellipsoid_.P.inverse() * ai.transpose();
        Vector h(n_);
        for (int k = 0; k < n_; ++k) h[k] = ellipsoid_.radius * std::sqrt(qinv(k, k));
        return h;
    }

  private:
    Dilation() = default;

    Matrix matrix_, inverse_;
    int n_ = 0;
    double b_ = 0.0;
    std::vector<double> lambda_abs_;
    double lambda_minus_ = 0.0, lambda_plus_ = 0.0;
    double delta_ = 0.0, expansion_r_ = 0.0;
    EllipsoidForm ellipsoid_;
};

/// Lyapunov-type series P = sum_j delta^j (A^{-j})' (A^{-j}), truncated when
/// the added term's spectral norm drops below 1e-14, then scaled so the
/// ellipsoid has unit volume. Convergence needs delta < |lambda_1|^2.
///
/// The truncated P still certifies the expansion: A^{-T} P A^{-1} =
/// (P - I + tail)/delta with ||tail|| < 1e-14, hence |Au|_P >= sqrt(delta)|u|_P.
inline EllipsoidForm build_ellipsoid(const Matrix& matrix, double delta) {
    const int n = int(matrix.rows());
    Eigen::PartialPivLU<Matrix> lu(matrix);
    Matrix ainv = lu.inverse();

    Matrix p = Matrix::Zero(n, n);
    Matrix term = Matrix::Identity(n, n);
    const int max_terms = 10000;
    int j = 0;
    for (; j < max_terms; ++j) {
        p += term;
        term = delta * (ainv.transpose() * term * ainv);
        term = 0.5 * (term + term.transpose());
        if (detail::spectral_norm_sym(term) < 1e-14) break;
    }
    if (j == max_terms)
        throw SeriesDivergence("ellipsoid series did not converge in 10^4 terms; delta too close to |lambda_1|^2");
    p = 0.5 * (p + p.transpose());

    EllipsoidForm e;
    e.P = p;
    // |Delta| = omega_n s0^n / sqrt(det P) = 1.
    double det_p = p.determinant();
    e.radius = std::pow(std::sqrt(det_p) / unit_ball_volume(n), 1.0 / double(n));
    return e;
}

/// Largest eigenvalue of P^{-1/2} A^{-T} P A^{-1} P^{-1/2}; the containment
/// certificate asks this to be <= 1/delta + 1e-10.
inline double contraction_certificate(const Dilation& d) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(d.ellipsoid().P);
    Matrix sqrt_inv = es.operatorInverseSqrt();
    Matrix m = sqrt_inv *
               (d.inverse().transpose() * d.ellipsoid().P * d.inverse()) * sqrt_inv;
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es2(m, Eigen::EigenvaluesOnly);
    return es2.eigenvalues().maxCoeff();
}

} // namespace aniso
