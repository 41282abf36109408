#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "aniso/dilation.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/mixed_norm.hpp"
#include "aniso/numerics.hpp"
#include "aniso/rng.hpp"

namespace aniso {

/// Least admissible vanishing-moment order floor((1/p- - 1) ln b / ln l-).
inline int min_vanishing_order(const Dilation& d, const ExponentVector& pv) {
    if (!(pv.p_minus() <= 1.0))
        throw Error("vanishing-moment order is defined for p- in (0,1]");
    double v = (1.0 / pv.p_minus() - 1.0) * std::log(d.b()) / std::log(d.lambda_minus());
    return int(std::floor(v));
}

/// All multi-indices in Z_+^n with |gamma| <= max_deg.
inline std::vector<std::vector<int>> multi_indices(int n, int max_deg) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(std::size_t(n), 0);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n) {
            out.push_back(cur);
            return;
        }
        for (int deg = 0; deg <= remaining; ++deg) {
            cur[std::size_t(pos)] = deg;
            self(self, pos + 1, remaining - deg);
        }
    };
    rec(rec, 0, max_deg);
    return out;
}

/// Smooth compactly supported sample function certified against the three
/// atom conditions: support in its dilated ball, L^r size bound tied to the
/// mixed norm of the ball indicator, and vanishing moments up to order s.
///
/// The underlying function is a C-infinity bump profile on the canonical ball
/// times a random polynomial, minus the moment projection; it is kept in
/// analytic form so grids can be re-evaluated at any resolution.
struct Atom {
    DilatedBall ball;
    double r_exponent = 2.0;
    int s_order = 0;
    GridFunction samples;   // ambient tensor grid over the ball's bounding box
    GridFunction canonical; // same function pulled back to the canonical ball
    bool certified = false;

    std::uint64_t seed = 0;
    std::size_t resolution = 0;           // nodes per axis of both grids
    std::size_t indicator_resolution = 0; // resolution used for the size bound
    double indicator_norm = 0.0;          // ||1_B||_{L^p} used in the size bound
    double scale = 1.0;                   // saturation rescaling factor

    // analytic pieces (canonical coordinates xi, ambient x = A^{i0} xi + x0)
    Matrix to_canonical;                    // A^{-i0}
    Matrix from_canonical;                  // A^{i0}
    Matrix form_p;                          // ellipsoid P
    double form_radius = 0.0;               // ellipsoid s0
    Vector canonical_half, ambient_half;    // box half-widths
    std::vector<std::vector<int>> poly_idx; // multi-indices, degree <= s+1
    std::vector<double> poly_coeff;         // random polynomial, canonical basis
    std::vector<std::vector<int>> proj_idx; // multi-indices, degree <= s
    std::vector<double> proj_coeff;         // projection, ambient centered basis

    double bump(const Vector& xi) const {
        Vector pxi = form_p * xi;
        double u2 = xi.dot(pxi) / (form_radius * form_radius);
        if (u2 >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u2));
    }

    double eval_canonical(const Vector& xi) const {
        double psi = bump(xi);
        if (psi == 0.0) return 0.0;
        double q = 0.0;
        for (std::size_t t = 0; t < poly_idx.size(); ++t) {
            double m = poly_coeff[t];
            for (int k = 0; k < xi.size(); ++k)
                for (int e = 0; e < poly_idx[t][std::size_t(k)]; ++e)
                    m *= xi[k] / canonical_half[k];
            q += m;
        }
        Vector xc = from_canonical * xi; // x - x0
        double h = 0.0;
        for (std::size_t t = 0; t < proj_idx.size(); ++t) {
            double m = proj_coeff[t];
            for (int k = 0; k < xc.size(); ++k)
                for (int e = 0; e < proj_idx[t][std::size_t(k)]; ++e)
                    m *= xc[k] / ambient_half[k];
            h += m;
        }
        return scale * psi * (q - h);
    }

    double eval_ambient(const Vector& x) const {
        return eval_canonical(to_canonical * (x - ball.center));
    }

    /// Discrete L^r norm on the ambient grid (r = inf takes the max).
    double lr_norm(double r) const {
        if (r == kInfExponent) {
            double m = 0.0;
            for (const auto& v : samples.values()) m = std::max(m, std::abs(v));
            return m;
        }
        KahanSum s;
        samples.for_each([&](std::size_t flat, const Vector&, double w) {
            s.add(w * std::pow(std::abs(samples.values()[flat]), r));
        });
        return std::pow(s.value(), 1.0 / r);
    }

    double l1_norm() const {
        KahanSum s;
        samples.for_each([&](std::size_t flat, const Vector&, double w) {
            s.add(w * std::abs(samples.values()[flat]));
        });
        return s.value();
    }

    /// b^{i0} = |det A^{i0}|.
    double det_b_i0() const { return std::fabs(from_canonical.determinant()); }

    /// Diameter of the supporting ball (twice the largest semi-axis).
    double ball_diameter() const {
        Matrix q_inv = from_canonical * form_p.inverse() * from_canonical.transpose();
        q_inv = 0.5 * (q_inv + q_inv.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(q_inv, Eigen::EigenvaluesOnly);
        return 2.0 * form_radius * std::sqrt(es.eigenvalues().maxCoeff());
    }
};

/// Finite atomic combination f = sum_i lambda_i a_i.
struct AtomicSum {
    std::vector<std::complex<double>> coefficients;
    std::vector<Atom> atoms;

    void validate() const {
        if (coefficients.size() != atoms.size())
            throw ShapeMismatch("coefficient and atom counts differ");
    }
};

struct AtomCertificate {
    double support_margin = 0.0; // min boundary clearance of nonzero samples
    double size_margin = 0.0;    // (1+1e-6) * bound / ||a||_r - 1
    double moment_margin = 0.0;  // 1 - worst |moment| / threshold
    double worst_moment = 0.0;   // worst relative moment
    std::vector<int> worst_gamma;
    bool support_pass = false, size_pass = false, moment_pass = false;
    bool pass() const { return support_pass && size_pass && moment_pass; }
};

/// Independent re-check of the three atom conditions on the stored samples.
inline AtomCertificate verify_atom(const Dilation& d, const ExponentVector& pv, const Atom& atom) {
    AtomCertificate cert;
    const auto& vals = atom.samples.values();

    // (i) support: every nonzero sample strictly inside x0 + B_{i0}
    double margin = 1.0;
    bool support_ok = true;
    const double cutoff = atom.form_radius * (1.0 - 1e-12);
    atom.samples.for_each([&](std::size_t flat, const Vector& x, double) {
        if (vals[flat] == std::complex<double>(0.0, 0.0)) return;
        Vector xi = atom.to_canonical * (x - atom.ball.center);
        double rho_p = std::sqrt(xi.dot(atom.form_p * xi));
        double m = 1.0 - rho_p / cutoff;
        margin = std::min(margin, m);
        if (!(rho_p < cutoff)) support_ok = false;
    });
    cert.support_margin = margin;
    cert.support_pass = support_ok;

    // (ii) size: ||a||_r <= (1 + 1e-6) |B|^{1/r} / ||1_B||_{L^p}
    double lr = atom.lr_norm(atom.r_exponent);
    double vol_pow = (atom.r_exponent == kInfExponent)
                         ? 1.0
                         : std::pow(d.b(), double(atom.ball.i0) / atom.r_exponent);
    double ind = indicator_ball_norm(d, atom.ball, pv, atom.indicator_resolution).value;
    double bound = vol_pow / ind;
    cert.size_margin = (lr > 0.0) ? (1.0 + 1e-6) * bound / lr - 1.0 : 1.0;
    cert.size_pass = cert.size_margin >= 0.0;

    // (iii) moments: |sum w a (x-x0)^gamma| <= 1e-8 ||a||_1 diam^{|gamma|}
    // Centered monomials span the same polynomial space as raw ones and keep
    // the threshold scale-correct for balls far from the origin.
    double l1 = atom.l1_norm();
    double diam = atom.ball_diameter();
    auto gammas = multi_indices(d.n(), atom.s_order);
    double worst = 0.0;
    std::vector<int> worst_gamma;
    for (const auto& g : gammas) {
        int order = 0;
        for (int gk : g) order += gk;
        KahanSum s;
        atom.samples.for_each([&](std::size_t flat, const Vector& x, double w) {
            double m = w * vals[flat].real();
            if (m == 0.0) return;
            for (int k = 0; k < d.n(); ++k)
                for (int e = 0; e < g[std::size_t(k)]; ++e) m *= x[k] - atom.ball.center[k];
            s.add(m);
        });
        double thr = 1e-8 * l1 * std::pow(diam, double(order));
        double rel = (thr > 0.0) ? std::fabs(s.value()) / thr : 0.0;
        if (rel > worst) {
            worst = rel;
            worst_gamma = g;
        }
    }
    cert.worst_moment = worst;
    cert.worst_gamma = worst_gamma;
    cert.moment_margin = 1.0 - worst;
    cert.moment_pass = worst <= 1.0;
    return cert;
}

namespace detail {

inline GridFunction box_grid(const Vector& center, const Vector& half, std::size_t resolution) {
    std::vector<Axis> axes;
    axes.reserve(std::size_t(center.size()));
    for (int k = 0; k < center.size(); ++k)
        axes.push_back(Axis::midpoint(center[k] - half[k], center[k] + half[k], resolution));
    return GridFunction(std::move(axes));
}

} // namespace detail

/// Draw a random smooth bump on the canonical ball, knock out all moments up
/// to order s against the ambient grid quadrature, transport to x0 + B_{i0},
/// and rescale to sit at 0.9 of the size bound. The projection solves a
/// pivoted least-squares system in the bump-weighted inner product, so the
/// discrete moments vanish to machine precision while support is preserved.
inline Atom generate_atom(const Dilation& d, const ExponentVector& pv, const DilatedBall& ball,
                          double r, int s, std::uint64_t seed, std::size_t resolution = 48,
                          std::size_t indicator_resolution = 64) {
    if (!(r > std::max(pv.p_plus(), 1.0)))
        throw Error("atom exponent r must exceed max{p+, 1}");
    if (s < min_vanishing_order(d, pv))
        throw Error("vanishing-moment order below the admissible minimum");
    if (ball.center.size() != d.n()) throw DimensionMismatch("ball center dimension");

    Atom atom;
    atom.ball = ball;
    atom.r_exponent = r;
    atom.s_order = s;
    atom.seed = seed;
    atom.resolution = resolution;
    atom.indicator_resolution = indicator_resolution;
    atom.to_canonical = d.power(-ball.i0);
    atom.from_canonical = d.power(ball.i0);
    atom.form_p = d.ellipsoid().P;
    atom.form_radius = d.ellipsoid().radius;
    atom.canonical_half = d.ball_half_widths(0);
    atom.ambient_half = d.ball_half_widths(ball.i0);
    atom.poly_idx = multi_indices(d.n(), s + 1);
    atom.proj_idx = multi_indices(d.n(), s);

    GridFunction grid = detail::box_grid(ball.center, atom.ambient_half, resolution);
    const std::size_t total = grid.total_size();
    const std::size_t nbasis = atom.proj_idx.size();

    // Per-node bump weights and centered-scaled monomials.
    std::vector<double> psi(total), wts(total);
    Eigen::MatrixXd phi(total, nbasis);
    {
        std::size_t j = 0;
        grid.for_each([&](std::size_t flat, const Vector& x, double w) {
            Vector xi = atom.to_canonical * (x - ball.center);
            psi[flat] = atom.bump(xi);
            wts[flat] = w;
            for (std::size_t t = 0; t < nbasis; ++t) {
                double m = 1.0;
                for (int k = 0; k < d.n(); ++k)
                    for (int e = 0; e < atom.proj_idx[t][std::size_t(k)]; ++e)
                        m *= (x[k] - ball.center[k]) / atom.ambient_half[k];
                phi(Eigen::Index(flat), Eigen::Index(t)) = m;
            }
            ++j;
        });
    }

    Rng rng(seed);
    std::vector<double> raw(total);
    for (int attempt = 0;; ++attempt) {
        if (attempt >= 16)
            throw DegenerateProjection("bump collapsed under moment projection 16 times");
        atom.poly_coeff.assign(atom.poly_idx.size(), 0.0);
        for (auto& c : atom.poly_coeff) c = rng.normal();

        // q at the grid nodes, in canonical scaled coordinates
        double norm_before = 0.0;
        {
            std::size_t idx = 0;
            grid.for_each([&](std::size_t flat, const Vector& x, double w) {
                Vector xi = atom.to_canonical * (x - ball.center);
                double q = 0.0;
                for (std::size_t t = 0; t < atom.poly_idx.size(); ++t) {
                    double m = atom.poly_coeff[t];
                    for (int k = 0; k < d.n(); ++k)
                        for (int e = 0; e < atom.poly_idx[t][std::size_t(k)]; ++e)
                            m *= xi[k] / atom.canonical_half[k];
                    q += m;
                }
                raw[flat] = q;
                norm_before += w * psi[flat] * psi[flat] * q * q;
                ++idx;
            });
        }

        // Weighted least squares: rows sqrt(w psi) phi, target sqrt(w psi) q.
        Eigen::MatrixXd v(total, nbasis);
        Eigen::VectorXd y(total);
        for (std::size_t j = 0; j < total; ++j) {
            double sw = std::sqrt(wts[j] * psi[j]);
            for (std::size_t t = 0; t < nbasis; ++t)
                v(Eigen::Index(j), Eigen::Index(t)) = sw * phi(Eigen::Index(j), Eigen::Index(t));
            y(Eigen::Index(j)) = sw * raw[j];
        }
        Eigen::VectorXd c = v.colPivHouseholderQr().solve(y);

        // One refinement pass on the normal equations tightens the discrete
        // moments to machine precision.
        {
            Eigen::MatrixXd gram = v.transpose() * v;
            Eigen::VectorXd resid = v.transpose() * (y - v * c);
            c += gram.ldlt().solve(resid);
        }

        atom.proj_coeff.assign(nbasis, 0.0);
        for (std::size_t t = 0; t < nbasis; ++t) atom.proj_coeff[t] = c(Eigen::Index(t));

        double norm_after = 0.0;
        for (std::size_t j = 0; j < total; ++j) {
            double hj = 0.0;
            for (std::size_t t = 0; t < nbasis; ++t)
                hj += atom.proj_coeff[t] * phi(Eigen::Index(j), Eigen::Index(t));
            double aj = psi[j] * (raw[j] - hj);
            raw[j] = aj; // reuse as the unscaled sample buffer
            norm_after += wts[j] * aj * aj;
        }
        if (norm_after >= 1e-20 * norm_before && norm_after > 0.0) break;
        // degenerate draw: resample the polynomial
    }

    // Saturate the size bound at factor 0.9.
    atom.indicator_norm = indicator_ball_norm(d, ball, pv, indicator_resolution).value;
    double vol_pow =
        (r == kInfExponent) ? 1.0 : std::pow(d.b(), double(ball.i0) / r);
    double bound = vol_pow / atom.indicator_norm;

    double lr;
    if (r == kInfExponent) {
        lr = 0.0;
        for (std::size_t j = 0; j < total; ++j) lr = std::max(lr, std::fabs(raw[j]));
    } else {
        KahanSum srm;
        for (std::size_t j = 0; j < total; ++j)
            srm.add(wts[j] * std::pow(std::fabs(raw[j]), r));
        lr = std::pow(srm.value(), 1.0 / r);
    }
    if (!(lr > 0.0)) throw DegenerateProjection("projected bump vanished identically");
    atom.scale = 0.9 * bound / lr;

    for (std::size_t j = 0; j < total; ++j) grid.values()[j] = atom.scale * raw[j];
    atom.samples = std::move(grid);

    // Canonical-ball samples back the dilation-identity Fourier path.
    GridFunction cgrid = detail::box_grid(Vector::Zero(d.n()), atom.canonical_half, resolution);
    cgrid.for_each([&](std::size_t flat, const Vector& xi, double) {
        cgrid.values()[flat] = atom.eval_canonical(xi);
    });
    atom.canonical = std::move(cgrid);

    AtomCertificate cert = verify_atom(d, pv, atom);
    if (!cert.pass())
        throw Error("generated atom failed self-certification (support " +
                    std::to_string(cert.support_margin) + ", size " +
                    std::to_string(cert.size_margin) + ", moments " +
                    std::to_string(cert.worst_moment) + ")");
    atom.certified = true;
    return atom;
}

namespace detail {

inline std::size_t auto_axis_resolution(double extent, double finest_half_width) {
    double h = finest_half_width / 8.0;
    double cells = extent / h;
    std::size_t res = std::size_t(std::ceil(cells));
    return std::min<std::size_t>(std::max<std::size_t>(res, 64), 2048);
}

} // namespace detail

/// Atomic-norm expression of one explicit decomposition (an upper bound for
/// the infimum over all decompositions):
/// || ( sum_i [ |l_i| 1_{B(i)} / ||1_{B(i)}|| ]^{p_} )^{1/p_} ||_{L^p}.
inline double atomic_norm(const AtomicSum& sum, const Dilation& d, const ExponentVector& pv,
                          std::size_t resolution = 0) {
    sum.validate();
    if (sum.atoms.empty()) return 0.0;
    const int n = d.n();
    const double p_under = pv.p_underline();

    // Common bounding box and per-ball indicator norms.
    Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    Vector finest = Vector::Constant(n, std::numeric_limits<double>::infinity());
    std::vector<double> ind_norms(sum.atoms.size());
    for (std::size_t i = 0; i < sum.atoms.size(); ++i) {
        const auto& ball = sum.atoms[i].ball;
        Vector h = d.ball_half_widths(ball.i0);
        for (int k = 0; k < n; ++k) {
            lo[k] = std::min(lo[k], ball.center[k] - h[k]);
            hi[k] = std::max(hi[k], ball.center[k] + h[k]);
            finest[k] = std::min(finest[k], h[k]);
        }
        ind_norms[i] = indicator_ball_norm(d, ball, pv, 64).value;
    }

    std::vector<Axis> axes;
    for (int k = 0; k < n; ++k) {
        std::size_t res = resolution != 0
                              ? resolution
                              : detail::auto_axis_resolution(hi[k] - lo[k], finest[k]);
        axes.push_back(Axis::midpoint(lo[k], hi[k], res));
    }
    GridFunction field(std::move(axes));
    field.for_each([&](std::size_t flat, const Vector& x, double) {
        double acc = 0.0;
        for (std::size_t i = 0; i < sum.atoms.size(); ++i) {
            const auto& ball = sum.atoms[i].ball;
            if (!d.ball_member(x - ball.center, ball.i0)) continue;
            double lam = std::abs(sum.coefficients[i]);
            if (lam == 0.0) continue;
            acc += std::pow(lam / ind_norms[i], p_under);
        }
        if (acc > 0.0) field.values()[flat] = std::pow(acc, 1.0 / p_under);
    });
    return mixed_norm_eval(field, pv);
}

struct CoefficientSumReport {
    double coefficient_sum = 0.0;
    double atomic = 0.0;
    double slack = 0.03;
    bool pass = false;
};

/// Coefficient-sum inequality sum |l_i| <= (1 + slack) * atomic norm; the
/// slack absorbs rasterization error of the norm side.
inline CoefficientSumReport check_coefficient_sum(const AtomicSum& sum, const Dilation& d,
                                                  const ExponentVector& pv,
                                                  std::size_t resolution = 0) {
    if (!pv.all_in_unit_interval())
        throw Error("coefficient-sum check requires exponents in (0,1]");
    CoefficientSumReport rep;
    KahanSum s;
    for (const auto& c : sum.coefficients) s.add(std::abs(c));
    rep.coefficient_sum = s.value();
    rep.atomic = atomic_norm(sum, d, pv, resolution);
    rep.pass = rep.coefficient_sum <= (1.0 + rep.slack) * rep.atomic;
    return rep;
}

} // namespace aniso
