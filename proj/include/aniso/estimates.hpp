#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aniso/atoms.hpp"
#include "aniso/dilation.hpp"
#include "aniso/errors.hpp"
#include "aniso/fourier.hpp"
#include "aniso/mixed_norm.hpp"
#include "aniso/numerics.hpp"
#include "aniso/quasi_norm.hpp"
#include "aniso/rng.hpp"

namespace aniso {

struct Assertion {
    std::string id;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct NamedFit {
    std::string label;
    LineFit fit;
};

struct SampleTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Self-contained experiment outcome: empirical constants, fits, per-assertion
/// verdicts, and the sample tables the CSV artifacts are written from.
struct EstimateReport {
    std::string experiment;
    std::uint64_t seed = 0;
    double c_hat = 0.0;
    double stability_ratio = 0.0; // relative drift of c_hat under doubling
    std::vector<Assertion> assertions;
    std::vector<NamedFit> fits;
    std::vector<SampleTable> tables;
    std::map<std::string, double> metadata;

    bool passed() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return true;
    }

    void assert_that(std::string id, bool pass, double value, double threshold,
                     std::string detail = {}) {
        assertions.push_back({std::move(id), pass, value, threshold, std::move(detail)});
    }
};

// ---------------------------------------------------------------------------
// frequency point sets

/// Log-spaced points x = t * u along one direction, t ascending.
inline std::vector<Vector> ray_points(const Vector& u, double t_lo, double t_hi,
                                      std::size_t count) {
    std::vector<Vector> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double f = (count == 1) ? 0.0 : double(i) / double(count - 1);
        double t = t_lo * std::pow(t_hi / t_lo, f);
        pts.push_back(t * u);
    }
    return pts;
}

inline Vector random_direction(int n, Rng& rng) {
    Vector u(n);
    double nrm = 0.0;
    do {
        for (int k = 0; k < n; ++k) u[k] = rng.normal();
        nrm = u.norm();
    } while (nrm == 0.0);
    return u / nrm;
}

/// Random samples on quasi-norm shells of the transpose dilation:
/// x = (A^T)^j y with y in the base shell, so rho_*(x) = b^j by construction.
struct ShellPoints {
    std::vector<Vector> points;
    std::vector<double> rho_star;
    std::vector<int> shell;
};

inline ShellPoints shell_points(const Dilation& d_star, const QuasiNormEvaluator& e_star,
                                int j_lo, int j_hi, std::size_t per_shell, Rng rng) {
    ShellPoints out;
    Vector h = d_star.ball_half_widths(1);
    for (int j = j_lo; j <= j_hi; ++j) {
        Matrix aj = d_star.power(j);
        std::size_t found = 0;
        while (found < per_shell) {
            Vector y(d_star.n());
            for (int k = 0; k < d_star.n(); ++k) y[k] = rng.uniform(-h[k], h[k]);
            if (!d_star.ball_member(y, 1) || d_star.ball_member(y, 0)) continue;
            out.points.push_back(aj * y);
            out.rho_star.push_back(e_star.value_for_index(j));
            out.shell.push_back(j);
            ++found;
        }
    }
    return out;
}

/// Midpoint cells of the base shell B*_1 \ B*_0 (quadrature in shell
/// coordinates; shell j then contributes b^j * sum_cells w f((A^T)^j y)).
struct ShellQuadrature {
    std::vector<Vector> nodes;
    std::vector<double> weights;
};

inline ShellQuadrature shell_quadrature(const Dilation& d_star, std::size_t resolution) {
    ShellQuadrature q;
    Vector h = d_star.ball_half_widths(1);
    std::vector<Axis> axes;
    for (int k = 0; k < d_star.n(); ++k)
        axes.push_back(Axis::midpoint(-h[k], h[k], resolution));
    GridFunction box(std::move(axes));
    box.for_each([&](std::size_t, const Vector& y, double w) {
        if (d_star.ball_member(y, 1) && !d_star.ball_member(y, 0)) {
            q.nodes.push_back(y);
            q.weights.push_back(w);
        }
    });
    return q;
}

// ---------------------------------------------------------------------------
// derivative decay of canonical-ball transforms

struct DerivativeDecayOptions {
    std::vector<std::vector<int>> alphas;
    std::vector<Vector> directions;  // unit vectors for the small-|x| fits
    std::vector<double> fit_ts;      // ascending |x| values inside the Taylor window
    std::vector<Vector> bound_points; // extra points for the bound constant
    unsigned threads = 1;
    double slope_tolerance = 0.2;
    double drift_threshold = 0.10;
};

/// Empirical constant and decay slopes for the derivative bound
/// |d^alpha (F D^{i0} a)(x)| <= C b^{-i0/r} ||a||_r min{1, |x|^{s-|alpha|+1}}.
/// Atoms are expected on origin-centered balls.
inline EstimateReport check_derivative_decay(const Dilation& d, const ExponentVector& pv,
                                             const std::vector<Atom>& atoms,
                                             const DerivativeDecayOptions& opts) {
    (void)pv;
    EstimateReport rep;
    rep.experiment = "verify-lemma31";

    SampleTable raw{"ratios", {"atom", "alpha_order", "x_norm", "numerator", "bound", "ratio"}, {}};
    SampleTable fit_tab{"fits", {"atom", "alpha_order", "ray", "slope", "slope_target", "residual"}, {}};

    std::vector<Vector> fit_points;
    for (const auto& u : opts.directions)
        for (double t : opts.fit_ts) fit_points.push_back(t * u);

    double c_half = 0.0, c_full = 0.0;
    double min_slope_gap = std::numeric_limits<double>::infinity();
    double max_residual = 0.0;
    for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
        const Atom& atom = atoms[ai];
        const double norm_r = atom.lr_norm(atom.r_exponent);
        const double b_pow = (atom.r_exponent == kInfExponent)
                                 ? 1.0
                                 : std::pow(atom.det_b_i0(), -1.0 / atom.r_exponent);
        for (const auto& alpha : opts.alphas) {
            int order = 0;
            for (int a : alpha) order += a;
            const double decay_exp = double(atom.s_order - order + 1);

            auto ratio_at = [&](const FourierEvaluation& ev, std::size_t i) {
                double xn = ev.points[i].norm();
                double bound = b_pow * norm_r * std::min(1.0, std::pow(xn, decay_exp));
                double num = std::abs(ev.values[i]);
                raw.rows.push_back({double(ai), double(order), xn, num, bound,
                                    bound > 0.0 ? num / bound : 0.0});
                return bound > 0.0 ? num / bound : 0.0;
            };

            FourierEvaluation on_fit = fourier_derivative(atom, alpha, fit_points, opts.threads);
            for (std::size_t i = 0; i < on_fit.points.size(); ++i) {
                double r = ratio_at(on_fit, i);
                c_full = std::max(c_full, r);
                if (ai < (atoms.size() + 1) / 2) c_half = std::max(c_half, r);
            }
            if (!opts.bound_points.empty()) {
                FourierEvaluation on_bound =
                    fourier_derivative(atom, alpha, opts.bound_points, opts.threads);
                for (std::size_t i = 0; i < on_bound.points.size(); ++i) {
                    double r = ratio_at(on_bound, i);
                    c_full = std::max(c_full, r);
                    if (ai < (atoms.size() + 1) / 2) c_half = std::max(c_half, r);
                }
            }

            // per-ray small-|x| slope of the numerator
            for (std::size_t ri = 0; ri < opts.directions.size(); ++ri) {
                std::vector<double> lx, ly;
                for (std::size_t ti = 0; ti < opts.fit_ts.size(); ++ti) {
                    std::size_t i = ri * opts.fit_ts.size() + ti;
                    double num = std::abs(on_fit.values[i]);
                    if (on_fit.flagged[i] || num <= 0.0) continue;
                    lx.push_back(std::log(opts.fit_ts[ti]));
                    ly.push_back(std::log(num));
                }
                if (lx.size() < 3) continue;
                LineFit f = fit_line(lx, ly);
                fit_tab.rows.push_back({double(ai), double(order), double(ri), f.slope,
                                        decay_exp, f.rms_residual});
                min_slope_gap = std::min(min_slope_gap, f.slope - decay_exp);
                max_residual = std::max(max_residual, f.rms_residual);
            }
        }
    }

    rep.c_hat = c_full;
    rep.stability_ratio = (c_half > 0.0) ? std::fabs(c_full - c_half) / c_half : 0.0;
    rep.assert_that("c_hat_finite", std::isfinite(c_full) && c_full > 0.0, c_full, 0.0);
    rep.assert_that("c_hat_drift", rep.stability_ratio < opts.drift_threshold,
                    rep.stability_ratio, opts.drift_threshold, "atom-count doubling");
    rep.assert_that("small_x_slope", min_slope_gap >= -opts.slope_tolerance, min_slope_gap,
                    -opts.slope_tolerance, "min over (atom, alpha, ray) of slope - (s-|a|+1)");
    rep.assert_that("fit_residual", max_residual < 0.15, max_residual, 0.15);
    rep.tables.push_back(std::move(raw));
    rep.tables.push_back(std::move(fit_tab));
    return rep;
}

// ---------------------------------------------------------------------------
// uniform transform bound for atoms

struct AtomBoundOptions {
    unsigned threads = 1;
    double drift_threshold = 0.05;
    double uniformity_factor = 10.0;
};

inline double quasi_power_bound(double rho, double p_minus, double p_plus) {
    return std::max(std::pow(rho, 1.0 / p_minus - 1.0), std::pow(rho, 1.0 / p_plus - 1.0));
}

/// Empirical constant in |a^(x)| <= C max{rho_*(x)^{1/p_- - 1}, rho_*(x)^{1/p_+ - 1}}
/// over a set of atoms and transpose-shell points; checks i0-uniformity and
/// sample-doubling drift.
inline EstimateReport check_atom_fourier_bound(const Dilation& d, const ExponentVector& pv,
                                               const std::vector<Atom>& atoms,
                                               const ShellPoints& pts,
                                               const AtomBoundOptions& opts = {}) {
    (void)d;
    if (!pv.all_in_unit_interval())
        throw Error("transform bound check requires exponents in (0,1]");
    EstimateReport rep;
    rep.experiment = "verify-lemma32";
    const double pm = pv.p_minus(), pp = pv.p_plus();

    std::vector<double> denom(pts.points.size());
    for (std::size_t i = 0; i < pts.points.size(); ++i)
        denom[i] = quasi_power_bound(pts.rho_star[i], pm, pp);

    SampleTable per_atom{"atom_constants", {"atom", "i0", "c_hat"}, {}};
    std::map<int, double> by_i0;
    double c_half = 0.0, c_full = 0.0;
    for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
        FourierEvaluation ev = fourier_atom_direct(atoms[ai], pts.points, opts.threads);
        double c_atom = 0.0;
        for (std::size_t i = 0; i < pts.points.size(); ++i)
            c_atom = std::max(c_atom, std::abs(ev.values[i]) / denom[i]);
        per_atom.rows.push_back({double(ai), double(atoms[ai].ball.i0), c_atom});
        auto [it, fresh] = by_i0.try_emplace(atoms[ai].ball.i0, c_atom);
        if (!fresh) it->second = std::max(it->second, c_atom);
        c_full = std::max(c_full, c_atom);
        if (ai < (atoms.size() + 1) / 2) c_half = std::max(c_half, c_atom);
    }

    double grp_min = std::numeric_limits<double>::infinity(), grp_max = 0.0;
    SampleTable groups{"i0_constants", {"i0", "c_hat"}, {}};
    for (auto& [i0, c] : by_i0) {
        groups.rows.push_back({double(i0), c});
        grp_min = std::min(grp_min, c);
        grp_max = std::max(grp_max, c);
    }

    rep.c_hat = c_full;
    rep.stability_ratio = (c_half > 0.0) ? std::fabs(c_full - c_half) / c_half : 0.0;
    rep.assert_that("c_hat_finite", std::isfinite(c_full) && c_full > 0.0, c_full, 0.0);
    rep.assert_that("i0_uniformity", grp_max <= opts.uniformity_factor * grp_min,
                    grp_min > 0.0 ? grp_max / grp_min : 0.0, opts.uniformity_factor,
                    "max/min of per-i0 constants");
    rep.assert_that("c_hat_drift", rep.stability_ratio < opts.drift_threshold,
                    rep.stability_ratio, opts.drift_threshold, "atom-count doubling");
    rep.tables.push_back(std::move(per_atom));
    rep.tables.push_back(std::move(groups));
    return rep;
}

/// Same bound for a finite atomic combination, normalized by the atomic-norm
/// proxy of the decomposition.
inline EstimateReport check_sum_fourier_bound(const AtomicSum& sum, const Dilation& d,
                                              const ExponentVector& pv, const ShellPoints& pts,
                                              unsigned threads = 1) {
    if (!pv.all_in_unit_interval())
        throw Error("transform bound check requires exponents in (0,1]");
    EstimateReport rep;
    rep.experiment = "verify-thm31";
    const double pm = pv.p_minus(), pp = pv.p_plus();
    const double atomic = atomic_norm(sum, d, pv);

    FourierEvaluation ev = fourier_finite_sum(sum, pts.points, threads);
    SampleTable raw{"ratios", {"rho_star", "abs_f", "bound", "ratio"}, {}};
    double c_hat = 0.0;
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        double bound = atomic * quasi_power_bound(pts.rho_star[i], pm, pp);
        double num = std::abs(ev.values[i]);
        double r = (bound > 0.0) ? num / bound : 0.0;
        raw.rows.push_back({pts.rho_star[i], num, bound, r});
        c_hat = std::max(c_hat, r);
    }
    rep.c_hat = c_hat;
    rep.metadata["atomic_norm"] = atomic;
    rep.assert_that("ratio_sup_finite", std::isfinite(c_hat), c_hat, 0.0);
    rep.tables.push_back(std::move(raw));
    return rep;
}

// ---------------------------------------------------------------------------
// origin decay

struct OriginDecayOptions {
    std::vector<Vector> directions;
    std::vector<double> ts; // ascending; rays run toward 0
    unsigned threads = 1;
    double slope_tolerance = 0.2;
    double drop_factor = 0.05;
};

/// Convergence rate of R(x) = |F(x)| / rho_*(x)^{1/p_+ - 1} along rays toward
/// the origin; the expected log-log slope against rho_* is at least
/// beta = (s+1) ln(l_-)/ln b + 1 - 1/p_+.
inline EstimateReport check_origin_decay(const AtomicSum& sum, const Dilation& d,
                                         const QuasiNormEvaluator& e_star,
                                         const ExponentVector& pv,
                                         const OriginDecayOptions& opts) {
    if (!pv.all_in_unit_interval()) throw Error("origin decay requires exponents in (0,1]");
    sum.validate();
    EstimateReport rep;
    rep.experiment = "decay-origin";

    int s_min = std::numeric_limits<int>::max();
    for (const auto& a : sum.atoms) s_min = std::min(s_min, a.s_order);
    const double pp = pv.p_plus();
    const double beta =
        double(s_min + 1) * std::log(d.lambda_minus()) / std::log(d.b()) + 1.0 - 1.0 / pp;
    rep.metadata["beta"] = beta;

    SampleTable plot{"decay", {"ray", "t", "rho_star", "ratio", "fit_line"}, {}};
    double min_slope = std::numeric_limits<double>::infinity();
    double max_residual = 0.0;
    double worst_drop = 0.0;
    std::size_t excluded = 0;
    for (std::size_t ri = 0; ri < opts.directions.size(); ++ri) {
        std::vector<Vector> pts;
        for (double t : opts.ts) pts.push_back(t * opts.directions[ri]);
        FourierEvaluation ev = fourier_finite_sum(sum, pts, opts.threads);

        std::vector<double> lx, ly, rho_vals, ratios;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double rho = e_star.rho(pts[i]);
            double ratio = std::abs(ev.values[i]) / std::pow(rho, 1.0 / pp - 1.0);
            rho_vals.push_back(rho);
            ratios.push_back(ratio);
            if (ev.flagged[i] || !(ratio > 0.0)) {
                ++excluded;
                continue;
            }
            lx.push_back(std::log(rho));
            ly.push_back(std::log(ratio));
        }
        LineFit f = fit_line(lx, ly);
        rep.fits.push_back({"ray" + std::to_string(ri), f});
        min_slope = std::min(min_slope, f.slope);
        max_residual = std::max(max_residual, f.rms_residual);
        if (!ratios.empty() && ratios.back() > 0.0)
            worst_drop = std::max(worst_drop, ratios.front() / ratios.back());
        for (std::size_t i = 0; i < pts.size(); ++i)
            plot.rows.push_back({double(ri), opts.ts[i], rho_vals[i], ratios[i],
                                 std::exp(f.intercept + f.slope * std::log(rho_vals[i]))});
    }

    rep.c_hat = min_slope;
    rep.metadata["excluded_points"] = double(excluded);
    rep.assert_that("slope_at_least_beta", min_slope >= beta - opts.slope_tolerance, min_slope,
                    beta - opts.slope_tolerance);
    rep.assert_that("fit_residual", max_residual < 0.15, max_residual, 0.15);
    rep.assert_that("ratio_drop", worst_drop <= opts.drop_factor, worst_drop, opts.drop_factor,
                    "R(smallest t) / R(largest t), worst ray");
    rep.tables.push_back(std::move(plot));
    return rep;
}

// ---------------------------------------------------------------------------
// weighted integrability of transforms (shell integrals)

struct ShellIntegralOptions {
    int j_lo = -10;
    int j_hi = 10;
    std::size_t base_resolution = 24;
    unsigned threads = 1;
    double drift_threshold = 0.10;
    double uniformity_factor = 10.0;
    double tail_fraction = 0.10;
};

namespace detail {

struct ShellIntegral {
    double total = 0.0; // sum of shell contributions (the p+ power form)
    double tail = 0.0;  // geometric extrapolation beyond the window
    std::vector<double> per_shell;
};

inline double fitted_tail(const std::vector<double>& t, bool high_side) {
    // geometric extrapolation from the outer four shells
    const std::size_t m = t.size();
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < 4 && k < m; ++k) {
        std::size_t idx = high_side ? m - 4 + k : 3 - k;
        if (idx >= m) continue;
        if (!(t[idx] > 0.0)) return 0.0; // integrand numerically dead out here
        lx.push_back(double(k));
        ly.push_back(std::log(t[idx]));
    }
    if (lx.size() < 2) return 0.0;
    LineFit f = fit_line(lx, ly);
    double q = std::exp(f.slope); // successive-shell ratio moving outward
    double edge = high_side ? t[m - 1] : t[0];
    if (!(q < 1.0)) return std::numeric_limits<double>::infinity();
    return edge * q / (1.0 - q);
}

inline ShellIntegral weighted_shell_integral(const Atom& atom, const Dilation& d_star,
                                             const ExponentVector& pv, const ShellQuadrature& base,
                                             int j_lo, int j_hi, unsigned threads) {
    const double pp = pv.p_plus();
    const double e1 = 1.0 - 1.0 / pv.p_minus() - 1.0 / pp;
    const double e2 = 1.0 - 2.0 / pp;
    ShellIntegral out;
    for (int j = j_lo; j <= j_hi; ++j) {
        Matrix aj = d_star.power(j);
        std::vector<Vector> pts(base.nodes.size());
        for (std::size_t i = 0; i < base.nodes.size(); ++i) pts[i] = aj * base.nodes[i];
        FourierEvaluation ev = fourier_atom_direct(atom, pts, threads);
        const double bj = std::pow(d_star.b(), double(j));
        const double weight = std::min(std::pow(d_star.b(), double(j) * e1),
                                       std::pow(d_star.b(), double(j) * e2));
        KahanSum s;
        for (std::size_t i = 0; i < pts.size(); ++i)
            s.add(base.weights[i] * std::pow(std::abs(ev.values[i]) * weight, pp));
        out.per_shell.push_back(bj * s.value());
    }
    KahanSum tot;
    for (double v : out.per_shell) tot.add(v);
    out.total = tot.value();
    out.tail = fitted_tail(out.per_shell, true) + fitted_tail(out.per_shell, false);
    return out;
}

} // namespace detail

/// Shell-quadrature estimate of the uniform weighted integrability bound
/// ( int [ |a^(x)| min{rho_*^{1-1/p_- - 1/p_+}, rho_*^{1-2/p_+}} ]^{p_+} dx )^{1/p_+} <= M
/// for a family of L^2-normalized atoms. Throws TailDominant when the
/// extrapolated tail exceeds its budget.
inline EstimateReport check_weighted_integrability(const Dilation& d, const ExponentVector& pv,
                                                   const std::vector<Atom>& atoms,
                                                   const ShellIntegralOptions& opts = {},
                                                   const AtomicSum* sum = nullptr) {
    if (!pv.all_in_unit_interval())
        throw Error("weighted integrability requires exponents in (0,1]");
    EstimateReport rep;
    rep.experiment = "hardy-littlewood";
    const Dilation d_star = d.transpose();
    const double pp = pv.p_plus();

    // branch coincidence: for p- = p+ the two weight exponents agree exactly
    const double e1 = 1.0 - 1.0 / pv.p_minus() - 1.0 / pp;
    const double e2 = 1.0 - 2.0 / pp;
    if (pv.p_minus() == pv.p_plus())
        rep.assert_that("branch_coincidence", e1 == e2, e1, e2,
                        "weight exponents coincide when p- = p+");

    ShellQuadrature base = shell_quadrature(d_star, opts.base_resolution);
    std::size_t finer_res = std::size_t(std::ceil(double(opts.base_resolution) * 1.4142135623730951));
    ShellQuadrature fine = shell_quadrature(d_star, finer_res);

    SampleTable per_atom{"shell_integrals",
                         {"atom", "i0", "value", "tail_fraction", "doubling_drift"},
                         {}};
    SampleTable shells{"per_shell", {"atom", "shell", "contribution"}, {}};
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0, max_drift = 0.0,
           max_tail_frac = 0.0;
    for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
        auto coarse = detail::weighted_shell_integral(atoms[ai], d_star, pv, base, opts.j_lo,
                                                      opts.j_hi, opts.threads);
        auto refined = detail::weighted_shell_integral(atoms[ai], d_star, pv, fine, opts.j_lo,
                                                       opts.j_hi, opts.threads);
        double tail_frac = (refined.total > 0.0) ? refined.tail / refined.total : 0.0;
        if (!(tail_frac <= opts.tail_fraction))
            throw TailDominant("atom " + std::to_string(ai) + ": extrapolated tail " +
                               std::to_string(tail_frac) + " of the shell integral");
        double v = std::pow(refined.total, 1.0 / pp);
        double v0 = std::pow(coarse.total, 1.0 / pp);
        double drift = (v > 0.0) ? std::fabs(v - v0) / v : 0.0;
        per_atom.rows.push_back(
            {double(ai), double(atoms[ai].ball.i0), v, tail_frac, drift});
        for (std::size_t k = 0; k < refined.per_shell.size(); ++k)
            shells.rows.push_back({double(ai), double(opts.j_lo + int(k)), refined.per_shell[k]});
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        max_drift = std::max(max_drift, drift);
        max_tail_frac = std::max(max_tail_frac, tail_frac);
    }

    rep.c_hat = vmax;
    rep.stability_ratio = max_drift;
    rep.assert_that("integral_finite", std::isfinite(vmax) && vmax > 0.0, vmax, 0.0);
    rep.assert_that("i0_uniformity", vmax <= opts.uniformity_factor * vmin,
                    vmin > 0.0 ? vmax / vmin : 0.0, opts.uniformity_factor);
    rep.assert_that("doubling_drift", max_drift < opts.drift_threshold, max_drift,
                    opts.drift_threshold, "shell-sample doubling");
    rep.assert_that("tail_fraction", max_tail_frac <= opts.tail_fraction, max_tail_frac,
                    opts.tail_fraction);

    if (sum != nullptr) {
        sum->validate();
        KahanSum cs;
        for (const auto& c : sum->coefficients) cs.add(std::pow(std::abs(c), pp));
        double coef = std::pow(cs.value(), 1.0 / pp);
        double atomic = atomic_norm(*sum, d, pv);
        rep.metadata["coefficient_lp_sum"] = coef;
        rep.metadata["atomic_norm"] = atomic;
        rep.assert_that("coefficient_bound", coef <= 1.03 * atomic, coef, 1.03 * atomic,
                        "(sum |l|^p+)^{1/p+} against the atomic norm");
    }

    rep.tables.push_back(std::move(per_atom));
    rep.tables.push_back(std::move(shells));
    return rep;
}

} // namespace aniso
