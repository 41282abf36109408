#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "aniso/dilation.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/numerics.hpp"

namespace aniso {

constexpr double kInfExponent = std::numeric_limits<double>::infinity();

/// Exponent vector p = (p_1, ..., p_n), entries in (0, inf].
struct ExponentVector {
    std::vector<double> p;

    explicit ExponentVector(std::vector<double> exps) : p(std::move(exps)) {
        if (p.empty()) throw ShapeMismatch("exponent vector must be nonempty");
        for (double v : p)
            if (!(v > 0.0)) throw Error("exponents must be positive (inf allowed)");
    }

    int n() const { return int(p.size()); }
    double p_minus() const { return *std::min_element(p.begin(), p.end()); }
    double p_plus() const { return *std::max_element(p.begin(), p.end()); }
    double p_underline() const { return std::min(p_minus(), 1.0); }

    bool all_in_unit_interval() const {
        for (double v : p)
            if (!(v <= 1.0)) return false;
        return true;
    }
};

/// Iterated mixed norm: L^{p_1} along axis 0 first (innermost), then L^{p_2}
/// along axis 1, and so on. p_i = inf axes take the grid sup, which is a
/// lower bound for the essential sup.
inline double mixed_norm_eval(const GridFunction& f, const ExponentVector& pv) {
    if (pv.n() != f.dims())
        throw ShapeMismatch("exponent count differs from grid dimension");

    // |f| as a flat real array, then reduce one axis at a time.
    std::vector<double> cur(f.total_size());
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = std::abs(f.values()[i]);

    for (int k = 0; k < f.dims(); ++k) {
        const Axis& ax = f.axis(k);
        const std::size_t len = ax.size();
        const double pk = pv.p[std::size_t(k)];
        const std::size_t outer = cur.size() / len;
        std::vector<double> next(outer);
        // Once axes < k are reduced, axis k is the fastest index, so each
        // reduction runs over a contiguous column.
        for (std::size_t o = 0; o < outer; ++o) {
            const double* col = cur.data() + o * len;
            if (pk == kInfExponent) {
                double m = 0.0;
                for (std::size_t j = 0; j < len; ++j) m = std::max(m, col[j]);
                next[o] = m;
            } else {
                KahanSum s;
                for (std::size_t j = 0; j < len; ++j)
                    s.add(ax.weights[j] * std::pow(col[j], pk));
                next[o] = std::pow(s.value(), 1.0 / pk);
            }
        }
        cur = std::move(next);
    }
    return cur[0];
}

/// Center plus scale index: the dilated ball x0 + B_{i0}, volume b^{i0}.
struct DilatedBall {
    Vector center;
    int i0 = 0;
};

struct IndicatorNorm {
    double value = 0.0;
    double est_rel_err = 0.0; // one-step refinement estimate
};

namespace detail {

inline GridFunction rasterize_ball(const Dilation& d, const DilatedBall& ball,
                                   std::size_t resolution) {
    Vector h = d.ball_half_widths(ball.i0);
    std::vector<Axis> axes;
    axes.reserve(std::size_t(d.n()));
    for (int k = 0; k < d.n(); ++k)
        axes.push_back(Axis::midpoint(ball.center[k] - h[k], ball.center[k] + h[k], resolution));
    GridFunction g(std::move(axes));
    g.for_each([&](std::size_t flat, const Vector& x, double) {
        if (d.ball_member(x - ball.center, ball.i0)) g.values()[flat] = 1.0;
    });
    return g;
}

} // namespace detail

/// Mixed norm of the ball indicator by cell-center rasterization. The value
/// is taken from a once-refined grid and the relative step difference is
/// reported as the error estimate.
inline IndicatorNorm indicator_ball_norm(const Dilation& d, const DilatedBall& ball,
                                         const ExponentVector& pv, std::size_t resolution) {
    if (resolution < 32) throw Error("indicator rasterization needs >= 32 nodes per axis");
    double coarse = mixed_norm_eval(detail::rasterize_ball(d, ball, resolution), pv);
    double fine = mixed_norm_eval(detail::rasterize_ball(d, ball, 2 * resolution), pv);
    IndicatorNorm out;
    out.value = fine;
    out.est_rel_err = (fine > 0.0) ? std::fabs(fine - coarse) / fine : 0.0;
    return out;
}

/// Scaling check for indicator norms: the reciprocal norm against
/// max{b^(-i/p-), b^(-i/p+)}. The bound estimate (max ratio, attained near
/// i = 0) must be stable when the index range widens.
struct IndicatorBoundReport {
    std::vector<int> indices;
    std::vector<double> ratios;
    double bound_full = 0.0;  // max ratio over the full range
    double bound_inner = 0.0; // max ratio over the middle half
    double drift = 0.0;       // bound_full/bound_inner - 1
    bool pass = false;
};

inline IndicatorBoundReport check_indicator_bound(const Dilation& d, const ExponentVector& pv,
                                                  int i_lo, int i_hi,
                                                  std::size_t resolution = 64) {
    if (!pv.all_in_unit_interval())
        throw Error("indicator bound check requires exponents in (0,1]");
    IndicatorBoundReport rep;
    const double pm = pv.p_minus(), pp = pv.p_plus();
    for (int i = i_lo; i <= i_hi; ++i) {
        DilatedBall ball{Vector::Zero(d.n()), i};
        double nrm = indicator_ball_norm(d, ball, pv, resolution).value;
        double denom = std::max(std::pow(d.b(), -double(i) / pm), std::pow(d.b(), -double(i) / pp));
        rep.indices.push_back(i);
        rep.ratios.push_back(1.0 / (nrm * denom));
    }
    auto max_over = [&](int lo, int hi) {
        double m = 0.0;
        for (std::size_t j = 0; j < rep.indices.size(); ++j)
            if (rep.indices[j] >= lo && rep.indices[j] <= hi) m = std::max(m, rep.ratios[j]);
        return m;
    };
    rep.bound_full = max_over(i_lo, i_hi);
    rep.bound_inner = max_over(i_lo / 2, i_hi / 2);
    rep.drift = (rep.bound_inner > 0.0) ? rep.bound_full / rep.bound_inner - 1.0 : 0.0;
    rep.pass = std::isfinite(rep.bound_full) && rep.drift < 0.25;
    return rep;
}

} // namespace aniso
