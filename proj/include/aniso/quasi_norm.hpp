#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "aniso/dilation.hpp"
#include "aniso/errors.hpp"
#include "aniso/rng.hpp"

namespace aniso {

struct IndexRange {
    int lo = -60;
    int hi = 60;
};

/// Step homogeneous quasi-norm: rho(x) = b^i on the shell B_{i+1} \ B_i and
/// rho(0) = 0. Evaluation binary-searches the monotone membership predicate
/// i -> (x in B_i); a linear-scan oracle lives in the tests.
class QuasiNormEvaluator {
  public:
    explicit QuasiNormEvaluator(const Dilation& d, IndexRange range = {})
        : dilation_(d), range_(range) {
        // Power table anchored at the bottom of the range with an upward
        // recurrence t[i+1] = b * t[i]. The recurrence makes the homogeneity
        // identity rho(Ax) == b * rho(x) exact in floating point for every
        // index, at the price of <= ~1e-15 relative drift from true b^i.
        table_.resize(std::size_t(range_.hi - range_.lo + 2));
        table_[0] = std::pow(d.b(), double(range_.lo));
        for (std::size_t k = 1; k < table_.size(); ++k)
            table_[k] = d.b() * table_[k - 1];
    }

    const Dilation& dilation() const { return dilation_; }
    IndexRange range() const { return range_; }

    /// b^i as used for rho values (exact-recurrence table).
    double value_for_index(int i) const {
        if (i < range_.lo || i > range_.hi + 1)
            throw IndexSaturation("index " + std::to_string(i) + " outside table range");
        return table_[std::size_t(i - range_.lo)];
    }

    /// Shell index i with x in B_{i+1} \ B_i. Throws IndexSaturation when the
    /// index would leave the range; never clamps.
    int index(const Vector& x) const {
        if (x.isZero(0.0))
            throw IndexSaturation("index of the origin is -infinity");
        if (!x.allFinite()) throw Error("quasi-norm argument must be finite");

        // smallest j in [lo, hi] with x in B_j; shell index is j - 1
        if (dilation_.ball_member(x, range_.lo))
            throw IndexSaturation("point resolves below index range");
        if (!dilation_.ball_member(x, range_.hi))
            throw IndexSaturation("point resolves above index range");

        int lo = range_.lo, hi = range_.hi; // member(lo) false, member(hi) true
        while (hi - lo > 1) {
            int mid = lo + (hi - lo) / 2;
            if (dilation_.ball_member(x, mid))
                hi = mid;
            else
                lo = mid;
        }
        // Monotonicity consistency of the observed predicate values.
        if (dilation_.ball_member(x, lo) || !dilation_.ball_member(x, hi))
            throw Error("membership predicate not monotone during index search");
        return hi - 1;
    }

    /// rho(x); 0 exactly when x = 0.
    double rho(const Vector& x) const {
        if (x.isZero(0.0)) return 0.0;
        return value_for_index(index(x));
    }

  private:
    Dilation dilation_;
    IndexRange range_;
    std::vector<double> table_;
};

/// Empirical two-sided comparison constants between |x| and powers of rho(x).
/// For rho > 1:  c^-1 rho^(ln l-/ln b) <= |x| <= c rho^(ln l+/ln b);
/// for rho <= 1 the exponents swap. Each constant is the extremal sampled ratio.
struct EnvelopeReport {
    struct Regime {
        double c_lower = 0.0; // max of rho^e_low / |x|
        double c_upper = 0.0; // max of |x| / rho^e_high
        std::size_t samples = 0;
    };
    Regime above_one; // rho(x) > 1
    Regime below_one; // rho(x) <= 1
    std::size_t saturated = 0;
};

inline EnvelopeReport euclidean_envelope(const QuasiNormEvaluator& e, std::size_t sample_count,
                                         Rng rng) {
    const Dilation& d = e.dilation();
    const double exp_minus = std::log(d.lambda_minus()) / std::log(d.b());
    const double exp_plus = std::log(d.lambda_plus()) / std::log(d.b());

    EnvelopeReport rep;
    for (std::size_t i = 0; i < sample_count; ++i) {
        Vector u(d.n());
        for (int k = 0; k < d.n(); ++k) u[k] = rng.normal();
        if (u.norm() == 0.0) continue;
        u /= u.norm();
        double t = rng.log_uniform(1e-4, 1e4);
        Vector x = t * u;
        double r;
        try {
            r = e.rho(x);
        } catch (const IndexSaturation&) {
            ++rep.saturated;
            continue;
        }
        double nx = x.norm();
        if (r > 1.0) {
            auto& g = rep.above_one;
            g.c_lower = std::max(g.c_lower, std::pow(r, exp_minus) / nx);
            g.c_upper = std::max(g.c_upper, nx / std::pow(r, exp_plus));
            ++g.samples;
        } else {
            auto& g = rep.below_one;
            g.c_lower = std::max(g.c_lower, std::pow(r, exp_plus) / nx);
            g.c_upper = std::max(g.c_upper, nx / std::pow(r, exp_minus));
            ++g.samples;
        }
    }
    return rep;
}

/// Empirical quasi-triangle constant max rho(x+y) / (rho(x) + rho(y)).
inline double quasi_triangle_constant(const QuasiNormEvaluator& e, std::size_t sample_count,
                                      Rng rng) {
    const Dilation& d = e.dilation();
    double c_hat = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        Vector x(d.n()), y(d.n());
        double tx = rng.log_uniform(1e-3, 1e3);
        double ty = rng.log_uniform(1e-3, 1e3);
        for (int k = 0; k < d.n(); ++k) x[k] = rng.normal();
        for (int k = 0; k < d.n(); ++k) y[k] = rng.normal();
        if (x.norm() == 0.0 || y.norm() == 0.0) continue;
        x *= tx / x.norm();
        y *= ty / y.norm();
        try {
            double denom = e.rho(x) + e.rho(y);
            Vector s = x + y;
            double num = s.isZero(0.0) ? 0.0 : e.rho(s);
            if (denom > 0.0) c_hat = std::max(c_hat, num / denom);
        } catch (const IndexSaturation&) {
            continue;
        }
    }
    if (!std::isfinite(c_hat)) throw Error("quasi-triangle constant not finite");
    return c_hat;
}

} // namespace aniso
