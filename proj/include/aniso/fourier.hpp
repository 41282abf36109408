#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "aniso/atoms.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/numerics.hpp"

namespace aniso {

/// Transform values at a set of frequency points, plus per-point phase
/// bookkeeping. `flagged` marks points whose cell-phase stayed >= 0.5 rad
/// after the refinement cap (value still returned).
struct FourierEvaluation {
    enum class Method { direct, dilation_identity };

    std::vector<Vector> points;
    std::vector<std::complex<double>> values;
    Method method = Method::direct;
    std::vector<double> phase_residual;
    std::vector<char> flagged;

    std::size_t flagged_count() const {
        std::size_t c = 0;
        for (char f : flagged) c += std::size_t(f != 0);
        return c;
    }
};

namespace detail {

constexpr double kTwoPi = 6.283185307179586477;

/// Average of e^{-2 pi i theta ((q+1/2)/m - 1/2)} over q < m: the exact phase
/// factor of splitting one cell into m equal subcells that reuse the parent
/// sample. Closed form is the Dirichlet ratio sin(pi theta)/(m sin(pi theta/m)).
inline double subdivision_factor(double theta, int m) {
    if (m <= 1) return 1.0;
    double denom = std::sin(3.14159265358979323846 * theta / double(m));
    if (std::fabs(denom) < 1e-9) {
        double acc = 0.0;
        for (int q = 0; q < m; ++q)
            acc += std::cos(kTwoPi * theta * ((double(q) + 0.5) / double(m) - 0.5));
        return acc / double(m);
    }
    return std::sin(3.14159265358979323846 * theta) / (double(m) * denom);
}

struct OscResult {
    std::complex<double> value{0.0, 0.0};
    double residual_phase = 0.0; // worst per-cell phase left after refinement
    bool flagged = false;
};

/// sum_cells v_j prod_k w_kj S_kj exp(-2 pi i freq_k (node_kj + offset_k)).
///
/// Per-axis phase budget is 0.5/n rad per cell; cells over budget are split
/// 2x per level (piecewise-constant sample model) up to 4 levels, which the
/// separable S factor realizes in closed form. `axis_power` optionally folds
/// a monomial (-2 pi i t)^alpha into the integrand.
inline OscResult oscillatory_sum(const GridFunction& g, const Vector& freq, const Vector& offset,
                                 const std::vector<int>* axis_power = nullptr) {
    const int n = g.dims();
    const double budget = 0.5 / double(n);

    std::vector<std::vector<std::complex<double>>> fac(std::size_t(n));
    double residual_total = 0.0;
    for (int k = 0; k < n; ++k) {
        const Axis& ax = g.axis(k);
        auto& fk = fac[std::size_t(k)];
        fk.resize(ax.size());
        double worst = 0.0;
        for (std::size_t j = 0; j < ax.size(); ++j) {
            const double w = ax.weights[j];
            const double theta = freq[k] * w; // cycles across the cell
            const double phase = kTwoPi * std::fabs(theta);
            int level = 0;
            if (phase > budget) level = int(std::ceil(std::log2(phase / budget)));
            level = std::min(level, 4);
            const int m = 1 << level;
            worst = std::max(worst, phase / double(m));
            const double t = ax.nodes[j] + offset[k];
            const double arg = -kTwoPi * freq[k] * t;
            std::complex<double> c =
                w * subdivision_factor(theta, m) * std::complex<double>(std::cos(arg), std::sin(arg));
            if (axis_power != nullptr) {
                const int p = (*axis_power)[std::size_t(k)];
                const std::complex<double> base(0.0, -kTwoPi * t); // (-2 pi i t)
                for (int e = 0; e < p; ++e) c *= base;
            }
            fk[j] = c;
        }
        residual_total += worst;
    }

    // axis 0 is contiguous; accumulate one block per outer multi-index
    const std::size_t len0 = g.axis(0).size();
    const std::size_t outer = g.total_size() / len0;
    std::vector<std::size_t> idx(std::size_t(n), 0);
    KahanComplex acc;
    const auto& vals = g.values();
    for (std::size_t o = 0; o < outer; ++o) {
        std::complex<double> pref(1.0, 0.0);
        for (int k = 1; k < n; ++k) pref *= fac[std::size_t(k)][idx[std::size_t(k)]];
        const std::complex<double>* row = vals.data() + o * len0;
        std::complex<double> block(0.0, 0.0);
        const auto& f0 = fac[0];
        for (std::size_t j = 0; j < len0; ++j) block += row[j] * f0[j];
        acc.add(block * pref);
        for (int k = 1; k < n; ++k) {
            if (++idx[std::size_t(k)] < g.axis(k).size()) break;
            idx[std::size_t(k)] = 0;
        }
    }

    OscResult out;
    out.value = acc.value();
    out.residual_phase = residual_total;
    out.flagged = residual_total >= 0.5;
    return out;
}

} // namespace detail

/// Direct oscillatory quadrature of the atom's ambient samples.
inline FourierEvaluation fourier_atom_direct(const Atom& atom, const std::vector<Vector>& x_points,
                                             unsigned threads = 1) {
    if (!atom.certified) throw Error("fourier transform requires a certified atom");
    FourierEvaluation ev;
    ev.method = FourierEvaluation::Method::direct;
    ev.points = x_points;
    ev.values.resize(x_points.size());
    ev.phase_residual.resize(x_points.size());
    ev.flagged.resize(x_points.size());
    const Vector zero = Vector::Zero(atom.samples.dims());
    parallel_for(x_points.size(), threads, [&](std::size_t i) {
        auto r = detail::oscillatory_sum(atom.samples, x_points[i], zero);
        ev.values[i] = r.value;
        ev.phase_residual[i] = r.residual_phase;
        ev.flagged[i] = r.flagged ? 1 : 0;
    });
    return ev;
}

/// Transform of the scale-normalized atom D_A^{i0} a, evaluated on the
/// canonical-ball grid (the inner object of the dilation identity).
inline FourierEvaluation fourier_canonical(const Atom& atom, const std::vector<Vector>& x_points,
                                           unsigned threads = 1) {
    FourierEvaluation ev;
    ev.method = FourierEvaluation::Method::dilation_identity;
    ev.points = x_points;
    ev.values.resize(x_points.size());
    ev.phase_residual.resize(x_points.size());
    ev.flagged.resize(x_points.size());
    const Vector shift = atom.to_canonical * atom.ball.center; // A^{-i0} x0
    parallel_for(x_points.size(), threads, [&](std::size_t i) {
        auto r = detail::oscillatory_sum(atom.canonical, x_points[i], shift);
        ev.values[i] = r.value;
        ev.phase_residual[i] = r.residual_phase;
        ev.flagged[i] = r.flagged ? 1 : 0;
    });
    return ev;
}

/// Fourier transform through the dilation identity
/// a^(x) = b^{i0} (F[D_A^{i0} a])((A^T)^{i0} x).
inline FourierEvaluation fourier_via_dilation_identity(const Atom& atom,
                                                       const std::vector<Vector>& x_points,
                                                       unsigned threads = 1) {
    if (!atom.certified) throw Error("fourier transform requires a certified atom");
    std::vector<Vector> mapped(x_points.size());
    Matrix at_pow = atom.from_canonical.transpose(); // (A^T)^{i0} = (A^{i0})^T
    for (std::size_t i = 0; i < x_points.size(); ++i) mapped[i] = at_pow * x_points[i];
    FourierEvaluation ev = fourier_canonical(atom, mapped, threads);
    ev.points = x_points;
    const double bk = atom.det_b_i0();
    for (auto& v : ev.values) v *= bk;
    return ev;
}

/// d^alpha (F D_A^{i0} a)(x): quadrature of the (-2 pi i t)^alpha weighted
/// integrand over the canonical ball.
inline FourierEvaluation fourier_derivative(const Atom& atom, const std::vector<int>& alpha,
                                            const std::vector<Vector>& x_points,
                                            unsigned threads = 1) {
    int order = 0;
    for (int a : alpha) order += a;
    if (order > atom.s_order)
        throw Error("derivative order exceeds the atom's vanishing-moment order");
    FourierEvaluation ev;
    ev.method = FourierEvaluation::Method::direct;
    ev.points = x_points;
    ev.values.resize(x_points.size());
    ev.phase_residual.resize(x_points.size());
    ev.flagged.resize(x_points.size());
    const Vector shift = atom.to_canonical * atom.ball.center;
    parallel_for(x_points.size(), threads, [&](std::size_t i) {
        auto r = detail::oscillatory_sum(atom.canonical, x_points[i], shift, &alpha);
        ev.values[i] = r.value;
        ev.phase_residual[i] = r.residual_phase;
        ev.flagged[i] = r.flagged ? 1 : 0;
    });
    return ev;
}

/// F(x) = sum_i lambda_i a_i^(x), each term through the direct path.
inline FourierEvaluation fourier_finite_sum(const AtomicSum& sum, const std::vector<Vector>& x_points,
                                            unsigned threads = 1) {
    sum.validate();
    FourierEvaluation ev;
    ev.method = FourierEvaluation::Method::direct;
    ev.points = x_points;
    ev.values.assign(x_points.size(), {0.0, 0.0});
    ev.phase_residual.assign(x_points.size(), 0.0);
    ev.flagged.assign(x_points.size(), 0);
    for (std::size_t t = 0; t < sum.atoms.size(); ++t) {
        FourierEvaluation term;
        try {
            term = fourier_atom_direct(sum.atoms[t], x_points, threads);
        } catch (const Error& e) {
            throw Error("term " + std::to_string(t) + ": " + e.what());
        }
        for (std::size_t i = 0; i < x_points.size(); ++i) {
            ev.values[i] += sum.coefficients[t] * term.values[i];
            ev.phase_residual[i] = std::max(ev.phase_residual[i], term.phase_residual[i]);
            ev.flagged[i] = char(ev.flagged[i] | term.flagged[i]);
        }
    }
    return ev;
}

} // namespace aniso
