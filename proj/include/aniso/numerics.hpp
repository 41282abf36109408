#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace aniso {

/// Neumaier compensated accumulator. Summation order is always the iteration
/// order, so results are independent of how work is partitioned.
class KahanSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct KahanComplex {
    KahanSum re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

/// Least-squares line fit in given coordinates (typically log-log).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0; // RMS of residuals in the fit coordinates
    double slope_half_width = 0.0; // ~95% confidence half-width for the slope
    std::size_t n = 0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    f.n = xs.size();
    if (f.n < 2) return f;
    KahanSum sx, sy;
    for (std::size_t i = 0; i < f.n; ++i) {
        sx.add(xs[i]);
        sy.add(ys[i]);
    }
    const double mx = sx.value() / double(f.n);
    const double my = sy.value() / double(f.n);
    KahanSum sxx, sxy;
    for (std::size_t i = 0; i < f.n; ++i) {
        sxx.add((xs[i] - mx) * (xs[i] - mx));
        sxy.add((xs[i] - mx) * (ys[i] - my));
    }
    f.slope = sxy.value() / sxx.value();
    f.intercept = my - f.slope * mx;
    KahanSum srr;
    for (std::size_t i = 0; i < f.n; ++i) {
        double r = ys[i] - (f.intercept + f.slope * xs[i]);
        srr.add(r * r);
    }
    f.rms_residual = std::sqrt(srr.value() / double(f.n));
    if (f.n > 2) {
        double se = std::sqrt(srr.value() / double(f.n - 2) / sxx.value());
        f.slope_half_width = 2.0 * se;
    }
    return f;
}

/// Static block partition over [0, n). Results must be written to disjoint
/// slots by index, so the outcome is identical for any thread count.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    unsigned t = std::min<unsigned>(threads, unsigned(n));
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Volume of the n-dimensional unit Euclidean ball.
inline double unit_ball_volume(int n) {
    return std::pow(3.14159265358979323846, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

} // namespace aniso
