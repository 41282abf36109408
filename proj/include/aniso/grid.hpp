#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "aniso/dilation.hpp"
#include "aniso/errors.hpp"

namespace aniso {

/// One grid dimension: strictly increasing nodes with positive quadrature
/// weights (composite midpoint unless stated otherwise).
struct Axis {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    /// Uniform midpoint axis with `count` cells on [lo, hi].
    static Axis midpoint(double lo, double hi, std::size_t count) {
        Axis a;
        a.nodes.resize(count);
        a.weights.resize(count);
        const double h = (hi - lo) / double(count);
        for (std::size_t j = 0; j < count; ++j) {
            a.nodes[j] = lo + (double(j) + 0.5) * h;
            a.weights[j] = h;
        }
        return a;
    }
};

/// Tensor-product grid samples. Values are stored with axis 0 fastest, i.e.
/// flat index i0 + len0*(i1 + len1*(i2 + ...)). Axis 0 carries the innermost
/// integration variable of the mixed norm.
class GridFunction {
  public:
    GridFunction() = default;
    GridFunction(std::vector<Axis> axes) : axes_(std::move(axes)) {
        validate_axes();
        values_.assign(total_size(), {0.0, 0.0});
    }
    GridFunction(std::vector<Axis> axes, std::vector<std::complex<double>> values)
        : axes_(std::move(axes)), values_(std::move(values)) {
        validate_axes();
        if (values_.size() != total_size())
            throw ShapeMismatch("value array extent does not match the grid");
    }

    int dims() const { return int(axes_.size()); }
    const std::vector<Axis>& axes() const { return axes_; }
    const Axis& axis(int k) const { return axes_[std::size_t(k)]; }
    const std::vector<std::complex<double>>& values() const { return values_; }
    std::vector<std::complex<double>>& values() { return values_; }

    std::size_t total_size() const {
        std::size_t t = 1;
        for (const auto& a : axes_) t *= a.size();
        return t;
    }

    /// Coordinates of the flat-index cell center.
    Vector node(std::size_t flat) const {
        Vector x(dims());
        for (int k = 0; k < dims(); ++k) {
            std::size_t len = axes_[std::size_t(k)].size();
            x[k] = axes_[std::size_t(k)].nodes[flat % len];
            flat /= len;
        }
        return x;
    }

    /// Product of per-axis weights for the flat-index cell.
    double weight(std::size_t flat) const {
        double w = 1.0;
        for (int k = 0; k < dims(); ++k) {
            std::size_t len = axes_[std::size_t(k)].size();
            w *= axes_[std::size_t(k)].weights[flat % len];
            flat /= len;
        }
        return w;
    }

    /// Visit every cell: fn(flat_index, node, weight). Iteration order is the
    /// flat storage order.
    template <typename Fn> void for_each(Fn&& fn) const {
        const int n = dims();
        std::vector<std::size_t> idx(std::size_t(n), 0);
        Vector x(n);
        for (int k = 0; k < n; ++k) x[k] = axes_[std::size_t(k)].nodes[0];
        const std::size_t total = total_size();
        for (std::size_t flat = 0; flat < total; ++flat) {
            double w = 1.0;
            for (int k = 0; k < n; ++k) w *= axes_[std::size_t(k)].weights[idx[std::size_t(k)]];
            fn(flat, x, w);
            // odometer increment
            for (int k = 0; k < n; ++k) {
                auto& a = axes_[std::size_t(k)];
                if (++idx[std::size_t(k)] < a.size()) {
                    x[k] = a.nodes[idx[std::size_t(k)]];
                    break;
                }
                idx[std::size_t(k)] = 0;
                x[k] = a.nodes[0];
            }
        }
    }

  private:
    void validate_axes() {
        if (axes_.empty()) throw ShapeMismatch("grid needs at least one axis");
        for (const auto& a : axes_) {
            if (a.nodes.size() != a.weights.size() || a.nodes.empty())
                throw ShapeMismatch("axis nodes/weights mismatch");
            for (std::size_t j = 0; j + 1 < a.nodes.size(); ++j)
                if (!(a.nodes[j] < a.nodes[j + 1]))
                    throw ShapeMismatch("axis nodes must be strictly increasing");
            for (double w : a.weights)
                if (!(w > 0.0)) throw ShapeMismatch("axis weights must be positive");
        }
    }

    std::vector<Axis> axes_;
    std::vector<std::complex<double>> values_;
};

} // namespace aniso
