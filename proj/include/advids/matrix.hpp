#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "advids/error.hpp"

namespace advids {

/// Dense row-major matrix of doubles. Rows are samples throughout the library.
struct matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    matrix() = default;
    matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    matrix(std::size_t r, std::size_t c, std::vector<double> values)
        : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != rows * cols)
            throw shape_error("matrix: " + std::to_string(data.size()) + " values for " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    std::vector<double> row(std::size_t r) const {
        return {data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
    }

    void set_row(std::size_t r, const std::vector<double>& v) {
        for (std::size_t c = 0; c < cols; ++c) data[r * cols + c] = v[c];
    }

    bool all_finite() const {
        for (const double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

/// Rows of `m` selected by index, in order.
inline matrix take_rows(const matrix& m, const std::vector<std::size_t>& idx) {
    matrix out(idx.size(), m.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t c = 0; c < m.cols; ++c) out(i, c) = m(idx[i], c);
    return out;
}

inline double linf_distance(const double* a, const double* b, std::size_t n) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double linf_distance(const matrix& a, const matrix& b) {
    if (!a.same_shape(b)) throw shape_error("linf_distance: shape mismatch");
    return linf_distance(a.data.data(), b.data.data(), a.data.size());
}

}  // namespace advids
