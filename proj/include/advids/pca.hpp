#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "advids/error.hpp"
#include "advids/matrix.hpp"

namespace advids {

/// Principal components of a fitted training matrix. `components` holds one
/// component per row (k_max x m, descending variance); ratios sum to at most 1.
struct pca_model {
    std::vector<double> mean;
    matrix components;
    std::vector<double> explained_variance_ratio;
    std::vector<double> eigenvalues;

    std::size_t k_max() const { return components.rows; }
    std::size_t n_features() const { return components.cols; }

    void validate() const {
        if (mean.size() != components.cols)
            throw shape_error("pca_model: mean length does not match component width");
        if (explained_variance_ratio.size() != components.rows ||
            eigenvalues.size() != components.rows)
            throw shape_error("pca_model: ratio count does not match component count");
        for (std::size_t i = 0; i < explained_variance_ratio.size(); ++i) {
            const double r = explained_variance_ratio[i];
            if (r < -1e-12 || r > 1.0 + 1e-12)
                throw data_error("pca_model: ratio outside [0,1]");
            if (i > 0 && explained_variance_ratio[i - 1] < r - 1e-12)
                throw data_error("pca_model: ratios increase at position " + std::to_string(i));
        }
    }
};

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. A is overwritten
/// with (approximately) its diagonalized form; V accumulates the rotations,
/// columns of V are eigenvectors.
inline void jacobi_eigen(matrix& A, matrix& V, int max_sweeps = 100) {
    const std::size_t m = A.rows;
    V = matrix(m, m);
    for (std::size_t i = 0; i < m; ++i) V(i, i) = 1.0;
    if (m < 2) return;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-24) return;

        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
}

}  // namespace detail

/// Mean-center, take the sample covariance, and diagonalize it. Components
/// come out in descending eigenvalue order; each component's sign is fixed so
/// its largest-magnitude entry is positive.
inline pca_model fit_pca(const matrix& X) {
    if (X.rows < 2) throw data_error("fit_pca: need at least 2 rows");
    if (!X.all_finite()) throw numeric_error("fit_pca: non-finite input");
    const std::size_t n = X.rows, m = X.cols;

    pca_model model;
    model.mean.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) model.mean[j] += X(i, j);
    for (double& v : model.mean) v /= static_cast<double>(n);

    matrix cov(m, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < m; ++a) {
            const double da = X(i, a) - model.mean[a];
            for (std::size_t b = a; b < m; ++b)
                cov(a, b) += da * (X(i, b) - model.mean[b]);
        }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            cov(a, b) /= static_cast<double>(n - 1);
            cov(b, a) = cov(a, b);
        }

    matrix V;
    detail::jacobi_eigen(cov, V);

    std::vector<std::pair<double, std::size_t>> eig(m);
    for (std::size_t j = 0; j < m; ++j) eig[j] = {std::max(cov(j, j), 0.0), j};
    std::stable_sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    double total = 0.0;
    for (const auto& [lambda, j] : eig) {
        (void)j;
        total += lambda;
    }

    model.components = matrix(m, m);
    model.eigenvalues.resize(m);
    model.explained_variance_ratio.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t src = eig[r].second;
        model.eigenvalues[r] = eig[r].first;
        model.explained_variance_ratio[r] = (total > 0.0) ? eig[r].first / total : 0.0;

        std::size_t peak = 0;
        for (std::size_t j = 1; j < m; ++j)
            if (std::abs(V(j, src)) > std::abs(V(peak, src))) peak = j;
        const double flip = (V(peak, src) < 0.0) ? -1.0 : 1.0;
        for (std::size_t j = 0; j < m; ++j) model.components(r, j) = flip * V(j, src);
    }
    model.validate();
    return model;
}

/// Smallest k whose cumulative variance ratio reaches the threshold. Data
/// whose total variance is zero has all-zero ratios; every component is kept.
inline std::size_t select_components(const pca_model& model, double threshold) {
    if (!(threshold > 0.0) || threshold > 1.0)
        throw config_error("select_components: threshold must be in (0,1]");
    double cum = 0.0;
    for (std::size_t k = 0; k < model.explained_variance_ratio.size(); ++k) {
        cum += model.explained_variance_ratio[k];
        if (cum >= threshold - 1e-12) return k + 1;
    }
    return model.k_max();
}

/// (X - mean) projected onto the first k components.
inline matrix pca_transform(const pca_model& model, const matrix& X, std::size_t k) {
    if (k < 1 || k > model.k_max())
        throw config_error("pca_transform: k = " + std::to_string(k) + " out of range");
    if (X.cols != model.n_features())
        throw shape_error("pca_transform: input width does not match model");
    matrix out(X.rows, k);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t r = 0; r < k; ++r) {
            double dot = 0.0;
            for (std::size_t j = 0; j < X.cols; ++j)
                dot += (X(i, j) - model.mean[j]) * model.components(r, j);
            out(i, r) = dot;
        }
    return out;
}

/// Back-projection into feature space; the width of Z selects k.
inline matrix pca_inverse_transform(const pca_model& model, const matrix& Z) {
    if (Z.cols < 1 || Z.cols > model.k_max())
        throw config_error("pca_inverse_transform: component count out of range");
    matrix out(Z.rows, model.n_features());
    for (std::size_t i = 0; i < Z.rows; ++i)
        for (std::size_t j = 0; j < model.n_features(); ++j) {
            double v = model.mean[j];
            for (std::size_t r = 0; r < Z.cols; ++r) v += Z(i, r) * model.components(r, j);
            out(i, j) = v;
        }
    return out;
}

}  // namespace advids
