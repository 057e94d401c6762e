#pragma once

#include "covshrink/matrix_core.hpp"

#include <cmath>
#include <random>

namespace covshrink::testing {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, R-diagonal signs fixed).
inline Matrix random_orthogonal(Eigen::Index p, std::mt19937_64& rng) {
    const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(p, p, rng));
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
}

/// Positive vector sorted descending with entries in [lo, hi).
inline Vector random_descending(Eigen::Index p, std::mt19937_64& rng, double lo = 0.1,
                                double hi = 10.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(p);
    for (Eigen::Index i = 0; i < p; ++i) v(i) = u(rng);
    std::sort(v.data(), v.data() + p, std::greater<>());
    return v;
}

/// Random SPD matrix with eigenvalues in [0.1, 10).
inline Matrix random_spd(Eigen::Index p, std::mt19937_64& rng) {
    const Matrix q = random_orthogonal(p, rng);
    return q * random_descending(p, rng).asDiagonal() * q.transpose();
}

/// Wishart-type sample covariance: X^T X / n for n Gaussian rows.
inline Matrix wishart_sample(Eigen::Index p, Eigen::Index n, std::mt19937_64& rng) {
    const Matrix x = gaussian_matrix(n, p, rng);
    return x.transpose() * x / static_cast<double>(n);
}

}  // namespace covshrink::testing
