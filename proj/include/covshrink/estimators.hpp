/**
 * @file estimators.hpp
 * @brief Equivariant covariance estimators.
 *
 * Four estimators, each the best in its own equivariance class under Stein
 * loss or built on top of one:
 *   - sample covariance S (general linear group),
 *   - the triangular estimator T D_S^{-1} T^T with d_S,ii = n + p - 2i + 1,
 *   - the positive-diagonal-group estimator D_0^{-1} A* with d_0,ii = n - i + 1,
 *     which estimates the Schur-pivot diagonal of Sigma rather than Sigma,
 *   - the rotation-equivariant eigenvalue-shrinkage estimator U Psi(L) U^T.
 */

#pragma once

#include "covshrink/matrix_core.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace covshrink {

/// n observations (rows) of a p-dimensional vector. n >= 2, p >= 1, finite.
class DataMatrix {
public:
    explicit DataMatrix(Matrix rows);

    const Matrix& rows() const noexcept { return rows_; }
    Eigen::Index n() const noexcept { return rows_.rows(); }
    Eigen::Index p() const noexcept { return rows_.cols(); }
    Vector mean() const { return rows_.colwise().mean().transpose(); }

private:
    Matrix rows_;
};

enum class Method { sample, stein_triangular, dp_equivariant, tsai };
enum class Convention { uncentered_n, centered_n_minus_1 };

std::string_view to_string(Method m);
std::string_view to_string(Convention c);
/// Accepts canonical names and the short aliases "stein" and "dp".
Method parse_method(std::string_view s);
/// Accepts "uncentered", "uncentered_n", "centered", "centered_n_minus_1".
Convention parse_convention(std::string_view s);

/// Sum of X_i X_i^T, or of the centered outer products.
struct ScatterMatrix {
    Matrix matrix;
    Eigen::Index n = 0;
    bool centered = false;

    /// Wishart degrees of freedom: n, or n - 1 when centered.
    Eigen::Index dof() const noexcept { return centered ? n - 1 : n; }
};

ScatterMatrix scatter(const DataMatrix& x, bool centered);

/// Paired sample and shrunk eigenvalues with the denominators
/// d_i = n - p + 1 - l_i * sum_{j != i} 1/(l_j - l_i).
struct ShrinkageTable {
    Vector sample_eigenvalues;
    Vector shrunk_eigenvalues;
    Vector denominators;
    double n = 0;  ///< effective sample count used in the map

    /// True when shrunk eigenvalues keep the strict descending order.
    bool preserves_order() const;
};

struct CovarianceEstimate {
    Matrix matrix;
    Method method = Method::sample;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    /// Divisor applied to the scatter (sample), or the effective n fed to the
    /// shrinkage map (tsai). Zero where a vector of divisors is used.
    double divisor = 0;
    /// "sigma" or, for dp_equivariant, "sigma_star" (the Schur-pivot diagonal).
    std::string target = "sigma";
    std::optional<ShrinkageTable> shrinkage;
};

/// Never fails on finite input; positive definiteness is the consumer's concern.
CovarianceEstimate sample_covariance(const DataMatrix& x, Convention mode);

/// T diag(1/(n + p - 2i + 1)) T^T with T = cholesky(A).
CovarianceEstimate stein_triangular(const ScatterMatrix& a);

/// Diagonal d_S,ii = n + p - 2i + 1 (one-based i).
Vector stein_divisors(Eigen::Index n, Eigen::Index p);

/// diag(a_(i)11 / (n - i + 1)) from the Schur pivots of A.
CovarianceEstimate dp_equivariant(const ScatterMatrix& a);

/// Diagonal d_0,ii = n - i + 1 (one-based i).
Vector dp_divisors(Eigen::Index n, Eigen::Index p);

/// Relative guard on shrinkage denominators: d_i <= kShrinkageGuard * n fails.
inline constexpr double kShrinkageGuard = 1e-10;

/// Unguarded d_i = n - p + 1 - l_i * sum_{j != i} 1/(l_j - l_i). Callers must
/// ensure the l_i are distinct.
Vector shrinkage_denominators(const Vector& l, double n);

/**
 * psi_i = n l_i / d_i for strictly descending positive l.
 *
 * Requires n >= p. Throws TieError when adjacent eigenvalues agree to within
 * kTieTolerance * l_1, ShrinkageSingularity when some d_i <= kShrinkageGuard * n.
 */
ShrinkageTable tsai_eigenvalues(const Vector& l, double n);

/// U diag(psi) U^T built from a sample-method estimate. `n` is the effective
/// sample count handed to tsai_eigenvalues.
CovarianceEstimate tsai_estimator(const CovarianceEstimate& s, double n);

/// Effective sample count conventionally paired with a divisor mode:
/// n for uncentered data, n - 1 for centered data.
double effective_n(Eigen::Index n, Convention mode);

/// Dispatches on method. Scatter-based estimators use the scatter matching
/// `mode`, with n replaced by n - 1 when centered.
CovarianceEstimate estimate(const DataMatrix& x, Method method, Convention mode);

}  // namespace covshrink
