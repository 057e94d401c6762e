/**
 * @file matrix_core.hpp
 * @brief Symmetric positive-definite primitives.
 *
 * Spectral decomposition, Cholesky factorization and successive Schur
 * complementation with fixed ordering and sign conventions:
 *   - eigenvalues are always returned in descending order l_1 >= ... >= l_p;
 *   - every eigenvector column has its first non-negligible component
 *     (|u| > 1e-12) nonnegative;
 *   - inside a block of numerically tied eigenvalues, columns are ordered by
 *     the position of their largest-magnitude component.
 */

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace covshrink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative asymmetry below which inputs are silently symmetrized.
inline constexpr double kSymmetryTolerance = 1e-12;
/// Relative eigenvalue gap treated as a tie.
inline constexpr double kTieTolerance = 1e-12;

/**
 * @brief A validated p x p symmetric positive-definite matrix.
 *
 * Construction symmetrizes inputs whose relative asymmetry is below
 * kSymmetryTolerance, rejects larger asymmetry, non-finite entries and
 * matrices whose Cholesky factorization breaks down.
 */
class SymPD {
public:
    /// Throws DomainError (shape, asymmetry, non-finite) or NotPositiveDefinite.
    explicit SymPD(const Matrix& m);

    const Matrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

    /// Entries of the matrix are already symmetric and PD; no checks beyond shape.
    static SymPD trusted(Matrix m);

private:
    struct TrustedTag {};
    SymPD(Matrix m, TrustedTag) : m_(std::move(m)) {}
    Matrix m_;
};

/// Ordered eigenpairs of a SymPD matrix.
struct SpectralDecomp {
    Vector eigenvalues;   ///< strictly (or, when near_tie, weakly) descending
    Matrix eigenvectors;  ///< column i pairs with eigenvalues(i)
    bool near_tie = false;  ///< some adjacent gap is below kTieTolerance * l_1

    Matrix reconstruct() const;
};

/// Lower-triangular factor with strictly positive diagonal.
struct LowerTriangular {
    Matrix factor;

    Eigen::Index dim() const noexcept { return factor.rows(); }
    /// 2 * sum(log diag), i.e. log det(T T^T).
    double log_det_product() const;
};

/// Pivots a_(1)11, ..., a_(p)11 of the successive Schur complement recursion.
struct SchurReduction {
    Vector pivots;

    double log_det() const;
};

SpectralDecomp spectral_decompose(const SymPD& m);

/// Applies the descending order, tie ordering and sign rule to raw eigenpairs.
/// Exposed so callers holding eigenpairs from another solver get the same
/// canonical form.
SpectralDecomp canonicalize(Vector eigenvalues, Matrix eigenvectors);

/// Throws NotPositiveDefinite with the failing zero-based index.
LowerTriangular cholesky(const SymPD& m);
LowerTriangular cholesky(const Matrix& m);

/// A_(k+1) = A_(k)22 - A_(k)21 A_(k)12 / a_(k)11, recording each leading pivot.
SchurReduction successive_diagonalize(const SymPD& m);

/// Largest absolute entry.
double max_abs(const Matrix& m);

}  // namespace covshrink
