#include "covshrink/matrix_core.hpp"

#include "covshrink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace covshrink {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Eigen::Index argmax_abs(const Eigen::Ref<const Vector>& v) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    return idx;
}

}  // namespace

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

SymPD::SymPD(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw DomainError("SymPD: expected a non-empty square matrix, got " + shape(m));
    }
    if (!m.allFinite()) {
        throw DomainError("SymPD: matrix has non-finite entries");
    }
    const double scale = std::max(max_abs(m), 1e-300);
    const double asym = max_abs(m - m.transpose()) / scale;
    if (asym > kSymmetryTolerance) {
        throw DomainError("SymPD: relative asymmetry " + std::to_string(asym) +
                          " exceeds tolerance");
    }
    m_ = 0.5 * (m + m.transpose());
    (void)cholesky(m_);
}

SymPD SymPD::trusted(Matrix m) {
    return SymPD(std::move(m), TrustedTag{});
}

Matrix SpectralDecomp::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

double LowerTriangular::log_det_product() const {
    return 2.0 * factor.diagonal().array().log().sum();
}

double SchurReduction::log_det() const {
    return pivots.array().log().sum();
}

SpectralDecomp canonicalize(Vector eigenvalues, Matrix eigenvectors) {
    const Eigen::Index p = eigenvalues.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return eigenvalues(a) > eigenvalues(b);
    });

    SpectralDecomp out;
    out.eigenvalues.resize(p);
    out.eigenvectors.resize(eigenvectors.rows(), p);
    for (Eigen::Index k = 0; k < p; ++k) {
        out.eigenvalues(k) = eigenvalues(order[static_cast<std::size_t>(k)]);
        out.eigenvectors.col(k) = eigenvectors.col(order[static_cast<std::size_t>(k)]);
    }

    // Tied blocks: order columns by the position of their dominant component.
    const double tie_tol = kTieTolerance * std::max(std::abs(out.eigenvalues(0)), 1e-300);
    Eigen::Index start = 0;
    while (start < p) {
        Eigen::Index end = start + 1;
        while (end < p && out.eigenvalues(end - 1) - out.eigenvalues(end) < tie_tol) {
            ++end;
        }
        if (end - start > 1) {
            out.near_tie = true;
            std::vector<Eigen::Index> block(static_cast<std::size_t>(end - start));
            std::iota(block.begin(), block.end(), start);
            std::stable_sort(block.begin(), block.end(), [&](Eigen::Index a, Eigen::Index b) {
                return argmax_abs(out.eigenvectors.col(a)) < argmax_abs(out.eigenvectors.col(b));
            });
            Matrix cols(out.eigenvectors.rows(), end - start);
            Vector vals(end - start);
            for (Eigen::Index k = 0; k < end - start; ++k) {
                cols.col(k) = out.eigenvectors.col(block[static_cast<std::size_t>(k)]);
                vals(k) = out.eigenvalues(block[static_cast<std::size_t>(k)]);
            }
            out.eigenvectors.middleCols(start, end - start) = cols;
            out.eigenvalues.segment(start, end - start) = vals;
        }
        start = end;
    }

    for (Eigen::Index k = 0; k < p; ++k) {
        auto col = out.eigenvectors.col(k);
        for (Eigen::Index r = 0; r < col.size(); ++r) {
            if (std::abs(col(r)) > 1e-12) {
                if (col(r) < 0.0) col = -col;
                break;
            }
        }
    }
    return out;
}

SpectralDecomp spectral_decompose(const SymPD& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) {
        throw DecompositionError("spectral_decompose: eigen-solver did not converge for " +
                                 shape(m.matrix()) + " matrix with trace " +
                                 std::to_string(m.matrix().trace()));
    }
    SpectralDecomp out = canonicalize(solver.eigenvalues(), solver.eigenvectors());
    if (out.eigenvalues(out.eigenvalues.size() - 1) <= 0.0) {
        throw NotPositiveDefinite("spectral_decompose: nonpositive eigenvalue",
                                  static_cast<std::size_t>(out.eigenvalues.size() - 1));
    }
    return out;
}

LowerTriangular cholesky(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DomainError("cholesky: expected a square matrix, got " + shape(m));
    }
    const Eigen::Index p = m.rows();
    Matrix t = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double pivot = m(j, j) - t.row(j).head(j).squaredNorm();
        if (!(pivot > 0.0)) {
            throw NotPositiveDefinite("cholesky: nonpositive pivot " + std::to_string(pivot) +
                                          " at index " + std::to_string(j),
                                      static_cast<std::size_t>(j));
        }
        const double d = std::sqrt(pivot);
        t(j, j) = d;
        for (Eigen::Index i = j + 1; i < p; ++i) {
            t(i, j) = (m(i, j) - t.row(i).head(j).dot(t.row(j).head(j))) / d;
        }
    }
    return LowerTriangular{std::move(t)};
}

LowerTriangular cholesky(const SymPD& m) {
    return cholesky(m.matrix());
}

SchurReduction successive_diagonalize(const SymPD& m) {
    Matrix a = m.matrix();
    const Eigen::Index p = a.rows();
    SchurReduction out{Vector(p)};
    for (Eigen::Index k = 0; k < p; ++k) {
        const double pivot = a(0, 0);
        if (!(pivot > 0.0)) {
            throw NotPositiveDefinite("successive_diagonalize: nonpositive pivot at step " +
                                          std::to_string(k),
                                      static_cast<std::size_t>(k));
        }
        out.pivots(k) = pivot;
        const Eigen::Index rest = a.rows() - 1;
        if (rest == 0) break;
        Matrix next = a.bottomRightCorner(rest, rest) -
                      a.bottomLeftCorner(rest, 1) * a.topRightCorner(1, rest) / pivot;
        a = 0.5 * (next + next.transpose());
    }
    return out;
}

}  // namespace covshrink
