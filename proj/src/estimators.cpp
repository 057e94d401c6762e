#include "covshrink/estimators.hpp"

#include "covshrink/errors.hpp"

#include <cmath>

namespace covshrink {

DataMatrix::DataMatrix(Matrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 2) {
        throw DomainError("DataMatrix: need n >= 2 observations, got " +
                          std::to_string(rows_.rows()));
    }
    if (rows_.cols() < 1) {
        throw DomainError("DataMatrix: need p >= 1 variables");
    }
    if (!rows_.allFinite()) {
        throw DomainError("DataMatrix: non-finite entry");
    }
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::sample: return "sample";
        case Method::stein_triangular: return "stein_triangular";
        case Method::dp_equivariant: return "dp_equivariant";
        case Method::tsai: return "tsai";
    }
    return "unknown";
}

std::string_view to_string(Convention c) {
    return c == Convention::uncentered_n ? "uncentered_n" : "centered_n_minus_1";
}

Method parse_method(std::string_view s) {
    if (s == "sample" || s == "ml") return Method::sample;
    if (s == "stein_triangular" || s == "stein") return Method::stein_triangular;
    if (s == "dp_equivariant" || s == "dp") return Method::dp_equivariant;
    if (s == "tsai") return Method::tsai;
    throw DomainError("unknown estimator method '" + std::string(s) + "'");
}

Convention parse_convention(std::string_view s) {
    if (s == "uncentered" || s == "uncentered_n") return Convention::uncentered_n;
    if (s == "centered" || s == "centered_n_minus_1") return Convention::centered_n_minus_1;
    throw DomainError("unknown n-convention '" + std::string(s) + "'");
}

ScatterMatrix scatter(const DataMatrix& x, bool centered) {
    ScatterMatrix out;
    out.n = x.n();
    out.centered = centered;
    if (centered) {
        const Matrix c = x.rows().rowwise() - x.rows().colwise().mean();
        out.matrix = c.transpose() * c;
    } else {
        out.matrix = x.rows().transpose() * x.rows();
    }
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    return out;
}

bool ShrinkageTable::preserves_order() const {
    for (Eigen::Index i = 1; i < shrunk_eigenvalues.size(); ++i) {
        if (!(shrunk_eigenvalues(i - 1) > shrunk_eigenvalues(i))) return false;
    }
    return true;
}

double effective_n(Eigen::Index n, Convention mode) {
    return mode == Convention::uncentered_n ? static_cast<double>(n)
                                            : static_cast<double>(n - 1);
}

CovarianceEstimate sample_covariance(const DataMatrix& x, Convention mode) {
    const bool centered = mode == Convention::centered_n_minus_1;
    ScatterMatrix a = scatter(x, centered);
    CovarianceEstimate out;
    out.method = Method::sample;
    out.n = x.n();
    out.p = x.p();
    out.divisor = effective_n(x.n(), mode);
    out.matrix = a.matrix / out.divisor;
    return out;
}

Vector stein_divisors(Eigen::Index n, Eigen::Index p) {
    Vector d(p);
    for (Eigen::Index i = 1; i <= p; ++i) {
        d(i - 1) = static_cast<double>(n + p - 2 * i + 1);
    }
    return d;
}

Vector dp_divisors(Eigen::Index n, Eigen::Index p) {
    Vector d(p);
    for (Eigen::Index i = 1; i <= p; ++i) {
        d(i - 1) = static_cast<double>(n - i + 1);
    }
    return d;
}

namespace {

void require_dof(const ScatterMatrix& a, const char* who) {
    const Eigen::Index p = a.matrix.rows();
    if (a.dof() < p) {
        throw DomainError(std::string(who) + ": need n >= p, got n=" +
                          std::to_string(a.dof()) + ", p=" + std::to_string(p));
    }
}

}  // namespace

CovarianceEstimate stein_triangular(const ScatterMatrix& a) {
    require_dof(a, "stein_triangular");
    const SymPD m(a.matrix);
    const LowerTriangular t = cholesky(m);
    const Vector d = stein_divisors(a.dof(), m.dim());

    CovarianceEstimate out;
    out.method = Method::stein_triangular;
    out.n = a.n;
    out.p = m.dim();
    out.matrix = t.factor * d.cwiseInverse().asDiagonal() * t.factor.transpose();
    return out;
}

CovarianceEstimate dp_equivariant(const ScatterMatrix& a) {
    require_dof(a, "dp_equivariant");
    const SymPD m(a.matrix);
    const SchurReduction r = successive_diagonalize(m);
    const Vector d = dp_divisors(a.dof(), m.dim());

    CovarianceEstimate out;
    out.method = Method::dp_equivariant;
    out.n = a.n;
    out.p = m.dim();
    out.target = "sigma_star";
    out.matrix = r.pivots.cwiseQuotient(d).asDiagonal();
    return out;
}

Vector shrinkage_denominators(const Vector& l, double n) {
    const Eigen::Index p = l.size();
    Vector d(p);
    const double base = n - static_cast<double>(p) + 1.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        double hilbert_sum = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (j != i) hilbert_sum += 1.0 / (l(j) - l(i));
        }
        d(i) = base - l(i) * hilbert_sum;
    }
    return d;
}

ShrinkageTable tsai_eigenvalues(const Vector& l, double n) {
    const Eigen::Index p = l.size();
    if (p < 1) throw DomainError("tsai_eigenvalues: empty eigenvalue vector");
    if (!(n >= static_cast<double>(p))) {
        throw DomainError("tsai_eigenvalues: need n >= p, got n=" + std::to_string(n) +
                          ", p=" + std::to_string(p));
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!std::isfinite(l(i)) || !(l(i) > 0.0)) {
            throw DomainError("tsai_eigenvalues: eigenvalue " + std::to_string(i) +
                              " is not positive");
        }
    }
    const double tie_tol = kTieTolerance * l(0);
    for (Eigen::Index i = 1; i < p; ++i) {
        if (l(i) > l(i - 1)) {
            throw DomainError("tsai_eigenvalues: eigenvalues are not descending at index " +
                              std::to_string(i));
        }
        if (l(i - 1) - l(i) <= tie_tol) {
            throw TieError("tsai_eigenvalues: eigenvalues " + std::to_string(i - 1) + " and " +
                               std::to_string(i) + " are tied",
                           static_cast<std::size_t>(i));
        }
    }

    ShrinkageTable out;
    out.n = n;
    out.sample_eigenvalues = l;
    out.shrunk_eigenvalues.resize(p);
    out.denominators = shrinkage_denominators(l, n);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double d = out.denominators(i);
        if (!(d > kShrinkageGuard * n)) {
            throw ShrinkageSingularity("tsai_eigenvalues: denominator " + std::to_string(d) +
                                           " at index " + std::to_string(i) +
                                           " is not positive (clustered eigenvalues?)",
                                       static_cast<std::size_t>(i));
        }
        out.shrunk_eigenvalues(i) = n * l(i) / d;
    }
    return out;
}

CovarianceEstimate tsai_estimator(const CovarianceEstimate& s, double n) {
    if (s.method != Method::sample) {
        throw DomainError("tsai_estimator: input must be a sample covariance");
    }
    const SpectralDecomp sd = spectral_decompose(SymPD(s.matrix));
    ShrinkageTable table = tsai_eigenvalues(sd.eigenvalues, n);

    CovarianceEstimate out;
    out.method = Method::tsai;
    out.n = s.n;
    out.p = s.p;
    out.divisor = n;
    out.matrix = sd.eigenvectors * table.shrunk_eigenvalues.asDiagonal() *
                 sd.eigenvectors.transpose();
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    out.shrinkage = std::move(table);
    return out;
}

CovarianceEstimate estimate(const DataMatrix& x, Method method, Convention mode) {
    const bool centered = mode == Convention::centered_n_minus_1;
    switch (method) {
        case Method::sample:
            return sample_covariance(x, mode);
        case Method::stein_triangular:
            return stein_triangular(scatter(x, centered));
        case Method::dp_equivariant:
            return dp_equivariant(scatter(x, centered));
        case Method::tsai:
            return tsai_estimator(sample_covariance(x, mode), effective_n(x.n(), mode));
    }
    throw DomainError("estimate: unknown method");
}

}  // namespace covshrink
