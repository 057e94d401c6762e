/**
 * @file rmt.hpp
 * @brief Random-matrix diagnostics.
 *
 * Empirical Stieltjes transform, the naive Hilbert-transform plug-in, the
 * Marchenko-Pastur law for an identity population (density, CDF, support,
 * boundary Stieltjes value) and the quantile equality map linking sample and
 * population spectral quantiles.
 *
 * Indices in this header are zero-based unless stated otherwise.
 */

#pragma once

#include "covshrink/matrix_core.hpp"

#include <complex>
#include <cstddef>

namespace covshrink {

using Complex = std::complex<double>;

/// Marchenko-Pastur law of an identity population at concentration c in (0, 1).
class MPModel {
public:
    /// Throws DomainError unless 0 < c < 1.
    explicit MPModel(double c);

    double c() const noexcept { return c_; }
    double lambda_minus() const noexcept { return lambda_minus_; }
    double lambda_plus() const noexcept { return lambda_plus_; }

private:
    double c_;
    double lambda_minus_;
    double lambda_plus_;
};

/// (1/p) sum_i 1/(l_i - z). Requires Im z > 0.
Complex empirical_stieltjes(const Vector& eigenvalues, Complex z);

/// (1/p) sum_{j != i} 1/(l_j - l_i). Throws TieError for |l_j - l_i| <= 1e-12 * max|l|.
double naive_hilbert(const Vector& l, std::size_t i);

/// sqrt((x - l-)(l+ - x)) / (2 pi c x) inside the support, exactly 0 elsewhere.
double mp_density(double x, const MPModel& model);

/// Integral of mp_density from l- to x. Uses adaptive Gauss-Kronrod after the
/// substitution x = l- + t^2, which removes the square-root edge.
double mp_cdf(double x, const MPModel& model);

/// (1 - c - x) / (2 c x): principal-value Hilbert transform of the identity law.
double identity_hilbert(double x, const MPModel& model);

/// Boundary value (1 - c - x + i sqrt((x - l-)(l+ - x))) / (2 c x) for x inside
/// the support; the imaginary part is zero outside.
Complex mp_boundary_stieltjes(double x, const MPModel& model);

/// Stieltjes transform of the identity law at z in C+: the root of
/// c z m^2 - (1 - c - z) m + 1 = 0 with positive imaginary part.
Complex mp_stieltjes(Complex z, const MPModel& model);

/// m - 1 / (1 - c - c z m - z): residual of the fixed-point equation for a
/// point-mass-at-one population spectrum.
Complex mp_equation_residual(Complex z, Complex m, const MPModel& model);

/// Guard used by quantile_map.
inline constexpr double kQuantileMapGuard = 1e-10;

/// l / (1 - c - c l h). Throws ShrinkageSingularity when the denominator <= guard.
double quantile_map(double l, double c, double hilbert_value);

/// floor(p (1 - alpha)) clamped to [1, p]; the result is one-based.
std::size_t quantile_index(std::size_t p, double alpha);

/// Kolmogorov-Smirnov distance between the empirical spectral CDF of `eigenvalues`
/// and the law's CDF.
double ks_distance_to_mp(const Vector& eigenvalues, const MPModel& model);

}  // namespace covshrink
