#pragma once

#include "covshrink/estimators.hpp"
#include "covshrink/matrix_core.hpp"

#include <cstdint>
#include <string_view>

namespace covshrink {

/// tr(Sigma^-1 Phi) - log det(Sigma^-1 Phi) - p, via Cholesky solves. Never negative.
double stein_loss(const SymPD& phi, const SymPD& sigma);

/// E[log chi^2_k] = log 2 + digamma(k / 2). k >= 1.
double elog_chisq(double k);

enum class RiskKind { ml, stein, dp };

std::string_view to_string(RiskKind k);
RiskKind parse_risk_kind(std::string_view s);

/// Closed-form minimum Stein risk of the best equivariant estimator in each
/// class: sum_i log(d_i) - E[log chi^2_{n-i+1}] with d_i = n, n + p - 2i + 1 or
/// n - i + 1. Requires n >= p >= 1.
double min_risk(RiskKind kind, Eigen::Index n, Eigen::Index p);

/// Risk kind whose closed form applies to a method, if any.
RiskKind risk_kind_for(Method m);

struct RiskEstimate {
    double mean_loss = 0.0;
    double std_error = 0.0;
    std::size_t replicates = 0;
    std::size_t failures = 0;
    Method method = Method::sample;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    std::uint64_t seed = 0;
};

/// Loss of one estimator on mean-zero Gaussian data (uncentered scatter,
/// n degrees of freedom). dp_equivariant is scored against the Schur-pivot
/// diagonal of sigma.
double replicate_loss(Method method, const SymPD& sigma, const LowerTriangular& sigma_chol,
                      Eigen::Index n, std::uint64_t seed);

/// Monte Carlo Stein risk. Replicate r draws its data from derive_seed(seed, r).
/// Throws ExperimentAborted when more than 1% of replicates fail.
RiskEstimate monte_carlo_risk(Method method, const SymPD& sigma, Eigen::Index n,
                              std::size_t replicates, std::uint64_t seed, unsigned threads = 1);

/// diag(a_(1)11, ..., a_(p)11) of sigma's successive Schur reduction.
SymPD sigma_star(const SymPD& sigma);

}  // namespace covshrink
