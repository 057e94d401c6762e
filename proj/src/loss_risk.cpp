#include "covshrink/loss_risk.hpp"

#include "covshrink/errors.hpp"
#include "covshrink/sampling.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>

namespace covshrink {

double stein_loss(const SymPD& phi, const SymPD& sigma) {
    if (phi.dim() != sigma.dim()) {
        throw DimensionMismatch("stein_loss: dimensions " + std::to_string(phi.dim()) + " and " +
                                std::to_string(sigma.dim()) + " differ");
    }
    const LowerTriangular ls = cholesky(sigma);
    const LowerTriangular lp = cholesky(phi);
    // tr(Sigma^-1 Phi) = ||Ls^-1 Lp||_F^2
    const Matrix w = ls.factor.triangularView<Eigen::Lower>().solve(lp.factor);
    const double trace = w.squaredNorm();
    const double logdet = lp.log_det_product() - ls.log_det_product();
    return std::max(0.0, trace - logdet - static_cast<double>(phi.dim()));
}

double elog_chisq(double k) {
    if (!(k >= 1.0)) throw DomainError("elog_chisq: degrees of freedom must be >= 1");
    return std::log(2.0) + boost::math::digamma(0.5 * k);
}

std::string_view to_string(RiskKind k) {
    switch (k) {
        case RiskKind::ml: return "ml";
        case RiskKind::stein: return "stein";
        case RiskKind::dp: return "dp";
    }
    return "unknown";
}

RiskKind parse_risk_kind(std::string_view s) {
    if (s == "ml") return RiskKind::ml;
    if (s == "stein") return RiskKind::stein;
    if (s == "dp") return RiskKind::dp;
    throw DomainError("unknown risk kind '" + std::string(s) + "'");
}

double min_risk(RiskKind kind, Eigen::Index n, Eigen::Index p) {
    if (p < 1 || n < p) {
        throw DomainError("min_risk: need n >= p >= 1, got n=" + std::to_string(n) +
                          ", p=" + std::to_string(p));
    }
    double total = 0.0;
    for (Eigen::Index i = 1; i <= p; ++i) {
        double d = 0.0;
        switch (kind) {
            case RiskKind::ml: d = static_cast<double>(n); break;
            case RiskKind::stein: d = static_cast<double>(n + p - 2 * i + 1); break;
            case RiskKind::dp: d = static_cast<double>(n - i + 1); break;
        }
        total += std::log(d) - elog_chisq(static_cast<double>(n - i + 1));
    }
    return total;
}

RiskKind risk_kind_for(Method m) {
    switch (m) {
        case Method::sample: return RiskKind::ml;
        case Method::stein_triangular: return RiskKind::stein;
        case Method::dp_equivariant: return RiskKind::dp;
        case Method::tsai: break;
    }
    throw DomainError("no closed-form minimum risk for method '" + std::string(to_string(m)) + "'");
}

SymPD sigma_star(const SymPD& sigma) {
    return SymPD(Matrix(successive_diagonalize(sigma).pivots.asDiagonal()));
}

double replicate_loss(Method method, const SymPD& sigma, const LowerTriangular& sigma_chol,
                      Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    const DataMatrix x(gaussian_rows(sigma_chol, n, rng));
    const CovarianceEstimate est = estimate(x, method, Convention::uncentered_n);
    const SymPD phi(est.matrix);
    if (method == Method::dp_equivariant) return stein_loss(phi, sigma_star(sigma));
    return stein_loss(phi, sigma);
}

RiskEstimate monte_carlo_risk(Method method, const SymPD& sigma, Eigen::Index n,
                              std::size_t replicates, std::uint64_t seed, unsigned threads) {
    if (replicates < 2) throw DomainError("monte_carlo_risk: need at least 2 replicates");
    const LowerTriangular chol = cholesky(sigma);
    const auto results = run_replicates(replicates, threads, [&](std::size_t r) {
        return std::vector<double>{replicate_loss(method, sigma, chol, n, derive_seed(seed, r))};
    });
    check_failure_rate(results, "monte_carlo_risk(" + std::string(to_string(method)) + ")");

    std::vector<double> losses;
    losses.reserve(results.size());
    for (const auto& r : results) {
        if (r.ok()) losses.push_back(r.values[0]);
    }
    const Summary s = summarize(losses);
    RiskEstimate out;
    out.mean_loss = s.mean;
    out.std_error = s.std_error;
    out.replicates = replicates;
    out.failures = replicates - losses.size();
    out.method = method;
    out.n = n;
    out.p = sigma.dim();
    out.seed = seed;
    return out;
}

}  // namespace covshrink
