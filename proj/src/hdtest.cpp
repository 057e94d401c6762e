#include "covshrink/hdtest.hpp"

#include "covshrink/errors.hpp"
#include "covshrink/sampling.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

namespace covshrink {

std::string_view to_string(TestMethod m) {
    switch (m) {
        case TestMethod::hotelling: return "hotelling";
        case TestMethod::decomposite: return "decomposite";
        case TestMethod::oracle: return "oracle";
    }
    return "unknown";
}

TestMethod parse_test_method(std::string_view s) {
    if (s == "hotelling") return TestMethod::hotelling;
    if (s == "decomposite" || s == "tsai") return TestMethod::decomposite;
    if (s == "oracle") return TestMethod::oracle;
    throw DomainError("unknown test method '" + std::string(s) + "'");
}

double chisq_pvalue(double statistic, double dof, double noncentrality) {
    if (!(statistic >= 0.0)) throw DomainError("chisq_pvalue: statistic must be >= 0");
    if (!(dof > 0.0)) throw DomainError("chisq_pvalue: dof must be positive");
    if (!(noncentrality >= 0.0)) throw DomainError("chisq_pvalue: noncentrality must be >= 0");
    if (statistic == 0.0) return 1.0;
    if (noncentrality == 0.0) return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
    const boost::math::non_central_chi_squared dist(dof, noncentrality);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chisq_critical(double dof, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("chisq_critical: alpha must lie in (0, 1)");
    const boost::math::chi_squared dist(dof);
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

namespace {

TestResult finish(double statistic, TestMethod method, const DataMatrix& x) {
    TestResult r;
    r.statistic = std::max(statistic, 0.0);
    r.dof = x.p();
    r.pvalue = chisq_pvalue(r.statistic, static_cast<double>(x.p()));
    r.method = method;
    r.n = x.n();
    r.p = x.p();
    return r;
}

void require_rank(const DataMatrix& x, const char* who) {
    if (x.n() < x.p() + 1) {
        throw DomainError(std::string(who) + ": need n >= p + 1, got n=" +
                          std::to_string(x.n()) + ", p=" + std::to_string(x.p()));
    }
}

}  // namespace

TestResult hotelling_t2(const DataMatrix& x) {
    require_rank(x, "hotelling_t2");
    const Vector xbar = x.mean();
    const CovarianceEstimate s = sample_covariance(x, Convention::centered_n_minus_1);
    const Eigen::LLT<Matrix> llt(s.matrix);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("hotelling_t2: sample covariance is singular", 0);
    }
    const double n = static_cast<double>(x.n());
    return finish(n * xbar.dot(llt.solve(xbar)), TestMethod::hotelling, x);
}

TestResult decomposite_t2(const DataMatrix& x) {
    require_rank(x, "decomposite_t2");
    const Vector xbar = x.mean();
    const CovarianceEstimate s = sample_covariance(x, Convention::centered_n_minus_1);
    const SpectralDecomp sd = spectral_decompose(SymPD(s.matrix));
    const ShrinkageTable table =
        tsai_eigenvalues(sd.eigenvalues, effective_n(x.n(), Convention::centered_n_minus_1));
    const Vector proj = sd.eigenvectors.transpose() * xbar;
    const double n = static_cast<double>(x.n());
    return finish(n * proj.cwiseAbs2().cwiseQuotient(table.shrunk_eigenvalues).sum(),
                  TestMethod::decomposite, x);
}

TestResult oracle_t2(const DataMatrix& x, const SymPD& sigma) {
    if (sigma.dim() != x.p()) throw DimensionMismatch("oracle_t2: sigma dimension != p");
    const Vector xbar = x.mean();
    const LowerTriangular l = cholesky(sigma);
    const Vector w = l.factor.triangularView<Eigen::Lower>().solve(xbar);
    return finish(static_cast<double>(x.n()) * w.squaredNorm(), TestMethod::oracle, x);
}

Vector LocalAlternative::mean(Eigen::Index n) const {
    const double p = static_cast<double>(delta.size());
    return std::pow(p, 0.25) / std::sqrt(static_cast<double>(n)) * delta;
}

double LocalAlternative::noncentrality(const SymPD& sigma) const {
    const LowerTriangular l = cholesky(sigma);
    return l.factor.triangularView<Eigen::Lower>().solve(delta).squaredNorm();
}

double LocalAlternative::exact_noncentrality(const SymPD& sigma, Eigen::Index n) const {
    const LowerTriangular l = cholesky(sigma);
    const Vector mu = mean(n);
    return static_cast<double>(n) * l.factor.triangularView<Eigen::Lower>().solve(mu).squaredNorm();
}

PowerReport power_simulation(const PowerConfig& config) {
    const SymPD sigma(config.sigma);
    const Eigen::Index p = sigma.dim();
    if (config.delta.size() != p) throw DimensionMismatch("power_simulation: delta length != p");
    if (config.replicates < 1) throw DomainError("power_simulation: need replicates >= 1");
    if (config.n < 2) throw DomainError("power_simulation: need n >= 2");

    const LocalAlternative alt{config.delta};
    const Vector mu = alt.mean(config.n);
    const LowerTriangular chol = cholesky(sigma);

    PowerReport out;
    out.replicates = config.replicates;
    out.critical_value = chisq_critical(static_cast<double>(p), config.alpha);
    out.noncentrality = alt.noncentrality(sigma);
    out.exact_noncentrality = alt.exact_noncentrality(sigma, config.n);
    const auto predicted = [&](double nc) {
        return chisq_pvalue(out.critical_value, static_cast<double>(p), nc);
    };
    out.predicted_power = predicted(out.noncentrality);
    out.predicted_power_exact = predicted(out.exact_noncentrality);

    const auto results = run_replicates(config.replicates, config.threads, [&](std::size_t r) {
        Rng rng(derive_seed(config.seed, r));
        const DataMatrix x(gaussian_rows(chol, config.n, rng, &mu));
        switch (config.method) {
            case TestMethod::hotelling: return std::vector<double>{hotelling_t2(x).statistic};
            case TestMethod::decomposite: return std::vector<double>{decomposite_t2(x).statistic};
            case TestMethod::oracle: return std::vector<double>{oracle_t2(x, sigma).statistic};
        }
        throw DomainError("power_simulation: unknown method");
    });
    check_failure_rate(results, "power_simulation(" + std::string(to_string(config.method)) + ")");

    std::size_t rejected = 0;
    std::size_t ok = 0;
    out.statistics.reserve(results.size());
    for (const auto& r : results) {
        if (!r.ok()) {
            out.statistics.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        ++ok;
        out.statistics.push_back(r.values[0]);
        if (r.values[0] > out.critical_value) ++rejected;
    }
    out.failures = config.replicates - ok;
    if (ok > 0) {
        out.rejection_rate = static_cast<double>(rejected) / static_cast<double>(ok);
        out.std_error = std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) /
                                  static_cast<double>(ok));
    }
    return out;
}

}  // namespace covshrink
