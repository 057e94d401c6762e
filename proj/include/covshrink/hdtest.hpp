/**
 * @file hdtest.hpp
 * @brief One-sample mean tests H0: mu = 0.
 *
 * Hotelling's T^2 with the centered sample covariance, the decomposite T^2
 * that swaps in the eigenvalue-shrinkage estimator, and the oracle statistic
 * with the true covariance. All p-values use the chi^2_p reference.
 */

#pragma once

#include "covshrink/estimators.hpp"
#include "covshrink/matrix_core.hpp"

#include <cstdint>
#include <string_view>

namespace covshrink {

enum class TestMethod { hotelling, decomposite, oracle };

std::string_view to_string(TestMethod m);
TestMethod parse_test_method(std::string_view s);

struct TestResult {
    double statistic = 0.0;
    Eigen::Index dof = 0;
    double pvalue = 1.0;
    TestMethod method = TestMethod::hotelling;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
};

/// n xbar^T S^-1 xbar with S centered (divisor n - 1). Requires n >= p + 1.
TestResult hotelling_t2(const DataMatrix& x);

/// n sum_i (u_i^T xbar)^2 / psi_i, with the shrinkage map fed n - 1.
TestResult decomposite_t2(const DataMatrix& x);

/// n xbar^T sigma^-1 xbar.
TestResult oracle_t2(const DataMatrix& x, const SymPD& sigma);

/// Upper-tail probability of chi^2_dof(noncentrality) at `statistic`.
double chisq_pvalue(double statistic, double dof, double noncentrality = 0.0);

/// Upper alpha critical value of the central chi^2_dof.
double chisq_critical(double dof, double alpha);

/// Mean under the local alternative: mu = n^{-1/2} p^{1/4} delta.
struct LocalAlternative {
    Vector delta;

    Vector mean(Eigen::Index n) const;
    /// delta^T sigma^-1 delta.
    double noncentrality(const SymPD& sigma) const;
    /// n mu^T sigma^-1 mu = sqrt(p) delta^T sigma^-1 delta: the exact
    /// noncentrality of the oracle statistic at sample size n.
    double exact_noncentrality(const SymPD& sigma, Eigen::Index n) const;
};

struct PowerConfig {
    Eigen::Index n = 0;
    Matrix sigma;
    Vector delta;
    double alpha = 0.05;
    std::size_t replicates = 1000;
    std::uint64_t seed = 0;
    TestMethod method = TestMethod::oracle;
    unsigned threads = 1;
};

struct PowerReport {
    double rejection_rate = 0.0;
    double std_error = 0.0;  ///< binomial sqrt(r (1 - r) / k)
    std::size_t replicates = 0;
    std::size_t failures = 0;
    double critical_value = 0.0;
    double noncentrality = 0.0;        ///< delta^T sigma^-1 delta
    double exact_noncentrality = 0.0;  ///< n mu^T sigma^-1 mu
    double predicted_power = 0.0;       ///< P(chi^2_p(noncentrality) > critical)
    double predicted_power_exact = 0.0; ///< P(chi^2_p(exact_noncentrality) > critical)
    std::vector<double> statistics;     ///< per replicate, NaN when failed
};

/// Empirical rejection rate at the chi^2_p(alpha) critical value.
PowerReport power_simulation(const PowerConfig& config);

}  // namespace covshrink
