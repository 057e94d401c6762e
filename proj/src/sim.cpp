#include "covshrink/sim.hpp"

#include "covshrink/errors.hpp"
#include "covshrink/loss_risk.hpp"
#include "covshrink/rmt.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace covshrink {

std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::eigenvalue_recovery: return "eigenvalue_recovery";
        case ExperimentKind::esd_fit: return "esd_fit";
        case ExperimentKind::risk_comparison: return "risk_comparison";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view s) {
    if (s == "eigenvalue_recovery" || s == "recovery") return ExperimentKind::eigenvalue_recovery;
    if (s == "esd_fit" || s == "esd") return ExperimentKind::esd_fit;
    if (s == "risk_comparison" || s == "risk") return ExperimentKind::risk_comparison;
    throw DomainError("unknown experiment '" + std::string(s) + "'");
}

void validate(const ExperimentConfig& config, ExperimentKind kind) {
    if (config.p < 1) throw DomainError("experiment: p must be >= 1");
    if (config.model.p != config.p) {
        throw DomainError("experiment: model dimension " + std::to_string(config.model.p) +
                          " != p " + std::to_string(config.p));
    }
    if (config.replicates < 1) throw DomainError("experiment: replicates must be >= 1");
    if (kind == ExperimentKind::risk_comparison) {
        if (config.n < config.p) throw DomainError("risk_comparison: need n >= p");
    } else if (config.n <= config.p) {
        throw DomainError("experiment: need n > p (c = p/n < 1), got n=" +
                          std::to_string(config.n) + ", p=" + std::to_string(config.p));
    }
    if (config.n < 2) throw DomainError("experiment: need n >= 2");
    if (kind == ExperimentKind::esd_fit &&
        !std::holds_alternative<IdentityModel>(config.model.variant)) {
        throw DomainError("esd_fit: only the identity model has a Marchenko-Pastur reference");
    }
}

std::map<std::string, Summary> summarize_rows(const std::vector<std::string>& columns,
                                              const std::vector<std::vector<double>>& rows) {
    std::map<std::string, Summary> out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& row : rows) {
            if (!std::isnan(row[c])) values.push_back(row[c]);
        }
        out[columns[c]] = summarize(values);
    }
    return out;
}

namespace {

using Body = std::function<std::vector<double>(std::size_t)>;

ExperimentReport run(ExperimentKind kind, const ExperimentConfig& config,
                     std::vector<std::string> columns, const Body& body) {
    const auto start = std::chrono::steady_clock::now();
    const auto results = run_replicates(config.replicates, config.threads, body);
    check_failure_rate(results, std::string(to_string(kind)));

    ExperimentReport report;
    report.kind = kind;
    report.config = config;
    report.columns = std::move(columns);
    std::vector<std::vector<double>> rows;
    rows.reserve(results.size());
    for (const auto& r : results) {
        if (r.ok()) {
            rows.push_back(r.values);
        } else {
            ++report.failures;
            report.failure_messages.push_back(r.error);
            rows.emplace_back(report.columns.size(), std::numeric_limits<double>::quiet_NaN());
        }
    }
    report.metrics = summarize_rows(report.columns, rows);
    if (config.keep_rows) report.rows = std::move(rows);
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

Matrix draw(const LowerTriangular& chol, const ExperimentConfig& config, std::size_t r) {
    Rng rng(derive_seed(config.seed, r));
    return gaussian_rows(chol, config.n, rng);
}

}  // namespace

ExperimentReport eigenvalue_recovery_experiment(const ExperimentConfig& config) {
    validate(config, ExperimentKind::eigenvalue_recovery);
    const SymPD sigma = make_sigma(config.model);
    const Vector gamma = spectral_decompose(sigma).eigenvalues;
    const LowerTriangular chol = cholesky(sigma);
    const double p = static_cast<double>(config.p);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // A shrinkage breach is a per-replicate outcome here, not a replicate
    // failure: mae_l and the denominator count stay defined.
    return run(ExperimentKind::eigenvalue_recovery, config,
               {"mae_psi", "mae_l", "rel_frobenius", "order_preserved", "shrinkage_failed",
                "nonpositive_denominators"},
               [&](std::size_t r) {
                   const DataMatrix x(draw(chol, config, r));
                   const CovarianceEstimate s = sample_covariance(x, Convention::uncentered_n);
                   const double n_eff = effective_n(x.n(), Convention::uncentered_n);
                   const SpectralDecomp sd = spectral_decompose(SymPD(s.matrix));
                   const double mae_l = (sd.eigenvalues - gamma).cwiseAbs().sum() / p;
                   const double nonpositive = static_cast<double>(
                       (shrinkage_denominators(sd.eigenvalues, n_eff).array() <=
                        kShrinkageGuard * n_eff)
                           .count());
                   try {
                       const CovarianceEstimate t = tsai_estimator(s, n_eff);
                       const ShrinkageTable& table = *t.shrinkage;
                       return std::vector<double>{
                           (table.shrunk_eigenvalues - gamma).cwiseAbs().sum() / p,
                           mae_l,
                           (t.matrix - s.matrix).norm() / s.matrix.norm(),
                           table.preserves_order() ? 1.0 : 0.0,
                           0.0,
                           nonpositive};
                   } catch (const ShrinkageSingularity&) {
                   } catch (const TieError&) {
                   }
                   return std::vector<double>{nan, mae_l, nan, nan, 1.0, nonpositive};
               });
}

ExperimentReport esd_fit_experiment(const ExperimentConfig& config) {
    validate(config, ExperimentKind::esd_fit);
    const MPModel mp(static_cast<double>(config.p) / static_cast<double>(config.n));
    const LowerTriangular chol = cholesky(make_sigma(config.model));

    ExperimentReport report =
        run(ExperimentKind::esd_fit, config, {"ks_distance"}, [&](std::size_t r) {
            const DataMatrix x(draw(chol, config, r));
            const CovarianceEstimate s = sample_covariance(x, Convention::uncentered_n);
            const Eigen::SelfAdjointEigenSolver<Matrix> solver(s.matrix, Eigen::EigenvaluesOnly);
            if (solver.info() != Eigen::Success) {
                throw DecompositionError("esd_fit: eigen-solver did not converge");
            }
            return std::vector<double>{ks_distance_to_mp(solver.eigenvalues(), mp)};
        });
    report.references["c"] = mp.c();
    report.references["lambda_minus"] = mp.lambda_minus();
    report.references["lambda_plus"] = mp.lambda_plus();
    return report;
}

ExperimentReport risk_comparison_experiment(const ExperimentConfig& config) {
    validate(config, ExperimentKind::risk_comparison);
    std::vector<Method> methods = config.methods;
    if (methods.empty()) {
        methods = {Method::sample, Method::stein_triangular, Method::dp_equivariant, Method::tsai};
    }
    const SymPD sigma = make_sigma(config.model);
    const SymPD star = sigma_star(sigma);
    const LowerTriangular chol = cholesky(sigma);

    std::vector<std::string> columns;
    for (Method m : methods) columns.push_back("loss_" + std::string(to_string(m)));

    // A method failing in one replicate (e.g. a shrinkage singularity) marks
    // only its own cell as NaN; per-method counts land in references.
    ExperimentReport report =
        run(ExperimentKind::risk_comparison, config, columns, [&](std::size_t r) {
            const DataMatrix x(draw(chol, config, r));
            std::vector<double> row;
            row.reserve(methods.size());
            for (Method m : methods) {
                try {
                    const SymPD phi(estimate(x, m, Convention::uncentered_n).matrix);
                    row.push_back(stein_loss(phi, m == Method::dp_equivariant ? star : sigma));
                } catch (const Error&) {
                    row.push_back(std::numeric_limits<double>::quiet_NaN());
                }
            }
            return row;
        });
    for (std::size_t m = 0; m < methods.size(); ++m) {
        report.references["failures_" + std::string(to_string(methods[m]))] =
            static_cast<double>(config.replicates - report.failures -
                                report.metrics[columns[m]].count);
    }
    report.references["min_risk_ml"] = min_risk(RiskKind::ml, config.n, config.p);
    report.references["min_risk_stein"] = min_risk(RiskKind::stein, config.n, config.p);
    report.references["min_risk_dp"] = min_risk(RiskKind::dp, config.n, config.p);
    return report;
}

ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& config) {
    switch (kind) {
        case ExperimentKind::eigenvalue_recovery: return eigenvalue_recovery_experiment(config);
        case ExperimentKind::esd_fit: return esd_fit_experiment(config);
        case ExperimentKind::risk_comparison: return risk_comparison_experiment(config);
    }
    throw DomainError("run_experiment: unknown experiment");
}

}  // namespace covshrink
