/**
 * @file sim.hpp
 * @brief Desk-scale Monte Carlo experiments.
 *
 * Each experiment fans replicates out to a worker pool and reduces them in
 * replicate-index order, so a report depends only on its config.
 */

#pragma once

#include "covshrink/estimators.hpp"
#include "covshrink/sampling.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace covshrink {

enum class ExperimentKind { eigenvalue_recovery, esd_fit, risk_comparison };

std::string_view to_string(ExperimentKind k);
/// Accepts the canonical names and "recovery", "esd", "risk".
ExperimentKind parse_experiment_kind(std::string_view s);

struct ExperimentConfig {
    PopulationModel model;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    std::vector<Method> methods;  ///< risk_comparison only; empty means all four
    unsigned threads = 1;
    bool keep_rows = true;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::eigenvalue_recovery;
    ExperimentConfig config;
    std::vector<std::string> columns;
    /// One row per replicate in index order; NaN entries mark failed replicates.
    std::vector<std::vector<double>> rows;
    std::map<std::string, Summary> metrics;
    std::map<std::string, double> references;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;
    double wall_clock_seconds = 0.0;
};

/// Throws DomainError for n <= p, p < 1, replicates < 1, or a model whose
/// dimension disagrees with p.
void validate(const ExperimentConfig& config, ExperimentKind kind);

/// Per replicate: mae_psi = (1/p) sum |psi_i - gamma_i|, mae_l likewise for
/// the sample eigenvalues, rel_frobenius = ||Sigma_T - S||_F / ||S||_F and
/// order_preserved in {0, 1}. gamma are the descending eigenvalues of Sigma.
ExperimentReport eigenvalue_recovery_experiment(const ExperimentConfig& config);

/// Per replicate KS distance between the sample spectrum and the MP law at
/// c = p / n. Identity model only.
ExperimentReport esd_fit_experiment(const ExperimentConfig& config);

/// Per replicate Stein loss for each method on common data; references hold
/// the closed-form minima min_risk_ml, min_risk_stein, min_risk_dp.
ExperimentReport risk_comparison_experiment(const ExperimentConfig& config);

ExperimentReport run_experiment(ExperimentKind kind, const ExperimentConfig& config);

/// Recomputes metric summaries from retained rows, skipping NaN entries.
std::map<std::string, Summary> summarize_rows(const std::vector<std::string>& columns,
                                              const std::vector<std::vector<double>>& rows);

}  // namespace covshrink
