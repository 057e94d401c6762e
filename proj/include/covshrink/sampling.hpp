/**
 * @file sampling.hpp
 * @brief Population models, seeded Gaussian data and the replicate runner.
 *
 * Every replicate derives its own generator from (master seed, replicate
 * index), so results do not depend on how replicates are scheduled across
 * worker threads.
 */

#pragma once

#include "covshrink/estimators.hpp"
#include "covshrink/matrix_core.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace covshrink {

struct IdentityModel {};
/// diag(spikes..., 1, ..., 1); every spike >= 1.
struct SpikedModel {
    std::vector<double> spikes;
};
/// Entries rho^|i-j|, |rho| < 1.
struct Ar1Model {
    double rho = 0.0;
};
struct ExplicitModel {
    Matrix sigma;
};

struct PopulationModel {
    std::variant<IdentityModel, SpikedModel, Ar1Model, ExplicitModel> variant;
    Eigen::Index p = 1;

    /// "identity", "spiked:5,3", "ar1:0.5" or "explicit" (matrix attached separately).
    std::string describe() const;
};

/// Parses "identity", "spiked:v1,v2,...", "ar1:rho". Throws DomainError.
PopulationModel parse_model(const std::string& spec, Eigen::Index p);

/// Throws DomainError on invalid parameters, NotPositiveDefinite for explicit input.
SymPD make_sigma(const PopulationModel& model);

using Rng = std::mt19937_64;

/// Stable 64-bit mix of (master seed, replicate index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// n rows of mean + chol * z with z ~ N(0, I).
Matrix gaussian_rows(const LowerTriangular& chol, Eigen::Index n, Rng& rng,
                     const Vector* mean = nullptr);

/// n iid N(0, sigma) rows, using the Cholesky factor as the square root.
/// Requires n >= 2 so the result forms a DataMatrix.
DataMatrix sample_gaussian(const SymPD& sigma, Eigen::Index n, std::uint64_t seed);

/// Outcome of one replicate: a row of metric values, or the failure message.
struct ReplicateResult {
    std::vector<double> values;
    std::string error;
    bool ok() const { return error.empty(); }
};

/// Runs body(index) for index in [0, count) on up to `threads` workers and
/// returns results in index order. Exceptions derived from std::exception are
/// captured into ReplicateResult::error.
std::vector<ReplicateResult> run_replicates(
    std::size_t count, unsigned threads,
    const std::function<std::vector<double>(std::size_t)>& body);

/// Mean and standard error of the mean; both NaN for an empty sample.
struct Summary {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

Summary summarize(const std::vector<double>& values);

/// Throws ExperimentAborted when more than 1% of replicates failed, quoting
/// the first failure.
void check_failure_rate(const std::vector<ReplicateResult>& results, const std::string& what);

}  // namespace covshrink
