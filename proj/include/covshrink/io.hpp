/**
 * @file io.hpp
 * @brief CSV ingestion and JSON report serialization.
 *
 * Reports use schema_version "1". Matrices are written row-major with explicit
 * dimensions: {"rows": r, "cols": c, "data": [...]}. NaN values are written as
 * null and read back as NaN. Anything volatile (clock times, wall-clock
 * durations) lives under a "timestamps" key so outputs can be compared with
 * strip_timestamps().
 */

#pragma once

#include "covshrink/estimators.hpp"
#include "covshrink/hdtest.hpp"
#include "covshrink/loss_risk.hpp"
#include "covshrink/sim.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace covshrink {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

struct CsvOptions {
    char delimiter = ',';
    bool header = false;
};

/// A parsed rectangular table of finite numbers.
struct CsvDataset {
    std::string path;
    CsvOptions options;
    std::vector<std::string> column_names;  ///< empty unless header
    Matrix values;

    /// Validates the table as observations (n >= 2).
    DataMatrix data() const { return DataMatrix(values); }
};

/// Parses CSV text. Blank lines are skipped; double-quoted fields are unquoted.
/// Throws ParseError for an empty table, ragged rows (reporting the line) and
/// cells that are not finite decimal numbers (reporting line and column).
CsvDataset parse_csv(std::string_view text, const CsvOptions& options = {});

/// Reads and parses a file. Throws ParseError when the file cannot be read.
CsvDataset read_csv(const std::string& path, const CsvOptions& options = {});

std::string write_csv(const Matrix& m, char delimiter = ',');

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);
/// NaN becomes null.
Json number_to_json(double v);
/// null becomes NaN.
double number_from_json(const Json& j);

Json to_json(const ShrinkageTable& t);
Json to_json(const CovarianceEstimate& e);
Json to_json(const TestResult& r);
Json to_json(const RiskEstimate& r);
Json to_json(const PowerReport& r, bool include_statistics);
Json to_json(const ExperimentConfig& c);
Json to_json(const ExperimentReport& r);

/// Reads {"model", "n", "p", "replicates", "seed", "methods", "keep_rows"}.
ExperimentConfig experiment_config_from_json(const Json& j);
ExperimentReport experiment_report_from_json(const Json& j);

struct ReportDocument {
    std::string schema_version = kSchemaVersion;
    std::string command;
    Json config = Json::object();
    Json results = Json::object();
    std::uint64_t seed = 0;
    Json timestamps = Json::object();

    bool operator==(const ReportDocument&) const = default;
};

Json to_json(const ReportDocument& d);
ReportDocument report_from_json(const Json& j);

std::string serialize(const ReportDocument& d);
/// Throws ParseError on malformed JSON or a schema_version other than "1".
ReportDocument parse_report(std::string_view text);

/// Recursively drops every "timestamps" member.
Json strip_timestamps(Json j);

/// Current UTC time as ISO 8601.
std::string utc_now();

}  // namespace covshrink
