#include "covshrink/io.hpp"

#include "covshrink/errors.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace covshrink {

namespace {

std::vector<std::string> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view cell, double& out) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return false;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

CsvDataset parse_csv(std::string_view text, const CsvOptions& options) {
    CsvDataset out;
    out.options = options;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    bool header_pending = options.header;
    std::size_t line_no = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto fields = split_fields(line, options.delimiter);
        if (header_pending) {
            out.column_names.assign(fields.begin(), fields.end());
            for (auto& name : out.column_names) name = std::string(trim(name));
            width = fields.size();
            header_pending = false;
            continue;
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            throw ParseError("csv: line " + std::to_string(line_no) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(width),
                             line_no, 0);
        }
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            if (!parse_number(fields[c], row[c])) {
                throw ParseError("csv: line " + std::to_string(line_no) + ", column " +
                                     std::to_string(c + 1) + ": '" + fields[c] +
                                     "' is not a finite number",
                                 line_no, c + 1);
            }
        }
        rows.push_back(std::move(row));
        if (end == text.size()) break;
    }

    if (rows.empty()) throw ParseError("csv: no data rows", 0, 0);
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return out;
}

CsvDataset read_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("csv: cannot open '" + path + "'", 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    CsvDataset out = parse_csv(buf.str(), options);
    out.path = path;
    return out;
}

std::string write_csv(const Matrix& m, char delimiter) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) os << delimiter;
            os << m(r, c);
        }
        os << '\n';
    }
    return os.str();
}

Json number_to_json(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double number_from_json(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

Json matrix_to_json(const Matrix& m) {
    Json data = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(number_to_json(m(r, c)));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const Json& data = j.at("data");
    if (data.size() != static_cast<std::size_t>(rows * cols)) {
        throw ParseError("json: matrix data length does not match dimensions", 0, 0);
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = number_from_json(data[static_cast<std::size_t>(r * cols + c)]);
        }
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v(i)));
    return out;
}

Vector vector_from_json(const Json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from_json(j[i]);
    return v;
}

Json to_json(const ShrinkageTable& t) {
    return {{"n", t.n},
            {"sample_eigenvalues", vector_to_json(t.sample_eigenvalues)},
            {"shrunk_eigenvalues", vector_to_json(t.shrunk_eigenvalues)},
            {"denominators", vector_to_json(t.denominators)},
            {"preserves_order", t.preserves_order()}};
}

Json to_json(const CovarianceEstimate& e) {
    Json j{{"method", to_string(e.method)},
           {"n", e.n},
           {"p", e.p},
           {"divisor", e.divisor},
           {"target", e.target},
           {"matrix", matrix_to_json(e.matrix)}};
    if (e.shrinkage) j["shrinkage_table"] = to_json(*e.shrinkage);
    return j;
}

Json to_json(const TestResult& r) {
    return {{"method", to_string(r.method)}, {"statistic", r.statistic}, {"dof", r.dof},
            {"pvalue", r.pvalue},            {"n", r.n},                 {"p", r.p}};
}

Json to_json(const RiskEstimate& r) {
    return {{"method", to_string(r.method)},
            {"mean_loss", r.mean_loss},
            {"std_error", r.std_error},
            {"replicates", r.replicates},
            {"failures", r.failures},
            {"n", r.n},
            {"p", r.p},
            {"seed", r.seed}};
}

Json to_json(const PowerReport& r, bool include_statistics) {
    Json j{{"rejection_rate", r.rejection_rate},
           {"std_error", r.std_error},
           {"replicates", r.replicates},
           {"failures", r.failures},
           {"critical_value", r.critical_value},
           {"noncentrality", r.noncentrality},
           {"exact_noncentrality", r.exact_noncentrality},
           {"predicted_power", r.predicted_power},
           {"predicted_power_exact", r.predicted_power_exact}};
    if (include_statistics) {
        Json stats = Json::array();
        for (double s : r.statistics) stats.push_back(number_to_json(s));
        j["statistics"] = std::move(stats);
    }
    return j;
}

Json to_json(const ExperimentConfig& c) {
    Json methods = Json::array();
    for (Method m : c.methods) methods.push_back(to_string(m));
    Json j{{"model", c.model.describe()},
           {"n", c.n},
           {"p", c.p},
           {"replicates", c.replicates},
           {"seed", c.seed},
           {"methods", std::move(methods)},
           {"keep_rows", c.keep_rows}};
    if (const auto* e = std::get_if<ExplicitModel>(&c.model.variant)) {
        j["sigma"] = matrix_to_json(e->sigma);
    }
    return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    ExperimentConfig c;
    c.n = j.at("n").get<Eigen::Index>();
    c.p = j.at("p").get<Eigen::Index>();
    c.replicates = j.value("replicates", std::size_t{1});
    c.seed = j.value("seed", std::uint64_t{0});
    c.keep_rows = j.value("keep_rows", true);
    const std::string model = j.value("model", std::string("identity"));
    if (model == "explicit") {
        c.model.p = c.p;
        c.model.variant = ExplicitModel{matrix_from_json(j.at("sigma"))};
    } else {
        c.model = parse_model(model, c.p);
    }
    if (j.contains("methods")) {
        for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    return c;
}

Json to_json(const ExperimentReport& r) {
    Json metrics = Json::object();
    for (const auto& [name, s] : r.metrics) {
        metrics[name] = {{"mean", number_to_json(s.mean)},
                         {"std_error", number_to_json(s.std_error)},
                         {"count", s.count}};
    }
    Json references = Json::object();
    for (const auto& [name, v] : r.references) references[name] = number_to_json(v);
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json jr = Json::array();
        for (double v : row) jr.push_back(number_to_json(v));
        rows.push_back(std::move(jr));
    }
    return {{"experiment", to_string(r.kind)},
            {"config", to_json(r.config)},
            {"columns", r.columns},
            {"rows", std::move(rows)},
            {"metrics", std::move(metrics)},
            {"references", std::move(references)},
            {"failures", r.failures},
            {"failure_messages", r.failure_messages},
            {"timestamps", {{"wall_clock_seconds", r.wall_clock_seconds}}}};
}

ExperimentReport experiment_report_from_json(const Json& j) {
    ExperimentReport r;
    r.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
    r.config = experiment_config_from_json(j.at("config"));
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rows")) {
        std::vector<double> row;
        for (const auto& v : jr) row.push_back(number_from_json(v));
        r.rows.push_back(std::move(row));
    }
    for (const auto& [name, s] : j.at("metrics").items()) {
        r.metrics[name] = Summary{number_from_json(s.at("mean")),
                                  number_from_json(s.at("std_error")),
                                  s.at("count").get<std::size_t>()};
    }
    for (const auto& [name, v] : j.at("references").items()) r.references[name] = number_from_json(v);
    r.failures = j.at("failures").get<std::size_t>();
    r.failure_messages = j.at("failure_messages").get<std::vector<std::string>>();
    if (j.contains("timestamps")) {
        r.wall_clock_seconds = j.at("timestamps").value("wall_clock_seconds", 0.0);
    }
    return r;
}

Json to_json(const ReportDocument& d) {
    return {{"schema_version", d.schema_version}, {"command", d.command},
            {"config", d.config},                 {"results", d.results},
            {"seed", d.seed},                     {"timestamps", d.timestamps}};
}

ReportDocument report_from_json(const Json& j) {
    ReportDocument d;
    d.schema_version = j.at("schema_version").get<std::string>();
    if (d.schema_version != kSchemaVersion) {
        throw ParseError("json: unsupported schema_version '" + d.schema_version + "'", 0, 0);
    }
    d.command = j.at("command").get<std::string>();
    d.config = j.at("config");
    d.results = j.at("results");
    d.seed = j.at("seed").get<std::uint64_t>();
    d.timestamps = j.value("timestamps", Json::object());
    return d;
}

std::string serialize(const ReportDocument& d) {
    return to_json(d).dump(2) + "\n";
}

ReportDocument parse_report(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("json: ") + e.what(), 0, 0);
    }
    try {
        return report_from_json(j);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("json: ") + e.what(), 0, 0);
    }
}

Json strip_timestamps(Json j) {
    if (j.is_object()) {
        j.erase("timestamps");
        for (auto& [key, value] : j.items()) value = strip_timestamps(std::move(value));
    } else if (j.is_array()) {
        for (auto& value : j) value = strip_timestamps(std::move(value));
    }
    return j;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace covshrink
