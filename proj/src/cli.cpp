#include "covshrink/cli.hpp"

#include "covshrink/errors.hpp"
#include "covshrink/hdtest.hpp"
#include "covshrink/io.hpp"
#include "covshrink/loss_risk.hpp"
#include "covshrink/rmt.hpp"
#include "covshrink/sim.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace covshrink {

namespace {

/// Semantically invalid invocation that CLI11 cannot catch on its own.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string output;
    std::string format;

    std::uint64_t resolved_seed() const {
        if (seed) return *seed;
        if (const char* env = std::getenv("COVSHRINK_SEED"); env != nullptr && *env != '\0') {
            try {
                std::size_t used = 0;
                const auto v = std::stoull(env, &used);
                if (used == std::string(env).size()) return v;
            } catch (const std::exception&) {
            }
            throw UsageError("COVSHRINK_SEED must be an unsigned integer");
        }
        return 0;
    }

    std::string resolved_format(const char* fallback) const {
        return format.empty() ? std::string(fallback) : format;
    }
};

struct CsvFlags {
    std::string input;
    std::string delimiter = ",";
    bool header = false;

    CsvOptions options() const {
        if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
        return CsvOptions{delimiter[0], header};
    }
};

void add_csv_flags(CLI::App* cmd, CsvFlags& f, bool required = true) {
    auto* opt = cmd->add_option("--input,-i", f.input, "CSV file, one observation per row");
    if (required) opt->required();
    cmd->add_option("--delimiter", f.delimiter, "field delimiter")->capture_default_str();
    cmd->add_flag("--header", f.header, "first line holds column names");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Vector parse_vector(const std::string& s) {
    const auto items = split_list(s);
    Vector v(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        try {
            std::size_t used = 0;
            v(static_cast<Eigen::Index>(i)) = std::stod(items[i], &used);
            if (used != items[i].size()) throw std::invalid_argument(items[i]);
        } catch (const std::exception&) {
            throw UsageError("cannot parse number '" + items[i] + "'");
        }
    }
    return v;
}

ReportDocument new_document(const std::string& command, std::uint64_t seed) {
    ReportDocument doc;
    doc.command = command;
    doc.seed = seed;
    doc.timestamps["started"] = utc_now();
    return doc;
}

std::string render(ReportDocument& doc) {
    doc.timestamps["finished"] = utc_now();
    return serialize(doc);
}

void emit(const Globals& g, const std::string& text, std::ostream& out) {
    if (g.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(g.output, std::ios::binary);
    if (!f) throw UsageError("cannot open output file '" + g.output + "'");
    f << text;
}

PopulationModel model_from_flag(const std::string& spec, Eigen::Index p) {
    if (spec.rfind("explicit:", 0) == 0) {
        PopulationModel m;
        m.p = p;
        m.variant = ExplicitModel{read_csv(spec.substr(9)).values};
        return m;
    }
    return parse_model(spec, p);
}

// ---------------------------------------------------------------- estimate

struct EstimateFlags {
    CsvFlags csv;
    std::string method = "tsai";
    std::string convention = "centered";
    std::optional<double> n_effective;
};

std::string run_estimate(const Globals& g, const EstimateFlags& f) {
    const CsvDataset table = read_csv(f.csv.input, f.csv.options());
    const DataMatrix x = table.data();
    const Method method = parse_method(f.method);
    const Convention conv = parse_convention(f.convention);

    CovarianceEstimate est;
    const CovarianceEstimate sample = sample_covariance(x, conv);
    if (method == Method::tsai) {
        est = tsai_estimator(sample, f.n_effective.value_or(effective_n(x.n(), conv)));
    } else {
        est = estimate(x, method, conv);
    }

    if (g.resolved_format("json") == "csv") return write_csv(est.matrix);

    ReportDocument doc = new_document("estimate", g.resolved_seed());
    doc.config = {{"input", f.csv.input},
                  {"method", to_string(method)},
                  {"n_convention", to_string(conv)},
                  {"header", f.csv.header},
                  {"delimiter", f.csv.delimiter}};
    if (f.n_effective) doc.config["n_effective"] = *f.n_effective;
    doc.results = {{"n", x.n()},
                   {"p", x.p()},
                   {"sample_covariance", matrix_to_json(sample.matrix)},
                   {"estimate", to_json(est)}};
    return render(doc);
}

// ---------------------------------------------------------------- ttest

struct TtestFlags {
    CsvFlags csv;
    std::string method = "decomposite";
    std::string sigma_path;
    double alpha = 0.05;
};

std::string run_ttest(const Globals& g, const TtestFlags& f) {
    const DataMatrix x = read_csv(f.csv.input, f.csv.options()).data();
    const TestMethod method = parse_test_method(f.method);
    TestResult r;
    switch (method) {
        case TestMethod::hotelling: r = hotelling_t2(x); break;
        case TestMethod::decomposite: r = decomposite_t2(x); break;
        case TestMethod::oracle:
            if (f.sigma_path.empty()) throw UsageError("ttest --method oracle requires --sigma");
            r = oracle_t2(x, SymPD(read_csv(f.sigma_path).values));
            break;
    }
    const double critical = chisq_critical(static_cast<double>(r.dof), f.alpha);

    if (g.resolved_format("json") == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "method,statistic,dof,pvalue,critical_value,reject\n"
           << to_string(r.method) << ',' << r.statistic << ',' << r.dof << ',' << r.pvalue << ','
           << critical << ',' << (r.statistic > critical ? 1 : 0) << '\n';
        return os.str();
    }
    ReportDocument doc = new_document("ttest", g.resolved_seed());
    doc.config = {{"input", f.csv.input}, {"method", to_string(method)}, {"alpha", f.alpha}};
    doc.results = to_json(r);
    doc.results["critical_value"] = critical;
    doc.results["reject"] = r.statistic > critical;
    return render(doc);
}

// ---------------------------------------------------------------- mp

struct MpFlags {
    double c = 0.5;
    std::size_t points = 101;
};

std::string run_mp(const Globals& g, const MpFlags& f) {
    if (f.points < 2) throw UsageError("--points must be >= 2");
    const MPModel model(f.c);
    const double lo = model.lambda_minus();
    const double hi = model.lambda_plus();
    std::vector<double> xs(f.points);
    for (std::size_t k = 0; k < f.points; ++k) {
        xs[k] = lo + static_cast<double>(k) * (hi - lo) / static_cast<double>(f.points - 1);
    }
    xs.back() = hi;

    if (g.resolved_format("csv") == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "x,density,cdf\n";
        for (double x : xs) os << x << ',' << mp_density(x, model) << ',' << mp_cdf(x, model) << '\n';
        return os.str();
    }
    ReportDocument doc = new_document("mp", g.resolved_seed());
    doc.config = {{"c", f.c}, {"points", f.points}};
    Json rows = Json::array();
    for (double x : xs) {
        rows.push_back({{"x", x}, {"density", mp_density(x, model)}, {"cdf", mp_cdf(x, model)}});
    }
    doc.results = {{"lambda_minus", lo}, {"lambda_plus", hi}, {"grid", std::move(rows)}};
    return render(doc);
}

// ---------------------------------------------------------------- risk

struct RiskFlags {
    bool closed_form = false;
    bool monte_carlo = false;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    std::string methods = "sample,stein,dp";
    std::string model = "identity";
    std::size_t replicates = 10000;
};

std::string run_risk(const Globals& g, const RiskFlags& f) {
    if (!f.closed_form && !f.monte_carlo) {
        throw UsageError("risk requires --closed-form and/or --monte-carlo");
    }
    const std::uint64_t seed = g.resolved_seed();
    Json closed = Json::object();
    if (f.closed_form) {
        for (RiskKind k : {RiskKind::ml, RiskKind::stein, RiskKind::dp}) {
            closed[std::string(to_string(k))] = min_risk(k, f.n, f.p);
        }
    }
    Json mc = Json::array();
    if (f.monte_carlo) {
        const SymPD sigma = make_sigma(model_from_flag(f.model, f.p));
        for (const auto& name : split_list(f.methods)) {
            const Method m = parse_method(name);
            const RiskEstimate r = monte_carlo_risk(m, sigma, f.n, f.replicates, seed, g.threads);
            Json jr = to_json(r);
            if (m != Method::tsai) jr["min_risk"] = min_risk(risk_kind_for(m), f.n, f.p);
            mc.push_back(std::move(jr));
        }
    }

    if (g.resolved_format("json") == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "source,method,value,std_error\n";
        for (const auto& [k, v] : closed.items()) os << "closed_form," << k << ',' << v.get<double>() << ",0\n";
        for (const auto& r : mc) {
            os << "monte_carlo," << r["method"].get<std::string>() << ','
               << r["mean_loss"].get<double>() << ',' << r["std_error"].get<double>() << '\n';
        }
        return os.str();
    }
    ReportDocument doc = new_document("risk", seed);
    doc.config = {{"n", f.n}, {"p", f.p}, {"closed_form", f.closed_form}, {"monte_carlo", f.monte_carlo}};
    if (f.monte_carlo) {
        doc.config["methods"] = split_list(f.methods);
        doc.config["model"] = f.model;
        doc.config["replicates"] = f.replicates;
    }
    if (f.closed_form) doc.results["closed_form"] = std::move(closed);
    if (f.monte_carlo) doc.results["monte_carlo"] = std::move(mc);
    return render(doc);
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
    std::string experiment = "recovery";
    std::string config_path;
    std::string model = "identity";
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    std::size_t replicates = 10;
    std::string methods;
    bool no_rows = false;
};

std::string run_simulate(const Globals& g, const SimulateFlags& f) {
    const std::uint64_t seed = g.resolved_seed();
    std::vector<std::pair<ExperimentKind, ExperimentConfig>> runs;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw ParseError("cannot open config '" + f.config_path + "'", 0, 0);
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw ParseError(std::string("config: ") + e.what(), 0, 0);
        }
        const Json items = j.is_array() ? j : Json::array({j});
        for (const auto& item : items) {
            ExperimentConfig c = experiment_config_from_json(item);
            if (!item.contains("seed")) c.seed = seed;
            c.threads = g.threads;
            runs.emplace_back(parse_experiment_kind(item.value("experiment", f.experiment)), c);
        }
    } else {
        if (f.n <= 0 || f.p <= 0) throw UsageError("simulate requires --n and --p (or --config)");
        ExperimentConfig c;
        c.model = model_from_flag(f.model, f.p);
        c.n = f.n;
        c.p = f.p;
        c.replicates = f.replicates;
        c.seed = seed;
        c.threads = g.threads;
        c.keep_rows = !f.no_rows;
        for (const auto& m : split_list(f.methods)) c.methods.push_back(parse_method(m));
        runs.emplace_back(parse_experiment_kind(f.experiment), c);
    }

    Json reports = Json::array();
    Json configs = Json::array();
    for (const auto& [kind, config] : runs) {
        const ExperimentReport r = run_experiment(kind, config);
        Json jc = to_json(config);
        jc["experiment"] = to_string(kind);
        configs.push_back(std::move(jc));
        reports.push_back(to_json(r));
    }

    if (g.resolved_format("json") == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "experiment,n,p,metric,mean,std_error,count\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            for (const auto& [name, s] : reports[i]["metrics"].items()) {
                os << reports[i]["experiment"].get<std::string>() << ',' << configs[i]["n"] << ','
                   << configs[i]["p"] << ',' << name << ',' << number_from_json(s["mean"]) << ','
                   << number_from_json(s["std_error"]) << ',' << s["count"] << '\n';
            }
        }
        return os.str();
    }
    ReportDocument doc = new_document("simulate", seed);
    doc.config = configs.size() == 1 ? configs[0] : Json{{"runs", configs}};
    doc.results = reports.size() == 1 ? reports[0] : Json{{"reports", reports}};
    return render(doc);
}

// ---------------------------------------------------------------- power

struct PowerFlags {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    std::string model = "identity";
    std::string delta;
    std::optional<double> delta_e1;
    double alpha = 0.05;
    std::size_t replicates = 1000;
    std::string method = "oracle";
    bool statistics = false;
};

std::string run_power(const Globals& g, const PowerFlags& f) {
    if (f.n <= 0 || f.p <= 0) throw UsageError("power requires --n and --p");
    if (f.delta.empty() == !f.delta_e1.has_value()) {
        throw UsageError("power requires exactly one of --delta or --delta-e1");
    }
    PowerConfig c;
    c.n = f.n;
    c.sigma = make_sigma(model_from_flag(f.model, f.p)).matrix();
    if (f.delta_e1) {
        c.delta = Vector::Zero(f.p);
        c.delta(0) = *f.delta_e1;
    } else {
        c.delta = parse_vector(f.delta);
    }
    c.alpha = f.alpha;
    c.replicates = f.replicates;
    c.seed = g.resolved_seed();
    c.method = parse_test_method(f.method);
    c.threads = g.threads;
    const PowerReport r = power_simulation(c);

    if (g.resolved_format("json") == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "method,rejection_rate,std_error,predicted_power,predicted_power_exact\n"
           << to_string(c.method) << ',' << r.rejection_rate << ',' << r.std_error << ','
           << r.predicted_power << ',' << r.predicted_power_exact << '\n';
        return os.str();
    }
    ReportDocument doc = new_document("power", c.seed);
    doc.config = {{"n", f.n},           {"p", f.p},
                  {"model", f.model},   {"delta", vector_to_json(c.delta)},
                  {"alpha", f.alpha},   {"replicates", f.replicates},
                  {"method", to_string(c.method)}};
    doc.results = to_json(r, f.statistics);
    return render(doc);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"covshrink: equivariant covariance estimation and random-matrix diagnostics",
                 "covshrink"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "master seed (default: $COVSHRINK_SEED, else 0)");
    app.add_option("--threads", g.threads, "worker threads for Monte Carlo replicates")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--output,-o", g.output, "write the result here instead of stdout");
    app.add_option("--format", g.format, "json or csv (default depends on the command)")
        ->check(CLI::IsMember({"json", "csv"}));

    EstimateFlags ef;
    auto* est = app.add_subcommand("estimate", "covariance estimate from a CSV dataset");
    add_csv_flags(est, ef.csv);
    est->add_option("--method", ef.method, "sample | stein | dp | tsai")
        ->check(CLI::IsMember({"sample", "stein", "stein_triangular", "dp", "dp_equivariant", "tsai"}))
        ->capture_default_str();
    est->add_option("--n-convention", ef.convention, "uncentered (divisor n) | centered (n - 1)")
        ->check(CLI::IsMember({"uncentered", "centered"}))
        ->capture_default_str();
    est->add_option("--n-effective", ef.n_effective, "override the sample count fed to the shrinkage map");

    TtestFlags tf;
    auto* tt = app.add_subcommand("ttest", "one-sample test of H0: mu = 0");
    add_csv_flags(tt, tf.csv);
    tt->add_option("--method", tf.method, "hotelling | decomposite | oracle")
        ->check(CLI::IsMember({"hotelling", "decomposite", "oracle"}))
        ->capture_default_str();
    tt->add_option("--sigma", tf.sigma_path, "CSV with the true covariance (oracle only)");
    tt->add_option("--alpha", tf.alpha, "test level")->capture_default_str();

    MpFlags mf;
    auto* mp = app.add_subcommand("mp", "Marchenko-Pastur density and CDF on a grid");
    mp->add_option("--c", mf.c, "concentration p/n in (0, 1)")->required();
    mp->add_option("--points", mf.points, "grid points from lambda- to lambda+")->capture_default_str();

    RiskFlags rf;
    auto* risk = app.add_subcommand("risk", "closed-form and Monte Carlo Stein risks");
    risk->add_flag("--closed-form", rf.closed_form, "print the three closed-form minimum risks");
    risk->add_flag("--monte-carlo", rf.monte_carlo, "estimate risks by simulation");
    risk->add_option("--n", rf.n, "sample size")->required();
    risk->add_option("--p", rf.p, "dimension")->required();
    risk->add_option("--methods", rf.methods, "comma list of estimators")->capture_default_str();
    risk->add_option("--model", rf.model, "identity | spiked:a,b | ar1:rho | explicit:file.csv")
        ->capture_default_str();
    risk->add_option("--replicates", rf.replicates, "Monte Carlo replicates")->capture_default_str();

    SimulateFlags sf;
    auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    sim->add_option("--experiment", sf.experiment, "recovery | esd | risk")->capture_default_str();
    sim->add_option("--config", sf.config_path, "JSON experiment config (object or array)");
    sim->add_option("--model", sf.model, "population model")->capture_default_str();
    sim->add_option("--n", sf.n, "sample size");
    sim->add_option("--p", sf.p, "dimension");
    sim->add_option("--replicates", sf.replicates, "replicates")->capture_default_str();
    sim->add_option("--methods", sf.methods, "risk experiment estimators (default: all)");
    sim->add_flag("--no-rows", sf.no_rows, "omit per-replicate rows from the report");

    PowerFlags pf;
    auto* pow = app.add_subcommand("power", "rejection rate under local alternatives");
    pow->add_option("--n", pf.n, "sample size")->required();
    pow->add_option("--p", pf.p, "dimension")->required();
    pow->add_option("--model", pf.model, "population model")->capture_default_str();
    pow->add_option("--delta", pf.delta, "comma list, one value per dimension");
    pow->add_option("--delta-e1", pf.delta_e1, "delta = t * e1");
    pow->add_option("--alpha", pf.alpha, "test level")->capture_default_str();
    pow->add_option("--replicates", pf.replicates, "replicates")->capture_default_str();
    pow->add_option("--method", pf.method, "hotelling | decomposite | oracle")
        ->check(CLI::IsMember({"hotelling", "decomposite", "oracle"}))
        ->capture_default_str();
    pow->add_flag("--statistics", pf.statistics, "include per-replicate statistics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        std::string text;
        if (est->parsed()) text = run_estimate(g, ef);
        else if (tt->parsed()) text = run_ttest(g, tf);
        else if (mp->parsed()) text = run_mp(g, mf);
        else if (risk->parsed()) text = run_risk(g, rf);
        else if (sim->parsed()) text = run_simulate(g, sf);
        else if (pow->parsed()) text = run_power(g, pf);
        emit(g, text, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("covshrink");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace covshrink
