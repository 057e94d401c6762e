#include "covshrink/sampling.hpp"

#include "covshrink/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace covshrink {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DomainError("model: cannot parse number '" + item + "'");
        }
    }
    return out;
}

}  // namespace

std::string PopulationModel::describe() const {
    struct Visitor {
        std::string operator()(const IdentityModel&) const { return "identity"; }
        std::string operator()(const SpikedModel& m) const {
            std::ostringstream os;
            os.precision(17);
            os << "spiked:";
            for (std::size_t i = 0; i < m.spikes.size(); ++i) {
                os << (i ? "," : "") << m.spikes[i];
            }
            return os.str();
        }
        std::string operator()(const Ar1Model& m) const {
            std::ostringstream os;
            os.precision(17);
            os << "ar1:" << m.rho;
            return os.str();
        }
        std::string operator()(const ExplicitModel&) const { return "explicit"; }
    };
    return std::visit(Visitor{}, variant);
}

PopulationModel parse_model(const std::string& spec, Eigen::Index p) {
    PopulationModel model;
    model.p = p;
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "identity") {
        model.variant = IdentityModel{};
    } else if (kind == "spiked") {
        model.variant = SpikedModel{parse_list(args)};
    } else if (kind == "ar1") {
        const auto v = parse_list(args);
        if (v.size() != 1) throw DomainError("model: ar1 takes exactly one parameter");
        model.variant = Ar1Model{v[0]};
    } else {
        throw DomainError("model: unknown population model '" + spec + "'");
    }
    return model;
}

SymPD make_sigma(const PopulationModel& model) {
    const Eigen::Index p = model.p;
    if (p < 1) throw DomainError("make_sigma: p must be positive");
    if (std::holds_alternative<IdentityModel>(model.variant)) {
        return SymPD(Matrix::Identity(p, p));
    }
    if (const auto* s = std::get_if<SpikedModel>(&model.variant)) {
        if (static_cast<Eigen::Index>(s->spikes.size()) > p) {
            throw DomainError("make_sigma: more spikes than dimensions");
        }
        Vector d = Vector::Ones(p);
        for (std::size_t i = 0; i < s->spikes.size(); ++i) {
            if (!(s->spikes[i] >= 1.0) || !std::isfinite(s->spikes[i])) {
                throw DomainError("make_sigma: spike values must be finite and >= 1");
            }
            d(static_cast<Eigen::Index>(i)) = s->spikes[i];
        }
        return SymPD(Matrix(d.asDiagonal()));
    }
    if (const auto* a = std::get_if<Ar1Model>(&model.variant)) {
        if (!(std::abs(a->rho) < 1.0)) throw DomainError("make_sigma: ar1 needs |rho| < 1");
        Matrix m(p, p);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                m(i, j) = std::pow(a->rho, static_cast<double>(std::abs(i - j)));
            }
        }
        return SymPD(m);
    }
    const auto& e = std::get<ExplicitModel>(model.variant);
    if (e.sigma.rows() != p) throw DimensionMismatch("make_sigma: explicit matrix size != p");
    return SymPD(e.sigma);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Matrix gaussian_rows(const LowerTriangular& chol, Eigen::Index n, Rng& rng, const Vector* mean) {
    const Eigen::Index p = chol.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) z(i, j) = normal(rng);
    }
    Matrix x = z * chol.factor.transpose();
    if (mean != nullptr) x.rowwise() += mean->transpose();
    return x;
}

DataMatrix sample_gaussian(const SymPD& sigma, Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    return DataMatrix(gaussian_rows(cholesky(sigma), n, rng));
}

std::vector<ReplicateResult> run_replicates(
    std::size_t count, unsigned threads,
    const std::function<std::vector<double>(std::size_t)>& body) {
    std::vector<ReplicateResult> results(count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                results[i].values = body(i);
            } catch (const std::exception& e) {
                results[i].error = e.what();
                if (results[i].error.empty()) results[i].error = "unknown failure";
            }
        }
    };
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1U), std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        worker();
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();
    return results;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) {
        s.mean = s.std_error = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                static_cast<double>(values.size()));
    }
    return s;
}

void check_failure_rate(const std::vector<ReplicateResult>& results, const std::string& what) {
    std::size_t failed = 0;
    const ReplicateResult* first = nullptr;
    for (const auto& r : results) {
        if (!r.ok()) {
            ++failed;
            if (first == nullptr) first = &r;
        }
    }
    if (static_cast<double>(failed) > 0.01 * static_cast<double>(results.size())) {
        throw ExperimentAborted(what + ": " + std::to_string(failed) + " of " +
                                std::to_string(results.size()) +
                                " replicates failed; first failure: " + first->error);
    }
}

}  // namespace covshrink
