#include "covshrink/rmt.hpp"

#include "covshrink/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace covshrink {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kCdfTolerance = 1e-8;

double integrate(const auto& f, double a, double b) {
    if (!(b > a)) return 0.0;
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, 15, kCdfTolerance * 1e-2, &error);
    if (!(error <= kCdfTolerance) || !std::isfinite(value)) {
        throw NumericError("mp_cdf: quadrature did not converge (error estimate " +
                           std::to_string(error) + ")");
    }
    return value;
}

}  // namespace

MPModel::MPModel(double c) : c_(c) {
    if (!(c > 0.0 && c < 1.0)) {
        throw DomainError("MPModel: concentration must lie in (0, 1), got " + std::to_string(c));
    }
    const double r = std::sqrt(c);
    lambda_minus_ = (1.0 - r) * (1.0 - r);
    lambda_plus_ = (1.0 + r) * (1.0 + r);
}

Complex empirical_stieltjes(const Vector& eigenvalues, Complex z) {
    if (!(z.imag() > 0.0)) {
        throw DomainError("empirical_stieltjes: z must lie in the upper half-plane");
    }
    Complex sum{0.0, 0.0};
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        sum += 1.0 / (eigenvalues(i) - z);
    }
    return sum / static_cast<double>(eigenvalues.size());
}

double naive_hilbert(const Vector& l, std::size_t i) {
    const auto p = static_cast<std::size_t>(l.size());
    if (i >= p) {
        throw DomainError("naive_hilbert: index " + std::to_string(i) + " out of range");
    }
    const double tie_tol = kTieTolerance * std::max(l.cwiseAbs().maxCoeff(), 1e-300);
    const double li = l(static_cast<Eigen::Index>(i));
    double sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        if (j == i) continue;
        const double gap = l(static_cast<Eigen::Index>(j)) - li;
        if (std::abs(gap) <= tie_tol) {
            throw TieError("naive_hilbert: eigenvalues " + std::to_string(i) + " and " +
                               std::to_string(j) + " are tied",
                           j);
        }
        sum += 1.0 / gap;
    }
    return sum / static_cast<double>(p);
}

double mp_density(double x, const MPModel& model) {
    if (!(x > model.lambda_minus() && x < model.lambda_plus())) return 0.0;
    return std::sqrt((x - model.lambda_minus()) * (model.lambda_plus() - x)) /
           (2.0 * kPi * model.c() * x);
}

double mp_cdf(double x, const MPModel& model) {
    const double lo = model.lambda_minus();
    const double hi = model.lambda_plus();
    if (x <= lo) return 0.0;
    const double width = hi - lo;
    const double mid = 0.5 * (lo + hi);
    const double scale = 1.0 / (2.0 * kPi * model.c());

    // u = lo + t^2 on [lo, mid]; u = hi - s^2 on [mid, hi]. Both integrands are smooth.
    const auto lower = [&](double t) {
        const double t2 = t * t;
        return scale * 2.0 * t2 * std::sqrt(std::max(width - t2, 0.0)) / (lo + t2);
    };
    const auto upper = [&](double s) {
        const double s2 = s * s;
        return scale * 2.0 * s2 * std::sqrt(std::max(width - s2, 0.0)) / (hi - s2);
    };

    const double xl = std::min(x, mid);
    double total = integrate(lower, 0.0, std::sqrt(xl - lo));
    if (x > mid) {
        const double xu = std::min(x, hi);
        total += integrate(upper, std::sqrt(hi - xu), std::sqrt(hi - mid));
    }
    return std::clamp(total, 0.0, 1.0);
}

double identity_hilbert(double x, const MPModel& model) {
    if (x == 0.0) throw DomainError("identity_hilbert: x must be nonzero");
    return (1.0 - model.c() - x) / (2.0 * model.c() * x);
}

Complex mp_boundary_stieltjes(double x, const MPModel& model) {
    if (x == 0.0) throw DomainError("mp_boundary_stieltjes: x must be nonzero");
    const double c = model.c();
    const double inside = (x - model.lambda_minus()) * (model.lambda_plus() - x);
    const double imag = inside > 0.0 ? std::sqrt(inside) : 0.0;
    return Complex{1.0 - c - x, imag} / (2.0 * c * x);
}

Complex mp_stieltjes(Complex z, const MPModel& model) {
    if (!(z.imag() > 0.0)) {
        throw DomainError("mp_stieltjes: z must lie in the upper half-plane");
    }
    const double c = model.c();
    const Complex b = 1.0 - c - z;
    const Complex root = std::sqrt(b * b - 4.0 * c * z);
    const Complex m1 = (b + root) / (2.0 * c * z);
    const Complex m2 = (b - root) / (2.0 * c * z);
    return m1.imag() >= m2.imag() ? m1 : m2;
}

Complex mp_equation_residual(Complex z, Complex m, const MPModel& model) {
    const double c = model.c();
    return m - 1.0 / (1.0 - c - c * z * m - z);
}

double quantile_map(double l, double c, double hilbert_value) {
    const double denom = 1.0 - c - c * l * hilbert_value;
    if (!(denom > kQuantileMapGuard)) {
        throw ShrinkageSingularity("quantile_map: denominator " + std::to_string(denom) +
                                       " is not positive",
                                   0);
    }
    return l / denom;
}

std::size_t quantile_index(std::size_t p, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("quantile_index: alpha must lie in (0, 1)");
    }
    const double raw = std::floor(static_cast<double>(p) * (1.0 - alpha));
    return std::clamp(static_cast<std::size_t>(std::max(raw, 0.0)), std::size_t{1}, p);
}

double ks_distance_to_mp(const Vector& eigenvalues, const MPModel& model) {
    std::vector<double> sorted(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::sort(sorted.begin(), sorted.end());
    const double p = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = mp_cdf(sorted[i], model);
        d = std::max({d, static_cast<double>(i + 1) / p - f, f - static_cast<double>(i) / p});
    }
    return d;
}

}  // namespace covshrink
