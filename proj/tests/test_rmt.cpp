#include "covshrink/errors.hpp"
#include "covshrink/rmt.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

using namespace covshrink;
using std::numbers::pi;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Independent oracle: integral of the density by tanh-sinh quadrature.
double cdf_oracle(double x, const MPModel& m) {
    if (x <= m.lambda_minus()) return 0.0;
    const double hi = std::min(x, m.lambda_plus());
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&](double t) { return mp_density(t, m); }, m.lambda_minus(), hi);
}

// Independent oracle: principal value of integral f(t) / (t - x) dt, with the
// singular part subtracted and integrated analytically. Splitting at x keeps
// the quadrature nodes off the removable singularity.
double hilbert_oracle(double x, const MPModel& m) {
    const double a = m.lambda_minus();
    const double b = m.lambda_plus();
    const double fx = mp_density(x, m);
    boost::math::quadrature::tanh_sinh<double> ts;
    const auto g = [&](double t) { return (mp_density(t, m) - fx) / (t - x); };
    const double regular = ts.integrate(g, a, x) + ts.integrate(g, x, b);
    return regular + fx * std::log((b - x) / (x - a));
}

}  // namespace

TEST_CASE("MPModel support") {
    const MPModel m(0.25);
    CHECK(m.lambda_minus() == doctest::Approx(0.25));
    CHECK(m.lambda_plus() == doctest::Approx(2.25));
    CHECK_THROWS_AS(MPModel(0.0), DomainError);
    CHECK_THROWS_AS(MPModel(1.0), DomainError);
    CHECK_THROWS_AS(MPModel(-0.5), DomainError);
}

TEST_CASE("empirical_stieltjes examples") {
    const Complex i(0, 1);
    const Complex a = empirical_stieltjes(Vector::Ones(7), i);
    CHECK(a.real() == doctest::Approx(0.5));
    CHECK(a.imag() == doctest::Approx(0.5));
    const Complex b = empirical_stieltjes(vec({2}), i);
    CHECK(b.real() == doctest::Approx(0.4));
    CHECK(b.imag() == doctest::Approx(0.2));
    const Vector l = vec({3, 1.5, 0.2});
    const Vector dup = vec({3, 1.5, 0.2, 3, 1.5, 0.2});
    const Complex z(0.7, 0.3);
    CHECK(std::abs(empirical_stieltjes(l, z) - empirical_stieltjes(dup, z)) < 1e-15);
    CHECK_THROWS_AS(empirical_stieltjes(l, Complex(1, 0)), DomainError);
    CHECK_THROWS_AS(empirical_stieltjes(l, Complex(1, -1)), DomainError);
}

TEST_CASE("naive_hilbert examples") {
    const Vector l = vec({3, 1});
    CHECK(naive_hilbert(l, 0) == doctest::Approx(-0.25));
    CHECK(naive_hilbert(l, 1) == doctest::Approx(0.25));
    CHECK(naive_hilbert(vec({4}), 0) == 0);
    CHECK_THROWS_AS(naive_hilbert(vec({2, 2}), 0), TieError);
    CHECK_THROWS_AS(naive_hilbert(l, 2), DomainError);
}

TEST_CASE("naive_hilbert terms cancel pairwise") {
    std::mt19937_64 rng(2);
    for (int draw = 0; draw < 100; ++draw) {
        const Vector l = covshrink::testing::random_descending(10, rng);
        double total = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < 10; ++i) {
            const double h = naive_hilbert(l, i);
            double exact = 0.0;
            for (Eigen::Index j = 0; j < 10; ++j) {
                if (j != static_cast<Eigen::Index>(i)) exact += 1.0 / (l(j) - l(i));
            }
            REQUIRE(h * 10 == doctest::Approx(exact).epsilon(1e-13));
            total += h;
            scale = std::max(scale, std::abs(h));
        }
        REQUIRE(std::abs(total) < 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("mp_density examples") {
    const MPModel m(0.25);
    CHECK(mp_density(1.0, m) == doctest::Approx(0.616404444061499806).epsilon(1e-14));
    CHECK(mp_density(1.25, m) == doctest::Approx(0.509295817894065074).epsilon(1e-14));
    CHECK(mp_density(m.lambda_minus(), m) == 0);
    CHECK(mp_density(m.lambda_plus(), m) == 0);
    CHECK(mp_density(0.1, m) == 0);
    CHECK(mp_density(3.0, m) == 0);
}

TEST_CASE("mp_density integrates to one") {
    for (double c : {0.1, 0.25, 0.5, 0.9}) {
        const MPModel m(c);
        CHECK(cdf_oracle(m.lambda_plus(), m) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(mp_cdf(m.lambda_plus(), m) - mp_cdf(m.lambda_minus(), m) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("mp_cdf against tanh-sinh oracle") {
    CHECK(mp_cdf(1.25, MPModel(0.25)) == doctest::Approx(0.693868919416281521).epsilon(1e-9));
    CHECK(mp_cdf(1.0, MPModel(0.5)) == doctest::Approx(0.576004215103868562).epsilon(1e-9));
    for (double c : {0.1, 0.5, 0.9}) {
        const MPModel m(c);
        for (int k = 1; k < 20; ++k) {
            const double x = m.lambda_minus() + (m.lambda_plus() - m.lambda_minus()) * k / 20.0;
            REQUIRE(mp_cdf(x, m) == doctest::Approx(cdf_oracle(x, m)).epsilon(1e-8));
        }
    }
}

TEST_CASE("mp_cdf edges and monotonicity") {
    const MPModel m(0.25);
    CHECK(mp_cdf(0.0, m) == 0);
    CHECK(mp_cdf(m.lambda_minus(), m) == 0);
    CHECK(mp_cdf(m.lambda_plus(), m) == 1);
    CHECK(mp_cdf(10.0, m) == 1);
    double prev = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double x = m.lambda_minus() + (m.lambda_plus() - m.lambda_minus()) * k / 1000.0;
        const double f = mp_cdf(x, m);
        REQUIRE(f >= prev);
        prev = f;
    }
}

TEST_CASE("identity_hilbert examples") {
    CHECK(identity_hilbert(1.0, MPModel(0.5)) == doctest::Approx(-0.5));
    CHECK(identity_hilbert(1.0, MPModel(0.25)) == doctest::Approx(-0.5));
    CHECK(identity_hilbert(0.75, MPModel(0.25)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(identity_hilbert(0.0, MPModel(0.25)), DomainError);
}

TEST_CASE("identity_hilbert matches principal-value quadrature") {
    for (double c : {0.25, 0.5}) {
        const MPModel m(c);
        for (int k = 1; k < 10; ++k) {
            const double x = m.lambda_minus() + (m.lambda_plus() - m.lambda_minus()) * k / 10.0;
            REQUIRE(identity_hilbert(x, m) == doctest::Approx(hilbert_oracle(x, m)).epsilon(1e-7));
        }
    }
}

TEST_CASE("boundary Stieltjes value: Sokhotski-Plemelj consistency") {
    const MPModel m(0.5);
    for (int k = 1; k <= 200; ++k) {
        const double x = m.lambda_minus() + (m.lambda_plus() - m.lambda_minus()) * k / 201.0;
        const Complex b = mp_boundary_stieltjes(x, m);
        REQUIRE(std::abs(b.real() - identity_hilbert(x, m)) < 1e-10);
        REQUIRE(std::abs(b.imag() - pi * mp_density(x, m)) < 1e-10);
        const Complex near = mp_stieltjes(Complex(x, 1e-12), m);
        REQUIRE(std::abs(near - b) < 1e-5);
    }
}

TEST_CASE("Stieltjes transform solves the MP equation") {
    for (double c : {0.1, 0.5, 0.9}) {
        const MPModel m(c);
        for (double re : {-1.0, 0.2, 1.0, 2.5, 5.0}) {
            for (double im : {1e-3, 0.1, 1.0, 10.0}) {
                const Complex z(re, im);
                const Complex s = mp_stieltjes(z, m);
                REQUIRE(s.imag() > 0);
                REQUIRE(std::abs(mp_equation_residual(z, s, m)) < 1e-8);
            }
        }
    }
    CHECK_THROWS_AS(mp_stieltjes(Complex(1, 0), MPModel(0.5)), DomainError);
}

TEST_CASE("Stieltjes transform agrees with Wishart spectra") {
    std::mt19937_64 rng(13);
    const Vector l = Eigen::SelfAdjointEigenSolver<Matrix>(
                         covshrink::testing::wishart_sample(200, 800, rng))
                         .eigenvalues();
    const MPModel m(0.25);
    const Complex z(1.0, 0.5);
    CHECK(std::abs(empirical_stieltjes(l, z) - mp_stieltjes(z, m)) < 0.02);
}

TEST_CASE("quantile_map examples") {
    CHECK(quantile_map(1.0, 0.5, -0.5) == doctest::Approx(4.0 / 3.0));
    CHECK(quantile_map(1.7, 1e-15, 3.0) == doctest::Approx(1.7));
    for (double c : {0.1, 0.5}) {
        const MPModel m(c);
        for (double l : {0.5, 1 - c, 1.3}) {
            const double gamma = quantile_map(l, c, identity_hilbert(l, m));
            REQUIRE(gamma == doctest::Approx(2 * l / (1 - c + l)));
        }
        CHECK(quantile_map(1 - c, c, identity_hilbert(1 - c, m)) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(quantile_map(1.0, 0.5, 1.0), ShrinkageSingularity);
}

TEST_CASE("quantile_index examples") {
    CHECK(quantile_index(100, 0.05) == 95);
    CHECK(quantile_index(10, 0.5) == 5);
    CHECK(quantile_index(10, 0.999) == 1);
    CHECK(quantile_index(10, 1e-9) == 9);
    CHECK_THROWS_AS(quantile_index(10, 0.0), DomainError);
    CHECK_THROWS_AS(quantile_index(10, 1.0), DomainError);
}

TEST_CASE("ks_distance_to_mp") {
    const MPModel m(0.25);
    // Eigenvalues at the MP midpoint quantiles are within 1/(2p) of the law.
    const int p = 200;
    Vector q(p);
    for (int i = 0; i < p; ++i) {
        double lo = m.lambda_minus();
        double hi = m.lambda_plus();
        const double target = (i + 0.5) / p;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mp_cdf(mid, m) < target ? lo : hi) = mid;
        }
        q(i) = 0.5 * (lo + hi);
    }
    CHECK(ks_distance_to_mp(q, m) <= 0.5 / p + 1e-6);
    CHECK(ks_distance_to_mp(Vector::Constant(10, 5.0), m) == doctest::Approx(1.0));
}
