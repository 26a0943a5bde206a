#include <doctest.h>

#include <cmath>

#include "hp43/errors.hpp"
#include "hp43/renorm.hpp"
#include "hp43/stats.hpp"
#include "oracles.hpp"

using namespace hp43;

TEST_CASE("Bessel symbols")
{
    CHECK(bessel_symbol({0, 0, 0}, 1.3) == 1.0);
    CHECK(bessel_symbol({1, 0, 0}, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    const FourierField c = FourierField::constant(3.0, 2);
    CHECK(oracle::max_abs(apply_V0(c, 1.0)) == 0.0);
    CHECK(apply_V(c, 1.0)(FrequencyIndex{}).real() == 3.0);
}

TEST_CASE("sigma_N")
{
    CHECK(sigma_N(0) == 1.0);
    CHECK(sigma_N(1) == doctest::Approx(4.0).epsilon(1e-15));
    double direct = 0.0;
    for (auto n : oracle::ball(5)) direct += oracle::c(n);
    CHECK(sigma_N(5) == doctest::Approx(direct).epsilon(1e-14));
    for (int N = 1; N <= 10; ++N) CHECK(sigma_N(N) >= sigma_N(N - 1));
}

TEST_CASE("alpha_N matches the naive double sum")
{
    for (int N = 1; N <= 5; ++N)
        for (double beta : {0.5, 1.5, 2.0, 2.5}) {
            const double fast = alpha_N(N, beta);
            CHECK(std::abs(fast - oracle::alpha(N, beta)) <= 1e-10 * fast);
        }
    CHECK(alpha_N(1, 2.0) == doctest::Approx(oracle::alpha(1, 2.0)).epsilon(1e-12));
    for (int N = 2; N <= 8; ++N) CHECK(alpha_N(N, 1.5) >= alpha_N(N - 1, 1.5));
}

TEST_CASE("kappa_N matches the direct sum and is even")
{
    const FourierField k1 = kappa_N(1, 2.0);
    CHECK(k1(FrequencyIndex{}).real() == doctest::Approx(1.5).epsilon(1e-13));
    for (int N = 1; N <= 5; ++N) {
        const FourierField k = kappa_N(N, 1.5);
        for (auto n : k.lattice().points()) {
            const double direct = oracle::kappa(n, N, 1.5);
            CHECK(std::abs(k(n).real() - direct) <= 1e-10 * direct);
            CHECK(k(n).real() == doctest::Approx(k(-n).real()).epsilon(1e-13));
            CHECK(std::abs(k(n).imag()) == 0.0);
        }
    }
    const FourierField a = kappa_N(4, 1.5), b = kappa_N(5, 1.5);
    for (auto n : a.lattice().points()) CHECK(b(n).real() >= a(n).real());
}

TEST_CASE("singularity constants")
{
    const auto sc = singularity_constants(2, 0.5);
    double direct = 0.0;
    int count = 0;
    for (auto n : oracle::ball(2)) {
        direct += std::pow(n.bracket2(), -1.5);
        ++count;
    }
    CHECK(count == 33);
    CHECK(sc.A_N == doctest::Approx(direct).epsilon(1e-14));
    CHECK(sc.B_N == doctest::Approx(std::pow(std::log(2.0), -0.25) / std::sqrt(direct)).epsilon(1e-15));
    CHECK_THROWS_AS(singularity_constants(1, 0.5), ConfigError);
}

TEST_CASE("cubic mode variance matches the contraction sum")
{
    for (int N = 1; N <= 3; ++N)
        for (double beta : {0.5, 1.0}) {
            const auto var = cubic_mode_variance(N, beta);
            const auto pts = Lattice::get(N)->points();
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double direct = oracle::cubic_variance(pts[i], N, beta);
                CHECK(std::abs(var[i] - direct) <= 1e-10 * direct);
            }
        }
    CHECK(c_N_exact(4, 0.5) == doctest::Approx(oracle::c_N(4, 0.5)).epsilon(1e-10));
}

TEST_CASE("C_N Monte Carlo agrees with the exact constant")
{
    for (int N : {2, 4}) {
        const Estimate mc = c_N_monte_carlo(N, 0.5, {400, 32, 17});
        const double exact = oracle::c_N(N, 0.5);
        CHECK(std::abs(mc.value - exact) <= 3.0 * mc.se + 2e-3 * exact);
    }
}

TEST_CASE("renormalization table")
{
    const RenormTable t = RenormTable::build(4, 1.5);
    CHECK(t.sigma_N == sigma_N(4));
    CHECK(t.alpha_N == alpha_N(4, 1.5));
    CHECK(t.B_N == doctest::Approx(std::pow(std::log(4.0), -0.25) / std::sqrt(t.A_N)).epsilon(1e-15));
    CHECK_THROWS_AS(RenormTable::build(0, 1.5), ConfigError);
    CHECK_THROWS_AS(RenormTable::build(4, -1.0), ConfigError);
}
