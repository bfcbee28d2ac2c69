#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "qbsde/paths.hpp"

using namespace qbsde;

TEST_CASE("same seed reproduces increments bit for bit") {
    const TimeGrid grid(1.0, 1);
    const auto a = generate_paths(7, 1, grid, 1);
    const auto b = generate_paths(7, 1, grid, 1);
    CHECK(a.increments == b.increments);
    const auto c = generate_paths(8, 1, grid, 1);
    CHECK(a.increments != c.increments);
}

TEST_CASE("increment moments: mean 0, variance T/N at 5 sigma") {
    const int M = 100000;
    const auto ens = generate_paths(11, M, TimeGrid(4.0, 1), 1);
    double mean = 0.0, var = 0.0;
    for (int m = 0; m < M; ++m) mean += ens.inc(m, 0, 0);
    mean /= M;
    for (int m = 0; m < M; ++m) {
        const double d = ens.inc(m, 0, 0) - mean;
        var += d * d;
    }
    var /= M - 1;
    CHECK(std::abs(mean) < 5.0 * std::sqrt(4.0 / M));
    CHECK(var > 3.9);
    CHECK(var < 4.1);
}

TEST_CASE("coordinates are uncorrelated") {
    const int M = 100000;
    const auto ens = generate_paths(13, M, TimeGrid(1.0, 2), 2);
    for (int k = 0; k < 2; ++k) {
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (int m = 0; m < M; ++m) {
            const double x = ens.inc(m, k, 0);
            const double y = ens.inc(m, k, 1);
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        const double corr = sxy / std::sqrt(sxx * syy);
        CHECK(std::abs(corr) < 0.02);
    }
}

TEST_CASE("invalid sizes rejected") {
    CHECK_THROWS_AS(generate_paths(1, 0, TimeGrid(1.0, 1), 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_paths(1, 1, TimeGrid(1.0, 1), 0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
}

TEST_CASE("ito integral of 0 and of 1") {
    const auto ens = generate_paths(3, 64, TimeGrid(1.0, 8), 1);
    PathProcess zero(ens, 1);
    const auto izero = ito_integral(zero, ens);
    for (double v : izero.values) CHECK(v == 0.0);

    PathProcess one(ens, 1);
    for (auto& v : one.values) v = 1.0;
    const auto ione = ito_integral(one, ens);
    for (int m = 0; m < ens.M; ++m) {
        CHECK(ione.at(m, 0, 0) == 0.0);
        CHECK(ione.at(m, ens.grid.N, 0) ==
              doctest::Approx(ens.b(m, ens.grid.N, 0)).epsilon(1e-14));
    }
}

TEST_CASE("ito integral of B has zero mean at T") {
    const int M = 100000;
    const auto ens = generate_paths(17, M, TimeGrid(1.0, 16), 1);
    const auto b = brownian_process(ens);
    const auto integ = ito_integral(b, ens);
    double mean = 0.0;
    for (int m = 0; m < M; ++m) mean += integ.at(m, ens.grid.N, 0);
    mean /= M;
    CHECK(std::abs(mean) < 0.02);
}

TEST_CASE("ito isometry within 5 standard errors") {
    const int M = 50000;
    const auto ens = generate_paths(19, M, TimeGrid(1.0, 16), 1);
    PathProcess z(ens, 1);
    for (int m = 0; m < M; ++m)
        for (int k = 0; k <= ens.grid.N; ++k) z.at(m, k, 0) = std::sin(ens.b(m, k, 0));
    const auto integ = ito_integral(z, ens);
    const auto tint = time_integral(squared_norm_process(z), ens);
    std::vector<double> diffs(M);
    double diff_mean = 0.0, diff_var = 0.0;
    for (int m = 0; m < M; ++m) {
        const double a = integ.at(m, ens.grid.N, 0);
        diffs[m] = a * a - tint.at(m, ens.grid.N, 0);
        diff_mean += diffs[m];
    }
    diff_mean /= M;
    for (int m = 0; m < M; ++m) diff_var += (diffs[m] - diff_mean) * (diffs[m] - diff_mean);
    diff_var /= M - 1;
    CHECK(std::abs(diff_mean) < 5.0 * std::sqrt(diff_var / M));
}

TEST_CASE("time integral: constants and left Riemann sums") {
    const auto ens = generate_paths(23, 4, TimeGrid(1.0, 4), 1);
    PathProcess c(ens, 1);
    for (auto& v : c.values) v = 2.5;
    const auto ic = time_integral(c, ens);
    for (int m = 0; m < 4; ++m) CHECK(ic.at(m, 4, 0) == doctest::Approx(2.5).epsilon(1e-15));

    PathProcess tproc(ens, 1);
    for (int m = 0; m < 4; ++m)
        for (int k = 0; k <= 4; ++k) tproc.at(m, k, 0) = ens.grid.t(k);
    const auto it = time_integral(tproc, ens);
    // (0 + 1/4 + 1/2 + 3/4) / 4
    for (int m = 0; m < 4; ++m) CHECK(it.at(m, 4, 0) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("adaptedness: perturbing increment j leaves values at k <= j unchanged") {
    const auto ens = generate_paths(29, 8, TimeGrid(1.0, 8), 1);
    BrownianEnsemble bumped = ens;
    const int j = 3;
    for (int m = 0; m < bumped.M; ++m) {
        bumped.increments[static_cast<std::size_t>(m) * 8 + j] += 0.5;
        for (int k = j + 1; k <= 8; ++k)
            bumped.bvalues[static_cast<std::size_t>(m) * 9 + k] += 0.5;
    }
    const auto b0 = brownian_process(ens);
    const auto b1 = brownian_process(bumped);
    const auto i0 = ito_integral(b0, ens);
    const auto i1 = ito_integral(b1, bumped);
    for (int m = 0; m < 8; ++m)
        for (int k = 0; k <= j; ++k) {
            CHECK(b0.at(m, k, 0) == b1.at(m, k, 0));
            CHECK(i0.at(m, k, 0) == i1.at(m, k, 0));
        }
}

TEST_CASE("shape mismatches throw") {
    const auto ens = generate_paths(1, 4, TimeGrid(1.0, 4), 2);
    PathProcess wrong(ens, 1);  // d = 2 expected
    CHECK_THROWS_AS(ito_integral(wrong, ens), std::invalid_argument);
    const auto other = generate_paths(1, 4, TimeGrid(1.0, 4), 1);
    PathProcess foreign(other, 1);
    CHECK_THROWS_AS(time_integral(foreign, ens), std::invalid_argument);
}
