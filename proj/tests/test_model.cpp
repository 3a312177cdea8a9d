#include "doctest.h"

#include "oracles.hpp"

#include "lobhawkes/error.hpp"
#include "lobhawkes/kernels.hpp"
#include "lobhawkes/linlog_grid.hpp"
#include "lobhawkes/model.hpp"

#include <cmath>

using namespace lobhawkes;

TEST_CASE("lin-log grid") {
    const auto g = build_linlog_grid({});
    CHECK(g.bins() == 1550);
    CHECK(g.edges.front() == 0.0);
    CHECK(g.edges[50] == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(g.edges.back() == 2e4);
    for (std::size_t k = 1; k < 50; ++k) CHECK(g.width(k) == doctest::Approx(2e-5).epsilon(1e-9));
    const double ratio = g.right(60) / g.left(60);
    for (std::size_t k = 51; k < g.bins(); ++k) CHECK(g.right(k) / g.left(k) == doctest::Approx(ratio).epsilon(1e-9));

    CHECK(g.bin_of(0.0) == 0);
    CHECK(g.bin_of(2e4) == static_cast<long>(g.bins() - 1));
    CHECK(g.bin_of(-1e-9) == -1);
    CHECK(g.bin_of(2e4 * 1.0001) == -1);
    for (std::size_t k = 0; k < g.bins(); k += 97) CHECK(g.bin_of(0.5 * (g.left(k) + g.right(k))) == static_cast<long>(k));

    CHECK_THROWS_AS(build_linlog_grid({1e-4, 1e-3, 0.0, 2e4, 50, 1500}), InvalidArgument);
    CHECK_THROWS_AS(build_linlog_grid({0.0, 1.0, 0.0, 0.5, 10, 10}), InvalidArgument);
}

TEST_CASE("kernel integrals agree with quadrature") {
    const std::vector<KernelSpec> kernels{
        KernelSpec::exponential(0.5, 10.0),
        KernelSpec(kernel::SumExponential{{{0.2, 50.0}, {0.1, 2.0}}}),
        KernelSpec(kernel::PowerLaw{0.3, 1.5, 0.01}),
        KernelSpec(kernel::Tabulated{{0.0, 0.1, 0.3}, {2.0, 1.0, 0.0}}),
    };
    for (const auto& k : kernels) {
        double numeric = 0.0;
        // piecewise geometric panels out to a long horizon
        double a = 0.0;
        double b = 1e-4;
        while (a < 1e5) {
            numeric += oracle::simpson([&](double t) { return k.value(t); }, a, b, 32);
            a = b;
            b *= 1.5;
        }
        CHECK(numeric == doctest::Approx(k.integral()).epsilon(2e-4));
        CHECK(k.abs_integral() == doctest::Approx(k.integral()));
        CHECK(k.nonnegative());
        CHECK(k.value(-1.0) == 0.0);
        CHECK(std::abs(k.value(k.support_horizon(1e-8))) <= 1.0001e-8);
    }
    const auto tab = KernelSpec(kernel::Tabulated{{0.0, 0.1, 0.3}, {2.0, 1.0, 0.0}});
    CHECK(tab.integral() == doctest::Approx(0.15 + 0.1));
    CHECK(tab.value(0.05) == doctest::Approx(1.5));

    const auto inhib = KernelSpec::exponential(-0.4, 10.0);
    CHECK_FALSE(inhib.nonnegative());
    CHECK(inhib.positive_integral() == 0.0);
    CHECK(inhib.abs_integral() == doctest::Approx(0.4));
    CHECK(inhib.positive_sup_from(0.0) == 0.0);
    CHECK(KernelSpec::exponential(0.5, 10.0).positive_sup_from(0.1) == doctest::Approx(5.0 * std::exp(-1.0)));
}

TEST_CASE("kernel JSON round trip") {
    const std::vector<KernelSpec> kernels{KernelSpec(), KernelSpec::exponential(0.5, 10.0),
                                          KernelSpec(kernel::SumExponential{{{0.2, 50.0}, {-0.1, 2.0}}}),
                                          KernelSpec(kernel::PowerLaw{0.3, 1.5, 0.01}),
                                          KernelSpec(kernel::Tabulated{{0.0, 0.1}, {2.0, 1.0}})};
    for (const auto& k : kernels) {
        const auto back = KernelSpec::from_json(k.to_json());
        CHECK(back.to_json() == k.to_json());
        for (double t : {0.0, 0.01, 0.05, 0.2, 3.0}) CHECK(back.value(t) == k.value(t));
    }
    CHECK_THROWS_AS(KernelSpec::from_json(nlohmann::json{{"type", "gaussian"}}), InvalidArgument);
}

TEST_CASE("spectral radius") {
    Eigen::MatrixXd d(2, 2);
    d << 0.3, 0.0, 0.0, 0.5;
    CHECK(spectral_radius(d) == doctest::Approx(0.5).epsilon(1e-10));
    Eigen::MatrixXd nil(2, 2);
    nil << 0.0, 1.0, 0.0, 0.0;
    CHECK(spectral_radius(nil) == 0.0);
    Eigen::MatrixXd sym(2, 2);
    sym << 0.4, 0.2, 0.2, 0.4;
    CHECK(spectral_radius(sym) == doctest::Approx(0.6).epsilon(1e-10));
    Eigen::MatrixXd perm(2, 2);
    perm << 0.0, 0.7, 0.7, 0.0;  // eigenvalues +-0.7: plain power iteration oscillates
    CHECK(spectral_radius(perm) == doctest::Approx(0.7).epsilon(1e-9));
    Eigen::MatrixXd rect(2, 3);
    CHECK_THROWS_AS(spectral_radius(rect), InvalidArgument);
}

TEST_CASE("models") {
    Eigen::VectorXd mu(2);
    mu << 1.0, 0.5;
    std::vector<std::vector<KernelSpec>> k(2, std::vector<KernelSpec>(2));
    k[0][0] = KernelSpec::exponential(0.3, 10.0);
    k[1][0] = KernelSpec::exponential(0.2, 5.0);
    const auto m = HawkesModel::linear(mu, k);
    m.validate();

    SUBCASE("mean intensity solves the stationarity relation") {
        const Eigen::VectorXd lambda = mean_intensity(m);
        const Eigen::VectorXd back = lambda - m.norm_matrix() * lambda;
        CHECK(back[0] == doctest::Approx(1.0));
        CHECK(back[1] == doctest::Approx(0.5));
        CHECK(lambda[0] == doctest::Approx(1.0 / 0.7));
    }
    SUBCASE("JSON round trip and hash") {
        const auto back = HawkesModel::from_json(m.to_json());
        CHECK(back.to_json() == m.to_json());
        CHECK(back.hash() == m.hash());
        CHECK(m.hash().size() == 64);
        auto other = m;
        other.mu[0] = 1.5;
        CHECK(other.hash() != m.hash());
    }
    SUBCASE("instability and sign errors") {
        auto hot = k;
        hot[0][0] = KernelSpec::exponential(1.1, 10.0);
        CHECK_THROWS_AS(HawkesModel::linear(mu, hot).validate(), InstabilityError);
        auto neg = k;
        neg[0][1] = KernelSpec::exponential(-0.2, 10.0);
        CHECK_THROWS_AS(HawkesModel::linear(mu, neg).validate(), InvalidArgument);
        CHECK_NOTHROW(HawkesModel::positive_part(mu, neg).validate());
        Eigen::VectorXd bad(2);
        bad << 1.0, -0.1;
        CHECK_THROWS_AS(HawkesModel::linear(bad, k).validate(), InvalidArgument);
    }
    SUBCASE("factorized form") {
        FactorizedMarks marks;
        marks.base = KernelSpec::exponential(0.4, 10.0);
        marks.f = {1.0, 2.0};
        marks.probs = {0.25, 0.75};
        const auto f = HawkesModel::make_factorized(2.0, marks);
        CHECK(f.flavor == Flavor::factorized);
        CHECK(f.mu[0] == doctest::Approx(0.5));
        CHECK(f.mu[1] == doctest::Approx(1.5));
        const auto n = f.norm_matrix();
        CHECK(n(1, 0) == doctest::Approx(0.75 * 1.0 * 0.4));
        CHECK(n(0, 1) == doctest::Approx(0.25 * 2.0 * 0.4));
        // rank one: ratios of columns are constant
        CHECK(n(0, 1) / n(0, 0) == doctest::Approx(n(1, 1) / n(1, 0)));
        const auto back = HawkesModel::from_json(f.to_json());
        CHECK(back.to_json() == f.to_json());
        CHECK(back.norm_matrix().isApprox(n));
        marks.probs = {0.5, 0.6};
        CHECK_THROWS_AS(HawkesModel::make_factorized(1.0, marks), InvalidArgument);
    }
}
