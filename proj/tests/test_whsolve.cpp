#include "doctest.h"

#include "oracles.hpp"

#include "lobhawkes/error.hpp"
#include "lobhawkes/whsolve.hpp"

#include <cmath>
#include <limits>

using namespace lobhawkes;

namespace {

using Curve = std::function<double(double)>;

Curve zero_curve() {
    return [](double) { return 0.0; };
}

} // namespace

TEST_CASE("quadrature grid") {
    const auto q = build_quadrature({});
    CHECK(q.size() == 161);
    double sum = 0.0;
    for (double w : q.weights) sum += w;
    CHECK(std::abs(sum - 0.5) / 0.5 <= 1e-12);
    CHECK(q.nodes.front() == 0.0);
    CHECK(q.nodes.back() == 0.5);
    CHECK(q.nodes[80] == doctest::Approx(5e-4).epsilon(1e-12));

    const auto t = quadrature_from_nodes({0.0, 0.1, 0.3});
    REQUIRE(t.weights.size() == 3);
    CHECK(t.weights[0] == doctest::Approx(0.05));
    CHECK(t.weights[1] == doctest::Approx(0.15));
    CHECK(t.weights[2] == doctest::Approx(0.1));
    CHECK_THROWS_AS(quadrature_from_nodes({0.0, 0.0, 1.0}), InvalidArgument);
}

TEST_CASE("closed-form 1D conditional law satisfies the integral equation") {
    const double alpha = 0.5;
    const double beta = 10.0;
    const auto phi = [&](double t) { return t < 0.0 ? 0.0 : alpha * beta * std::exp(-beta * t); };
    const auto g = [&](double t) { return oracle::exp_conditional_law(alpha, beta, std::abs(t)); };
    CHECK(g(0.0) == doctest::Approx(7.5));
    CHECK(oracle::simpson(g, 0.0, 8.0, 4000) == doctest::Approx(1.5).epsilon(1e-9));
    for (double t : {0.0, 0.05, 0.2, 1.0}) {
        // g(t) = phi(t) + int_0^inf phi(u) g(t - u) du, split at u = t where g has a kink
        double conv = oracle::simpson([&](double u) { return phi(u) * g(t - u); }, 0.0, t, 400);
        conv += oracle::simpson([&](double u) { return phi(u) * g(t - u); }, t, t + 6.0, 6000);
        CHECK(g(t) == doctest::Approx(phi(t) + conv).epsilon(1e-7));
    }
}

TEST_CASE("1D exponential kernel from its exact conditional law") {
    const auto grid = build_linlog_grid({0.0, 1e-3, 0.0, 1.0, 50, 400});
    Eigen::VectorXd lambda(1);
    lambda << 2.0;
    const auto claw = oracle::synthetic_law(grid, lambda, {{[](double t) { return oracle::exp_conditional_law(0.5, 10.0, t); }}});
    const auto est = solve_wiener_hopf(claw, build_quadrature({}));

    const double truncated = 0.5 * (1.0 - std::exp(-5.0));
    CHECK(est.norms(0, 0) == doctest::Approx(truncated).epsilon(0.01));
    CHECK(est.mu[0] == doctest::Approx(2.0 * (1.0 - est.norms(0, 0))));
    for (std::size_t m = 0; m < est.quad.size(); m += 10) {
        const double x = est.quad.nodes[m];
        CHECK(est.kernel(0, 0)[static_cast<Eigen::Index>(m)] == doctest::Approx(5.0 * std::exp(-10.0 * x)).epsilon(0.03));
    }
    CHECK(est.diagnostics.residual < 1e-12);
    CHECK(wiener_hopf_residual(claw, est) < 1e-12);
}

TEST_CASE("2D directed kernel from its exact conditional laws") {
    const double a = 0.4;
    const double b = 10.0;
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 1.0 + a;
    const Curve psi = [=](double t) { return a * b * std::exp(-b * t); };
    const Curve g22 = [=](double t) { return 1.0 / (1.0 + a) * a * a * b * std::exp(-b * t) / 2.0; };
    const auto grid = build_linlog_grid({0.0, 1e-3, 0.0, 1.0, 50, 400});
    const auto claw = oracle::synthetic_law(grid, lambda, {{zero_curve(), zero_curve()}, {psi, g22}});
    const auto est = solve_wiener_hopf(claw, build_quadrature({}));
    CHECK(std::abs(est.norms(0, 0)) < 0.01);
    CHECK(std::abs(est.norms(0, 1)) < 0.01);
    CHECK(std::abs(est.norms(1, 1)) < 0.01);
    CHECK(est.norms(1, 0) == doctest::Approx(a * (1.0 - std::exp(-5.0))).epsilon(0.01));
    CHECK(est.mu[0] == doctest::Approx(1.0).epsilon(0.01));
    CHECK(est.mu[1] == doctest::Approx(1.0).epsilon(0.01));
    CHECK(est.rescaled(1, 0) == doctest::Approx(est.norms(1, 0) / (1.0 + a)));
}

TEST_CASE("assembly and solve match hand elimination") {
    const auto grid = build_linlog_grid({0.0, 0.1, 0.0, 1.0, 2, 6});
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 3.0;
    auto claw = oracle::synthetic_law(grid, lambda, {{zero_curve(), zero_curve()}, {zero_curve(), zero_curve()}});
    for (std::size_t idx = 0; idx < 4; ++idx)
        for (std::size_t k = 0; k < grid.bins(); ++k)
            claw.values[idx][k] = 0.3 * std::cos(static_cast<double>(3 * idx + k)) + 0.1 * static_cast<double>(idx);
    const auto quad = quadrature_from_nodes({0.0, 0.07, 0.2, 0.45});

    // g^{ij}(t) by hand: bin lookup for t >= 0, (L_i / L_j) g^{ji}(-t) below
    const auto g = [&](std::size_t i, std::size_t j, double t) {
        const auto lookup = [&](std::size_t a, std::size_t b, double x) {
            for (std::size_t k = 0; k < grid.bins(); ++k)
                if (x >= grid.left(k) && (x < grid.right(k) || k + 1 == grid.bins())) return claw.values[a * 2 + b][k];
            return 0.0;
        };
        return t >= 0.0 ? lookup(i, j, t) : lambda[static_cast<Eigen::Index>(i)] / lambda[static_cast<Eigen::Index>(j)] * lookup(j, i, -t);
    };
    const std::size_t n = quad.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    Eigen::MatrixXd rhs(2 * n, 2);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t q = 0; q < n; ++q) {
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t m = 0; m < n; ++m)
                    a(static_cast<Eigen::Index>(j * n + q), static_cast<Eigen::Index>(k * n + m)) +=
                        quad.weights[m] * g(k, j, quad.nodes[q] - quad.nodes[m]);
            for (std::size_t i = 0; i < 2; ++i) rhs(static_cast<Eigen::Index>(j * n + q), static_cast<Eigen::Index>(i)) = g(i, j, quad.nodes[q]);
        }
    const auto sys = assemble_wiener_hopf(claw, quad);
    CHECK((sys.a - a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sys.b - rhs).cwiseAbs().maxCoeff() == 0.0);

    const Eigen::MatrixXd u = oracle::gauss_solve(a, rhs);
    const auto est = solve_wiener_hopf(claw, quad);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t m = 0; m < n; ++m)
                CHECK(est.kernel(i, k)[static_cast<Eigen::Index>(m)] ==
                      doctest::Approx(u(static_cast<Eigen::Index>(k * n + m), static_cast<Eigen::Index>(i))).epsilon(1e-12));
    CHECK(est.diagnostics.unknowns == 2 * n);
}

TEST_CASE("time rescaling leaves norms unchanged") {
    const double c = 3.0;
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 1.6;
    const Curve g11 = [](double t) { return 1.5 * std::exp(-6.0 * t); };
    const Curve g21 = [](double t) { return 2.0 * std::exp(-4.0 * t); };
    const Curve g12 = [](double t) { return 0.2 * std::exp(-2.0 * t); };
    const Curve g22 = [](double t) { return 0.8 * std::exp(-9.0 * t); };
    const auto scaled = [c](Curve f) { return Curve([=](double t) { return f(t / c) / c; }); };

    const auto grid = build_linlog_grid({0.0, 1e-3, 0.0, 1.0, 50, 200});
    const auto grid_c = build_linlog_grid({0.0, c * 1e-3, 0.0, c * 1.0, 50, 200});
    const auto claw = oracle::synthetic_law(grid, lambda, {{g11, g12}, {g21, g22}});
    const auto claw_c = oracle::synthetic_law(grid_c, lambda / c, {{scaled(g11), scaled(g12)}, {scaled(g21), scaled(g22)}});
    QuadratureParams qp;
    QuadratureParams qp_c;
    qp_c.x_min *= c;
    qp_c.x_max *= c;
    const auto est = solve_wiener_hopf(claw, build_quadrature(qp));
    const auto est_c = solve_wiener_hopf(claw_c, build_quadrature(qp_c));
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) CHECK(est_c.norms(i, j) == doctest::Approx(est.norms(i, j)).epsilon(1e-6));
    CHECK(est_c.mu[0] * c == doctest::Approx(est.mu[0]).epsilon(1e-6));
    CHECK(est_c.kernel(1, 0)[40] * c == doctest::Approx(est.kernel(1, 0)[40]).epsilon(1e-6));
}

TEST_CASE("exact identities") {
    const auto grid = build_linlog_grid({0.0, 1e-3, 0.0, 1.0, 50, 200});
    Eigen::VectorXd lambda(2);
    lambda << 0.7, 2.5;
    const auto claw = oracle::synthetic_law(
        grid, lambda,
        {{[](double t) { return 3.0 * std::exp(-20.0 * t); }, [](double t) { return -0.5 * std::exp(-5.0 * t); }},
         {[](double t) { return 1.0 * std::exp(-2.0 * t); }, [](double t) { return 4.0 * std::exp(-30.0 * t); }}});
    const auto est = solve_wiener_hopf(claw, build_quadrature({}));
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double closure = est.rescaled.row(i).sum() + est.mu[i] / est.lambda[i];
        CHECK(std::abs(closure - 1.0) <= 16 * std::numeric_limits<double>::epsilon());
        CHECK(est.ratios[i] == doctest::Approx(100.0 * est.mu[i] / est.lambda[i]));
    }
    CHECK(kernel_norms(est).isApprox(est.norms));
    CHECK(recover_baseline(est.norms, est.lambda).isApprox(est.mu));

    // uniform intensities: rescaled norms equal norms
    Eigen::MatrixXd n(2, 2);
    n << 0.1, 0.2, 0.3, 0.4;
    Eigen::VectorXd flat(2);
    flat << 1.3, 1.3;
    CHECK(rescaled_norms(n, flat) == n);
}

TEST_CASE("error propagation is linear in the input error bars") {
    const auto grid = build_linlog_grid({0.0, 1e-3, 0.0, 1.0, 50, 200});
    Eigen::VectorXd lambda(1);
    lambda << 2.0;
    auto claw = oracle::synthetic_law(grid, lambda, {{[](double t) { return oracle::exp_conditional_law(0.5, 10.0, t); }}});
    for (auto& se : claw.stderrs[0]) se = 0.1;
    const auto quad = build_quadrature({});
    const auto a = solve_wiener_hopf(claw, quad);
    for (auto& se : claw.stderrs[0]) se = 0.2;
    const auto b = solve_wiener_hopf(claw, quad);
    CHECK(a.kernel(0, 0) == b.kernel(0, 0));
    for (Eigen::Index m = 0; m < a.stderrs[0].size(); ++m) {
        CHECK(a.stderrs[0][m] > 0.0);
        CHECK(b.stderrs[0][m] == doctest::Approx(2.0 * a.stderrs[0][m]));
    }
    SolverOptions no_se;
    no_se.compute_stderr = false;
    CHECK(solve_wiener_hopf(claw, quad, no_se).kernel(0, 0) == a.kernel(0, 0));
}

TEST_CASE("singular systems are refused") {
    // g = -1 / x_max makes A = I - (1 / x_max) 1 w^T, with w summing to x_max
    const auto grid = build_linlog_grid({0.0, 0.01, 0.0, 1.0, 5, 20});
    Eigen::VectorXd lambda(1);
    lambda << 1.0;
    const auto claw = oracle::synthetic_law(grid, lambda, {{[](double) { return -2.0; }}});
    CHECK_THROWS_AS(solve_wiener_hopf(claw, build_quadrature({})), IllConditionedError);

    auto bad = claw;
    bad.lambda[0] = 0.0;
    CHECK_THROWS_AS(solve_wiener_hopf(bad, build_quadrature({})), InvalidArgument);
    QuadratureParams wide;
    wide.x_max = 2.0;
    CHECK_THROWS_AS(solve_wiener_hopf(claw, build_quadrature(wide)), InvalidArgument);
}

TEST_CASE("negative conditional laws propagate to negative kernels") {
    const auto grid = build_linlog_grid({0.0, 1e-3, 0.0, 1.0, 50, 200});
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 1.0;
    const auto claw = oracle::synthetic_law(
        grid, lambda,
        {{[](double t) { return 2.0 * std::exp(-10.0 * t); }, [](double t) { return -1.5 * std::exp(-8.0 * t); }},
         {[](double t) { return -1.0 * std::exp(-8.0 * t); }, [](double t) { return 2.0 * std::exp(-10.0 * t); }}});
    const auto rep = verify_negativity_propagation(claw, build_quadrature({}));
    CHECK(rep.hypothesis);
    CHECK(rep.negative_found);
    CHECK(rep.passed);
    CHECK(rep.value < 0.0);
    CHECK(rep.i != rep.j);

    const auto positive = oracle::synthetic_law(grid, lambda,
                                                {{[](double t) { return 2.0 * std::exp(-10.0 * t); }, zero_curve()},
                                                 {zero_curve(), [](double t) { return 2.0 * std::exp(-10.0 * t); }}});
    const auto none = verify_negativity_propagation(positive, build_quadrature({}));
    CHECK_FALSE(none.hypothesis);
    CHECK(none.passed);
}
