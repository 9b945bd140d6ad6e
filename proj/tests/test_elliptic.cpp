#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nnpde/elliptic.hpp"
#include "nnpde/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace nnpde;

namespace {

Field random_interior_field(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(n, 0.0);
    for (int i = 1; i < n - 1; ++i) f[i] = u(rng);
    return f;
}

} // namespace

TEST_CASE("1D stencil row for n=3, mu=0.1") {
    const Grid1D g = uniform_grid(3);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    REQUIRE(op.matrix().rows() == 1);
    CHECK(op.matrix().coeff(0, 0) == doctest::Approx(1.8).epsilon(1e-15));
}

TEST_CASE("matrix is exactly symmetric") {
    const Grid1D g = uniform_grid(33);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    Eigen::MatrixXd A = Eigen::MatrixXd(op.matrix());
    CHECK((A - A.transpose()).norm() == 0.0);

    const Grid2D g2 = uniform_grid_2d(9, 9);
    const DiscreteOperator op2 = DiscreteOperator::assemble(g2, 0.1);
    Eigen::MatrixXd A2 = Eigen::MatrixXd(op2.matrix());
    CHECK((A2 - A2.transpose()).norm() == 0.0);
}

TEST_CASE("smallest eigenvalue approaches mu*pi^2 + 1") {
    const Grid1D g = uniform_grid(129);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(op.matrix()));
    const double lambda_min = eig.eigenvalues().minCoeff();
    CHECK(lambda_min >= 1.95);
    CHECK(lambda_min <= 1.99);
}

TEST_CASE("2D five-point diagonal") {
    const Grid2D g = uniform_grid_2d(5, 5);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    const double h2 = 0.25 * 0.25;
    CHECK(op.matrix().coeff(0, 0) == doctest::Approx(4.0 * 0.1 / h2 + 1.0));
}

TEST_CASE("solve: zero rhs gives zero") {
    const Grid1D g = uniform_grid(65);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    const Field u = op.solve(Field(g.n, 0.0));
    for (double v : u) CHECK(v == 0.0);
}

TEST_CASE("solve: sine eigenfunction closed form") {
    const Grid1D g = uniform_grid(1025);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    Field rhs(g.n);
    for (int i = 0; i < g.n; ++i) rhs[i] = std::sin(std::numbers::pi * g.nodes[i]);
    const Field u = op.solve(rhs);
    const double expected = 1.0 / (0.1 * std::numbers::pi * std::numbers::pi + 1.0);
    CHECK(std::abs(u[g.n / 2] - expected) < 1e-4);
    // boundary values stay pinned
    CHECK(u.front() == 0.0);
    CHECK(u.back() == 0.0);
}

TEST_CASE("solve: residual at direct-solver accuracy") {
    const Grid1D g = uniform_grid(257);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    const Field rhs = random_interior_field(g.n, 11);
    const Field u = op.solve(rhs);
    const Field Au = op.apply(u);
    double max_err = 0.0;
    for (int i : g.interior) max_err = std::max(max_err, std::abs(Au[i] - rhs[i]));
    CHECK(max_err <= 1e-10);
}

TEST_CASE("solve_adjoint equals solve bit for bit") {
    const Grid1D g = uniform_grid(129);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    const Field rhs = random_interior_field(g.n, 3);
    const Field a = op.solve(rhs);
    const Field b = op.solve_adjoint(rhs);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    const Field z = op.solve_adjoint(Field(g.n, 0.0));
    for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("adjoint identity under quadrature") {
    const Grid1D g = uniform_grid(201);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    for (uint64_t seed : {21u, 22u, 23u}) {
        const Field a = random_interior_field(g.n, seed);
        const Field b = random_interior_field(g.n, seed + 100);
        const double lhs = inner(op.solve(a), b, g.quad_weights);
        const double rhs = inner(a, op.solve_adjoint(b), g.quad_weights);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("coercivity in the quadrature inner product") {
    const Grid1D g = uniform_grid(129);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    for (uint64_t seed : {5u, 6u, 7u}) {
        const Field u = random_interior_field(g.n, seed);
        const Field Au = op.apply(u);
        const double quad_form = inner(u, Au, g.quad_weights);
        const double norm2 = inner(u, u, g.quad_weights);
        CHECK(quad_form >= 1.0 * norm2);
    }
}

TEST_CASE("second-order convergence against the sine solution") {
    const double mu = 0.1;
    const double denom = mu * std::numbers::pi * std::numbers::pi + 1.0;
    auto max_error = [&](int n) {
        const Grid1D g = uniform_grid(n);
        const DiscreteOperator op = DiscreteOperator::assemble(g, mu);
        Field rhs(g.n);
        for (int i = 0; i < g.n; ++i) rhs[i] = std::sin(std::numbers::pi * g.nodes[i]);
        const Field u = op.solve(rhs);
        double err = 0.0;
        for (int i = 0; i < g.n; ++i) {
            err = std::max(err,
                           std::abs(u[i] - std::sin(std::numbers::pi * g.nodes[i]) / denom));
        }
        return err;
    };
    const double e1 = max_error(65);
    const double e2 = max_error(129);
    const double e3 = max_error(257);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("2D solve: product sine eigenfunction") {
    const Grid2D g = uniform_grid_2d(65, 65);
    const DiscreteOperator op = DiscreteOperator::assemble(g, 0.1);
    Field rhs(g.size());
    for (int idx = 0; idx < g.size(); ++idx) {
        rhs[idx] = std::sin(std::numbers::pi * g.node_x(idx)) *
                   std::sin(std::numbers::pi * g.node_y(idx));
    }
    const Field u = op.solve(rhs);
    const double expected = 1.0 / (0.2 * std::numbers::pi * std::numbers::pi + 1.0);
    const int mid = g.index(32, 32);
    CHECK(std::abs(u[mid] - expected) < 2e-3);

    // discrete closed form: the product sine is an exact eigenvector of the stencil
    const double h = g.gx.spacing;
    const double lam_h = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
    const double discrete = 1.0 / (0.1 * 2.0 * lam_h + 1.0);
    CHECK(std::abs(u[mid] - discrete) < 1e-10);
}

TEST_CASE("invalid mu rejected") {
    const Grid1D g = uniform_grid(9);
    CHECK_THROWS_AS(DiscreteOperator::assemble(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteOperator::assemble(g, -1.0), std::invalid_argument);
}
