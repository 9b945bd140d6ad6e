#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nnpde/limit_system.hpp"

#include <cmath>
#include <cstdio>
#include <random>

using namespace nnpde;

TEST_CASE("point-mass kernel has the closed form alpha(xx'+1)") {
    const Grid1D g = uniform_grid(33);
    const double alpha = 1.7;
    const KernelMatrix K = estimate_kernel(g, InitDistribution::point_mass(1.0, 0.0, 0.0),
                                           Activation::Tanh, 100, alpha);
    for (int i = 0; i < K.size(); ++i) {
        for (int j = 0; j < K.size(); ++j) {
            const double expect = alpha * (g.nodes[i] * g.nodes[j] + 1.0);
            CHECK(K.values(i, j) == doctest::Approx(expect).epsilon(1e-13));
        }
    }
}

TEST_CASE("zero-amplitude point mass gives the zero kernel") {
    const Grid1D g = uniform_grid(17);
    const KernelMatrix K = estimate_kernel(g, InitDistribution::point_mass(0.0, 0.0, 0.0),
                                           Activation::Tanh, 10, 1.0);
    CHECK(K.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel is exactly symmetric and bounded") {
    const Grid1D g = uniform_grid(65);
    const KernelMatrix K =
        estimate_kernel(g, InitDistribution::iid(5), Activation::Tanh, 20000, 1.0);
    CHECK((K.values - K.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // with tanh and |c| <= 1: |B| <= alpha (1 + (|x||x'| + 1)) <= 3 alpha on [0,1]
    CHECK(K.values.cwiseAbs().maxCoeff() <= 3.0);
}

TEST_CASE("Monte-Carlo error shrinks like 1/sqrt(M)") {
    const Grid1D g = uniform_grid(33);
    // reference at 16x the largest test M so its own noise is negligible
    const KernelMatrix ref =
        estimate_kernel(g, InitDistribution::iid(1234), Activation::Tanh, 6400000, 1.0);
    auto mean_err = [&](int M, uint64_t seed0) {
        double acc = 0.0;
        for (uint64_t s = seed0; s < seed0 + 4; ++s) {
            const KernelMatrix k = estimate_kernel(g, InitDistribution::iid(s), Activation::Tanh,
                                                   M, 1.0);
            acc += (k.values - ref.values).cwiseAbs().maxCoeff();
        }
        return acc / 4.0;
    };
    const double err_a = mean_err(100000, 70);
    const double err_b = mean_err(400000, 80);
    std::printf("kernel MC error: M=1e5 %.3e, M=4e5 %.3e, ratio %.2f\n", err_a, err_b,
                err_a / err_b);
    CHECK(err_a / err_b > 1.4);
    CHECK(err_a / err_b < 2.9);
}

TEST_CASE("apply_kernel basics and positivity") {
    const Grid1D g = uniform_grid(65);
    const KernelMatrix K =
        estimate_kernel(g, InitDistribution::iid(3), Activation::Tanh, 20000, 1.0);

    const Field zero = apply_kernel(K, Field(g.n, 0.0));
    for (double v : zero) CHECK(v == 0.0);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Field u(g.n);
        for (double& v : u) v = dist(rng);
        const Field Tu = apply_kernel(K, u);
        CHECK(inner(u, Tu, g.quad_weights) >= -1e-12);
    }
}

TEST_CASE("apply_kernel on the rank-2 kernel matches the analytic integral") {
    const Grid1D g = uniform_grid(129);
    const double alpha = 2.0;
    const KernelMatrix K = estimate_kernel(g, InitDistribution::point_mass(1.0, 0.0, 0.0),
                                           Activation::Tanh, 1, alpha);
    const Field Tu = apply_kernel(K, Field(g.n, 1.0));
    for (int i = 0; i < g.n; ++i) {
        // int alpha (x x' + 1) dx' = alpha (x/2 + 1); trapezoid is exact here
        CHECK(Tu[i] == doctest::Approx(alpha * (0.5 * g.nodes[i] + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("spectrum: degenerate kernel has rank 2") {
    const Grid1D g = uniform_grid(65);
    const KernelMatrix K = estimate_kernel(g, InitDistribution::point_mass(1.0, 0.0, 0.0),
                                           Activation::Tanh, 1, 1.0);
    const SpectralDecomposition spec = spectrum(K);
    int above = 0;
    for (double lam : spec.eigenvalues) {
        if (lam > 1e-10) ++above;
    }
    CHECK(above == 2);
}

TEST_CASE("spectrum: PSD and bounded by C_sigma") {
    const Grid1D g = uniform_grid(65);
    const InitDistribution dist = InitDistribution::iid(9);
    const KernelMatrix K = estimate_kernel(g, dist, Activation::Tanh, 20000, 1.0);
    const SpectralDecomposition spec = spectrum(K);
    CHECK(spec.eigenvalues.back() >= -1e-8);

    const double c_sigma = c_sigma_bound(dist, Activation::Tanh, g, 20000);
    std::printf("lambda_max %.6f, C_sigma %.6f\n", spec.eigenvalues.front(), c_sigma);
    CHECK(spec.eigenvalues.front() <= K.alpha * c_sigma + 1e-6);

    // eigenvectors quadrature-orthonormal (spot check)
    CHECK(inner(spec.eigenvectors[0], spec.eigenvectors[0], g.quad_weights) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(inner(spec.eigenvectors[0], spec.eigenvectors[1], g.quad_weights)) < 1e-10);
}

TEST_CASE("c_sigma_bound closed forms") {
    const Grid1D g = uniform_grid(257);
    CHECK(c_sigma_bound(InitDistribution::point_mass(0.0, 0.0, 0.0), Activation::Tanh, g, 10) ==
          doctest::Approx(0.0).epsilon(1e-15));
    // sigma(0)=0, sigma'(0)=1: 0 + int x^2 + int 1 = 4/3
    CHECK(c_sigma_bound(InitDistribution::point_mass(1.0, 0.0, 0.0), Activation::Tanh, g, 10) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("c_sigma_bound stable across seeds") {
    const Grid1D g = uniform_grid(65);
    const double a = c_sigma_bound(InitDistribution::iid(100), Activation::Tanh, g, 100000);
    const double b = c_sigma_bound(InitDistribution::iid(200), Activation::Tanh, g, 100000);
    CHECK(std::abs(a - b) / a < 0.02);
}

TEST_CASE("integrate_limit: zero target stays at the zero fixed point") {
    LimitConfig cfg;
    cfg.grid_n = 65;
    cfg.mc_samples = 2000;
    cfg.steps = 20;
    cfg.j_floor = -1.0; // run all steps
    const Problem prob_template = Problem::build(cfg.as_train_config());
    Problem prob = prob_template;
    std::fill(prob.h.begin(), prob.h.end(), 0.0);
    const KernelMatrix K =
        estimate_kernel(prob.g1, InitDistribution::iid(cfg.seed), cfg.act, cfg.mc_samples, 1.0);
    const LimitTrajectory traj = integrate_limit(cfg, prob, K);
    for (double J : traj.J) CHECK(J == 0.0);
    for (const Field& gfield : traj.g) {
        for (double v : gfield) CHECK(v == 0.0);
    }
}

TEST_CASE("integrate_limit: objective decreases monotonically") {
    LimitConfig cfg;
    cfg.grid_n = 129;
    cfg.mc_samples = 20000;
    cfg.steps = 400;
    cfg.dt = 0.25;
    cfg.j_floor = 1e-9;
    const LimitTrajectory traj = integrate_limit(cfg);
    REQUIRE(traj.J.size() > 10);
    for (size_t i = 1; i < traj.J.size(); ++i) {
        CHECK(traj.J[i] <= traj.J[i - 1] * (1.0 + 1e-12));
    }
    CHECK(traj.J.back() < traj.J.front());
    std::printf("limit run: %zu steps, J %.3e -> %.3e\n", traj.J.size(), traj.J.front(),
                traj.J.back());
}

TEST_CASE("limit adjoint norm stays bounded") {
    LimitConfig cfg;
    cfg.grid_n = 129;
    cfg.mc_samples = 20000;
    cfg.steps = 300;
    cfg.dt = 0.25;
    cfg.j_floor = -1.0;
    const Problem prob = Problem::build(cfg.as_train_config());
    const KernelMatrix K =
        estimate_kernel(prob.g1, InitDistribution::iid(cfg.seed), cfg.act, cfg.mc_samples, 1.0);
    const LimitTrajectory traj = integrate_limit(cfg, prob, K);
    const size_t head = std::max<size_t>(1, traj.u_hat.size() / 10);
    double head_max = 0.0, tail_max = 0.0;
    for (size_t i = 0; i < traj.u_hat.size(); ++i) {
        const double nrm = l2_norm(traj.u_hat[i], prob.quad());
        if (i < head) head_max = std::max(head_max, nrm);
        tail_max = std::max(tail_max, nrm);
    }
    CHECK(tail_max <= 1.05 * head_max);
}

TEST_CASE("limit dissipation identity") {
    LimitConfig cfg;
    cfg.grid_n = 129;
    cfg.mc_samples = 20000;
    const Problem prob = Problem::build(cfg.as_train_config());
    const KernelMatrix K =
        estimate_kernel(prob.g1, InitDistribution::iid(cfg.seed), cfg.act, cfg.mc_samples, 1.0);
    // probe at a nonzero g: run a few Euler steps first
    LimitConfig warm = cfg;
    warm.steps = 10;
    warm.dt = 0.25;
    warm.j_floor = -1.0;
    const LimitTrajectory traj = integrate_limit(warm, prob, K);
    const Field& g_state = traj.g.back();

    const DissipationReport r1 = limit_dissipation_probe(prob, K, g_state, 1e-3);
    const DissipationReport r2 = limit_dissipation_probe(prob, K, g_state, 5e-4);
    std::printf("limit dissipation: rel %.3e (dt=1e-3), %.3e (dt=5e-4)\n", r1.rel_discrepancy,
                r2.rel_discrepancy);
    CHECK(r1.rel_discrepancy <= 0.05);
    CHECK(r2.rel_discrepancy <= 0.75 * r1.rel_discrepancy);
}

TEST_CASE("modal decay report") {
    LimitConfig cfg;
    cfg.grid_n = 129;
    cfg.mc_samples = 20000;
    cfg.steps = 2000;
    cfg.dt = 5.0;
    cfg.j_floor = -1.0;
    cfg.store_every = 5;
    const Problem prob = Problem::build(cfg.as_train_config());
    const KernelMatrix K =
        estimate_kernel(prob.g1, InitDistribution::iid(cfg.seed), cfg.act, cfg.mc_samples, 1.0);
    const SpectralDecomposition spec = spectrum(K);

    SUBCASE("zero target: all modal coefficients vanish") {
        Problem zero_prob = prob;
        std::fill(zero_prob.h.begin(), zero_prob.h.end(), 0.0);
        const LimitTrajectory traj = integrate_limit(cfg, zero_prob, K);
        const ModalDecayReport rep = modal_decay(traj, spec, prob.quad(), 5);
        for (const ModalDecayMode& m : rep.modes) {
            CHECK(m.energy == 0.0);
        }
    }

    SUBCASE("top modes decay with vanishing tails") {
        const LimitTrajectory traj = integrate_limit(cfg, prob, K);
        const ModalDecayReport rep = modal_decay(traj, spec, prob.quad(), 5);
        CHECK(rep.tails_vanish);
        CHECK(rep.ordering_consistent);
    }

    SUBCASE("near-zero eigenvalues are flagged, not failed") {
        const KernelMatrix K2 = estimate_kernel(prob.g1, InitDistribution::point_mass(1.0, 0.0, 0.0),
                                                Activation::Tanh, 1, 1.0);
        const SpectralDecomposition spec2 = spectrum(K2);
        LimitConfig cfg2 = cfg;
        cfg2.dt = 1.0; // the rank-2 kernel carries a larger top rate
        const LimitTrajectory traj = integrate_limit(cfg2, prob, K2);
        const ModalDecayReport rep = modal_decay(traj, spec2, prob.quad(), 5);
        int flagged = 0;
        for (const ModalDecayMode& m : rep.modes) {
            if (m.near_zero_eigenvalue) ++flagged;
        }
        CHECK(flagged == 3); // rank-2 kernel: modes 3..5 carry ~zero eigenvalues
    }
}
