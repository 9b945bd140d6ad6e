#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nnpde/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

using namespace nnpde;

TEST_CASE("zero target with zero weights is a fixed point") {
    TrainConfig cfg;
    cfg.grid_n = 65;
    cfg.n_hidden = 10;
    cfg.steps = 5;
    Problem prob = Problem::build(cfg);
    std::fill(prob.h.begin(), prob.h.end(), 0.0);

    TrainState s = init_train(cfg, prob);
    std::fill(s.params.c.begin(), s.params.c.end(), 0.0);
    s.g = prob.net_forward(s.params);
    s.u = prob.op.solve(s.g);
    s.J = objective(s.u, prob.h, prob.basis, cfg.mode);
    s.u_hat = prob.op.solve_adjoint(adjoint_rhs(s.u, prob.h, prob.basis, cfg.mode));
    CHECK(s.J == 0.0);

    const ParamSet before = s.params;
    train_step(s, cfg, prob);
    CHECK(s.params.c == before.c);
    CHECK(s.params.w == before.w);
    CHECK(s.params.eta == before.eta);
    CHECK(s.J == 0.0);
}

TEST_CASE("one Euler step decreases J for small dt") {
    TrainConfig cfg;
    cfg.grid_n = 129;
    cfg.n_hidden = 10;
    cfg.seed = 4;
    cfg.dt = 1e-3;
    const Problem prob = Problem::build(cfg);
    TrainState s = init_train(cfg, prob);
    const double J0 = s.J;
    train_step(s, cfg, prob);
    CHECK(s.J < J0);
}

TEST_CASE("recorded history is non-increasing under the watchdog") {
    TrainConfig cfg;
    cfg.grid_n = 129;
    cfg.n_hidden = 20;
    cfg.seed = 10;
    cfg.dt = 4.0; // deliberately too large; the watchdog must tame it
    cfg.steps = 200;
    const TrainState s = train(cfg);
    REQUIRE(s.history.size() > 1);
    for (size_t i = 1; i < s.history.size(); ++i) {
        CHECK(s.history[i].J <= s.history[i - 1].J * (1.0 + cfg.monotonicity_tol));
    }
    CHECK(s.history.back().J < s.history.front().J);
}

TEST_CASE("training is deterministic given config and seed") {
    TrainConfig cfg;
    cfg.grid_n = 65;
    cfg.n_hidden = 15;
    cfg.seed = 99;
    cfg.steps = 50;
    const TrainState a = train(cfg);
    const TrainState b = train(cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].J == b.history[i].J);
        CHECK(a.history[i].grad_norm == b.history[i].grad_norm);
    }
}

TEST_CASE("larger networks reach lower objectives") {
    TrainConfig cfg;
    cfg.grid_n = 129;
    cfg.steps = 400;
    auto median_final = [&](int N) {
        std::vector<double> finals;
        for (uint64_t seed : {1u, 2u, 3u}) {
            TrainConfig c = cfg;
            c.n_hidden = N;
            c.seed = seed;
            finals.push_back(train(c).history.back().J);
        }
        std::sort(finals.begin(), finals.end());
        return finals[1];
    };
    const double j_small = median_final(5);
    const double j_large = median_final(100);
    std::printf("median final J: N=5 %.3e, N=100 %.3e\n", j_small, j_large);
    CHECK(j_large < j_small);
}

TEST_CASE("dissipation identity at a zero state") {
    TrainConfig cfg;
    cfg.grid_n = 65;
    cfg.n_hidden = 10;
    Problem prob = Problem::build(cfg);
    std::fill(prob.h.begin(), prob.h.end(), 0.0);
    ParamSet p = init(cfg.n_hidden, 1, cfg.beta, cfg.act, InitDistribution::iid(0));
    std::fill(p.c.begin(), p.c.end(), 0.0);
    const DissipationReport rep = dissipation_probe(prob, cfg, p, 1e-2);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.rhs == 0.0);
}

TEST_CASE("dissipation discrepancy small and shrinking with dt") {
    TrainConfig cfg;
    cfg.grid_n = 257;
    cfg.n_hidden = 10;
    cfg.seed = 21;
    const Problem prob = Problem::build(cfg);
    const ParamSet p = init(cfg.n_hidden, 1, cfg.beta, cfg.act, InitDistribution::iid(cfg.seed));

    // pick dt so the per-step relative change in J stays below 1e-3
    double dt = 1e-2;
    for (;;) {
        TrainState probe;
        probe.params = p;
        const DissipationReport r = dissipation_probe(prob, cfg, p, dt);
        const Field u = prob.op.solve(prob.net_forward(p));
        const double J = objective(u, prob.h, prob.basis, ObjectiveMode::Weak);
        if (std::abs(r.lhs) * dt / J <= 1e-3) break;
        dt *= 0.5;
        REQUIRE(dt > 1e-12);
    }
    const DissipationReport r1 = dissipation_probe(prob, cfg, p, dt);
    const DissipationReport r2 = dissipation_probe(prob, cfg, p, dt / 2.0);
    std::printf("dissipation: dt=%.2e rel=%.3e, dt/2 rel=%.3e\n", dt, r1.rel_discrepancy,
                r2.rel_discrepancy);
    CHECK(r1.rel_discrepancy <= 0.05);
    // first-order integrator: discrepancy shrinks roughly linearly in dt
    CHECK(r2.rel_discrepancy <= 0.75 * r1.rel_discrepancy);
}

TEST_CASE("history CSV has the documented header") {
    TrainConfig cfg;
    cfg.grid_n = 65;
    cfg.n_hidden = 5;
    cfg.steps = 3;
    const TrainState s = train(cfg);
    const std::string path = "history_test.csv";
    save_history_csv(path, s.history);
    FILE* f = std::fopen(path.c_str(), "r");
    REQUIRE(f != nullptr);
    char line[256];
    REQUIRE(std::fgets(line, sizeof(line), f) != nullptr);
    CHECK(std::string(line) == "step,J,grad_norm,dt,seconds\n");
    std::fclose(f);
    std::remove(path.c_str());
}
