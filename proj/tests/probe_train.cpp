// scratch probe; removed before final commit
#include "nnpde/trainer.hpp"
#include <chrono>
#include <cstdio>
#include <cstdlib>

using namespace nnpde;

int main(int argc, char** argv) {
    TrainConfig cfg;
    cfg.grid_n = 257;
    cfg.n_hidden = argc > 1 ? std::atoi(argv[1]) : 250;
    cfg.dt = argc > 2 ? std::atof(argv[2]) : 1.0;
    cfg.steps = argc > 3 ? std::atoi(argv[3]) : 20000;
    cfg.seed = argc > 4 ? std::atoll(argv[4]) : 1;
    cfg.alpha = argc > 5 ? std::atof(argv[5]) : 1.0;
    cfg.j_floor = 1e-7;

    const auto t0 = std::chrono::steady_clock::now();
    const Problem prob = Problem::build(cfg);
    const TrainState s = train(cfg, prob);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("N=%d dt=%g alpha=%g seed=%llu: %zu rows, %.1f s, stop=%s\n", cfg.n_hidden,
                cfg.dt, cfg.alpha, (unsigned long long)cfg.seed, s.history.size(), secs,
                s.stop_reason.c_str());
    for (size_t i = 0; i < s.history.size(); i += std::max<size_t>(1, s.history.size() / 15)) {
        std::printf("  step %6d  J=%.4e  |grad|=%.3e  dt=%.3g\n", s.history[i].step,
                    s.history[i].J, s.history[i].grad_norm, s.history[i].dt);
    }
    std::printf("  final step %d J=%.6e dt=%.3g\n", s.history.back().step, s.history.back().J,
                s.history.back().dt);
    return 0;
}
