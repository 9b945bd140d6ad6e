// scratch probe; removed before final commit
#include "nnpde/limit_system.hpp"
#include <cstdio>

using namespace nnpde;

int main() {
    LimitConfig cfg;
    cfg.grid_n = 257;
    cfg.mc_samples = 100000;
    cfg.steps = 40000;
    cfg.dt = 0.25;
    cfg.j_floor = 1e-7;
    cfg.store_every = 50;

    const Problem prob = Problem::build(cfg.as_train_config());
    const KernelMatrix K =
        estimate_kernel(prob.g1, InitDistribution::iid(cfg.seed), cfg.act, cfg.mc_samples, 1.0);
    const SpectralDecomposition spec = spectrum(K);
    std::printf("lambda: ");
    for (int k = 0; k < 12; ++k) std::printf("%.3e ", spec.eigenvalues[k]);
    std::printf("\n");

    const LimitTrajectory traj = integrate_limit(cfg, prob, K);
    std::printf("steps run: %zu, reached_floor=%d\n", traj.J.size(), (int)traj.reached_floor);
    for (size_t i = 0; i < traj.J.size(); i += traj.J.size() / 20 + 1) {
        std::printf("t=%8.1f  J=%.6e\n", traj.times[i], traj.J[i]);
    }
    std::printf("final t=%.1f J=%.6e\n", traj.times.back(), traj.J.back());

    const ModalDecayReport rep = modal_decay(traj, spec, prob.quad(), 8);
    for (const auto& m : rep.modes) {
        std::printf("mode %d: lambda=%.3e energy=%.3e t_half=%.1f tail_ratio=%.3e near_zero=%d\n",
                    m.index, m.lambda, m.energy, m.half_energy_time, m.tail_ratio,
                    (int)m.near_zero_eigenvalue);
    }
    return 0;
}
