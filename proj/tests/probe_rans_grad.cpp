// scratch probe; removed before final commit
#include "nnpde/rans_channel.hpp"
#include <chrono>
#include <cstdio>
#include <random>

using namespace nnpde;
using namespace nnpde::rans;

int main() {
    RansConfig cfg;
    cfg.cfl = 0.35;
    cfg.dpdx_gain = 0.02;
    cfg.resid_floor = 1e-13;

    ClosureNet net = ClosureNet::create(4, 4, 7);
    // nudge the output layer off zero so dR/dtheta has full structure
    Eigen::VectorXd theta = net.flatten();
    std::mt19937_64 rng(123);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int i = theta.size() - (4 * 2 + 2); i < theta.size(); ++i) theta[i] = 0.002 * n01(rng);
    net.unflatten(theta);

    RansState s = turbulent_initial_state(cfg);
    relax(s, cfg, nullptr, cfg.max_steps);
    // standardization from the baseline state
    {
        std::array<double, 4> zmin{1e30, 1e30, 1e30, 1e30}, zmax{-1e30, -1e30, -1e30, -1e30};
        for (int i = 0; i < cfg.n_y; ++i) {
            const double S = (s.u[i + 1] - s.u[i]) / (s.grid.faces[i + 1] - s.grid.faces[i]);
            const std::array<double, 4> z = {s.grid.centers[i], s.k[i], s.eps[i], S};
            for (int j = 0; j < 4; ++j) {
                zmin[j] = std::min(zmin[j], z[j]);
                zmax[j] = std::max(zmax[j], z[j]);
            }
        }
        net.set_standardization(zmin, zmax);
    }
    relax(s, cfg, &net, cfg.max_steps);
    std::printf("converged with net: resid %.3e\n", s.resid_norm);

    const TargetProfile tgt = synth_target(cfg);
    const double J0 = rans_objective(s, tgt);
    std::printf("J at converged state: %.6e\n", J0);

    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd grad = rans_grad(s, cfg, net, tgt);
    std::printf("adjoint grad in %.3f s, |grad|=%.3e\n",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(),
                grad.norm());

    std::mt19937_64 pick(99);
    std::uniform_int_distribution<int> which(0, net.n_params() - 1);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const int p = which(pick);
        const double h = 1e-4 * std::max(1.0, std::abs(theta[p]));
        auto J_at = [&](double tp) {
            Eigen::VectorXd th = net.flatten();
            th[p] = tp;
            ClosureNet n2 = net;
            n2.unflatten(th);
            RansState s2 = s; // warm start from the converged state
            relax(s2, cfg, &n2, cfg.max_steps);
            return rans_objective(s2, tgt);
        };
        const double base = net.flatten()[p];
        const double fd = (J_at(base + h) - J_at(base - h)) / (2.0 * h);
        const double rel = std::abs(fd - grad[p]) / std::max(std::abs(fd), 1e-14);
        std::printf("param %3d: adjoint %.8e fd %.8e rel %.3e\n", p, grad[p], fd, rel);
        worst = std::max(worst, rel);
    }
    std::printf("worst rel: %.3e (target <= 1e-4)\n", worst);
    return 0;
}
