// scratch probe; removed before final commit
#include "nnpde/rans_channel.hpp"
#include <cstdio>
#include <cstdlib>

using namespace nnpde::rans;

int main(int argc, char** argv) {
    RansConfig cfg;
    if (argc > 1) cfg.Re = std::atof(argv[1]);
    if (argc > 2) cfg.cfl = std::atof(argv[2]);
    const int steps = argc > 3 ? std::atoi(argv[3]) : 2000;
    const int print_every = argc > 4 ? std::atoi(argv[4]) : 100;
    if (argc > 5) cfg.dpdx_gain = std::atof(argv[5]);
    if (argc > 6) cfg.eps_pin_cells = std::atoi(argv[6]);
    if (argc > 7) cfg.wall = std::atoi(argv[7]) != 0 ? WallTreatment::Chien : WallTreatment::PinnedEps;

    RansState s = turbulent_initial_state(cfg);
    for (int step = 0; step < steps; ++step) {
        try {
            relax(s, cfg, nullptr, 1);
        } catch (const std::exception& e) {
            std::printf("abort at step %d: %s\n", step, e.what());
            break;
        }
        if (step % print_every == 0 || s.resid_norm > 1e3) {
            const Eigen::VectorXd R = rans_residual(s, cfg, nullptr);
            int arg = 0;
            R.cwiseAbs().maxCoeff(&arg);
            double kmax = 0, emax = 0, umax = 0;
            for (double v : s.k) kmax = std::max(kmax, v);
            for (double v : s.eps) emax = std::max(emax, v);
            for (double v : s.u) umax = std::max(umax, v);
            std::printf(
                "step %6d resid %.3e argmax %d (n_u=%d n_k=%d) kmax %.3e emax %.3e umax %.3e "
                "Ub %.4f dpdx %.3e\n",
                step, R.cwiseAbs().maxCoeff(), arg, cfg.n_y - 1, cfg.n_y, kmax, emax, umax,
                bulk_velocity(s), s.dpdx);
            if (s.resid_norm > 1e3) break;
        }
        if (s.resid_norm <= cfg.resid_floor) {
            std::printf("converged at step %d\n", step);
            const Diagnostics d = diagnostics(s, cfg);
            std::printf("C_f=%.5e Re_tau=%.2f\n", d.C_f, d.Re_tau);
            break;
        }
    }
    return 0;
}
