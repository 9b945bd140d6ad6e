// scratch probe; removed before final commit
#include "nnpde/rans_channel.hpp"
#include <cstdio>
#include <cstdlib>

using namespace nnpde;
using namespace nnpde::rans;

int main(int argc, char** argv) {
    RansTrainOptions opt;
    opt.iterations = argc > 1 ? std::atoi(argv[1]) : 60;
    opt.lr0 = argc > 2 ? std::atof(argv[2]) : 0.5;
    opt.lr_decay_every = argc > 3 ? std::atoi(argv[3]) : 40;
    const int width = argc > 4 ? std::atoi(argv[4]) : 16;

    std::vector<RansConfig> cfgs;
    std::vector<TargetProfile> tgts;
    for (double re : {6001.0, 12000.0, 18000.0}) {
        RansConfig c;
        c.Re = re;
        c.cfl = 0.35;
        c.dpdx_gain = 0.02;
        c.resid_floor = 1e-10;
        cfgs.push_back(c);
        tgts.push_back(synth_target(c));
    }
    ClosureNet net = ClosureNet::create(width, width, 42);
    const RansTrainResult res = train_rans(cfgs, tgts, std::move(net), opt);
    std::printf("baseline J=%.6e best J=%.6e (iter %d) ratio=%.4f stopped_early=%d\n",
                res.baseline_J, res.best_J, res.best_iteration, res.best_J / res.baseline_J,
                res.stopped_early);
    for (size_t i = 0; i < res.J_history.size(); i += std::max<size_t>(1, res.J_history.size() / 20)) {
        std::printf("  it %3zu J=%.6e\n", i, res.J_history[i]);
    }

    // out of sample
    for (double re : {9000.0, 24000.0}) {
        RansConfig c;
        c.Re = re;
        c.cfl = 0.35;
        c.dpdx_gain = 0.02;
        c.resid_floor = 1e-10;
        const TargetProfile t = synth_target(c);
        RansState sb = turbulent_initial_state(c);
        relax(sb, c, nullptr, c.max_steps);
        RansState sn = turbulent_initial_state(c);
        relax(sn, c, &res.net, c.max_steps);
        std::printf("Re=%g: baseline J=%.6e trained J=%.6e\n", re, rans_objective(sb, t),
                    rans_objective(sn, t));
    }
    return 0;
}
