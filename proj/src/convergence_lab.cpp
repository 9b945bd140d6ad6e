#include "nnpde/convergence_lab.hpp"
#include "nnpde/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

namespace nnpde {

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SweepEntry run_entry(const TrainConfig& base, const Problem& problem, int N, uint64_t seed) {
    SweepEntry e;
    e.n_hidden = N;
    e.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        TrainConfig cfg = base;
        cfg.n_hidden = N;
        cfg.seed = seed;
        const TrainState s = train(cfg, problem);
        e.final_J = s.history.back().J;
        e.steps_run = s.history.back().step;
        const size_t tail = std::min<size_t>(32, s.history.size());
        for (size_t i = s.history.size() - tail; i < s.history.size(); ++i) {
            e.J_tail.push_back(s.history[i].J);
        }
    } catch (const std::exception& ex) {
        e.failed = true;
        e.error = ex.what();
    }
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return e;
}

} // namespace

SweepResult sweep_N(const TrainConfig& base, const std::vector<int>& Ns,
                    const std::vector<uint64_t>& seeds, int jobs) {
    if (Ns.empty() || seeds.empty()) {
        throw std::invalid_argument("sweep_N: Ns and seeds must be non-empty");
    }
    const Problem problem = Problem::build(base);

    struct Task {
        int N;
        uint64_t seed;
    };
    std::vector<Task> tasks;
    for (int N : Ns) {
        for (uint64_t s : seeds) tasks.push_back({N, s});
    }

    SweepResult result;
    result.entries.resize(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            result.entries[i] = run_entry(base, problem, tasks[i].N, tasks[i].seed);
        }
    };
    const int nw = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nw);
        for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (int N : Ns) {
        std::vector<double> finals;
        for (const SweepEntry& e : result.entries) {
            if (e.n_hidden == N && !e.failed) finals.push_back(e.final_J);
        }
        if (!finals.empty()) {
            result.median_final.emplace_back(N, median(std::move(finals)));
        }
    }
    return result;
}

void save_sweep_csv(const std::string& path, const SweepResult& sweep) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_sweep_csv: cannot open " + path);
    out << "N,objective\n";
    char buf[64];
    for (const auto& [N, J] : sweep.median_final) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g\n", N, J);
        out << buf;
    }
}

void save_sweep_runs_csv(const std::string& path, const SweepResult& sweep) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_sweep_runs_csv: cannot open " + path);
    out << "N,seed,objective,steps,seconds,failed\n";
    char buf[160];
    for (const SweepEntry& e : sweep.entries) {
        std::snprintf(buf, sizeof(buf), "%d,%llu,%.17g,%d,%.3f,%d\n", e.n_hidden,
                      static_cast<unsigned long long>(e.seed), e.final_J, e.steps_run, e.seconds,
                      e.failed ? 1 : 0);
        out << buf;
    }
}

ComparisonMetrics compare_prelimit_limit(const TrainConfig& config, const Problem& problem,
                                         const LimitTrajectory& limit,
                                         const ParamSet* init_override) {
    if (std::abs(limit.dt - config.dt) > 1e-12 * std::max(1.0, std::abs(config.dt))) {
        throw std::invalid_argument("compare_prelimit_limit: time-mesh mismatch (dt differs)");
    }
    const size_t snaps = limit.g.size();
    if (snaps < 2 || limit.field_times.size() != snaps) {
        throw std::invalid_argument("compare_prelimit_limit: limit trajectory lacks snapshots");
    }
    // snapshots must be stored every step for a shared time mesh
    if (std::abs((limit.field_times[1] - limit.field_times[0]) - limit.dt) > 1e-12) {
        throw std::invalid_argument("compare_prelimit_limit: limit must store every step");
    }
    const int steps = std::min<int>(config.steps, static_cast<int>(snaps) - 1);

    ComparisonMetrics m;
    TrainState state = init_train(config, problem);
    if (init_override != nullptr) {
        state.params = *init_override;
        state.g = problem.net_forward(state.params);
        state.u = problem.op.solve(state.g);
        state.J = objective(state.u, problem.h, problem.basis, config.mode);
        state.u_hat = problem.op.solve_adjoint(
            adjoint_rhs(state.u, problem.h, problem.basis, config.mode));
    }
    m.init_gap_l2 = l2_norm(state.g, problem.quad());

    const int n = problem.field_size();
    Field diff(n);
    auto record = [&](int k) {
        for (int i = 0; i < n; ++i) diff[i] = state.u[i] - limit.u[k][i];
        const double eu = problem.h1_norm_of(diff);
        for (int i = 0; i < n; ++i) diff[i] = state.u_hat[i] - limit.u_hat[k][i];
        const double euh = problem.h1_norm_of(diff);
        for (int i = 0; i < n; ++i) diff[i] = state.g[i] - limit.g[k][i];
        const double eg = l2_norm(diff, problem.quad());
        m.times.push_back(limit.field_times[k]);
        m.err_u_h1.push_back(eu);
        m.err_uhat_h1.push_back(euh);
        m.err_g_l2.push_back(eg);
        m.q_n.push_back(std::sqrt(2.0 * state.J));
        m.max_err_u_h1 = std::max(m.max_err_u_h1, eu);
        m.max_err_uhat_h1 = std::max(m.max_err_uhat_h1, euh);
        m.max_err_g_l2 = std::max(m.max_err_g_l2, eg);
    };

    record(0);
    for (int k = 1; k <= steps; ++k) {
        train_step(state, config, problem);
        record(k);
    }
    return m;
}

void save_compare_csv(const std::string& path, const ComparisonMetrics& metrics) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_compare_csv: cannot open " + path);
    out << "t,err_u_H1,err_uhat_H1,err_g_L2,Q_N\n";
    char buf[200];
    for (size_t i = 0; i < metrics.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10e,%.10e,%.10e,%.10e\n", metrics.times[i],
                      metrics.err_u_h1[i], metrics.err_uhat_h1[i], metrics.err_g_l2[i],
                      metrics.q_n[i]);
        out << buf;
    }
}

InitGapScaling initial_output_scaling(const TrainConfig& base, const Problem& problem,
                                      const std::vector<int>& Ns, int n_seeds) {
    InitGapScaling scaling;
    scaling.Ns = Ns;
    for (int N : Ns) {
        double acc = 0.0;
        for (int s = 0; s < n_seeds; ++s) {
            const ParamSet p = init(N, base.dim, base.beta, base.act,
                                    InitDistribution::iid(base.seed + 1000 + s));
            const Field g = problem.net_forward(p);
            const double nrm = l2_norm(g, problem.quad());
            acc += nrm * nrm;
        }
        scaling.rms_norm.push_back(std::sqrt(acc / n_seeds));
    }
    // least-squares slope of log|g0| against log N
    const size_t n = Ns.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::log(static_cast<double>(Ns[i]));
        const double y = std::log(scaling.rms_norm[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    scaling.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return scaling;
}

std::vector<TestFunction> standard_test_functions() {
    return {
        [](double c, const double* w, int, double eta) { return std::tanh(c + w[0] + eta); },
        [](double c, const double* w, int, double) { return std::sin(c) * std::cos(w[0]); },
        [](double c, const double* w, int d, double eta) {
            double w2 = 0.0;
            for (int j = 0; j < d; ++j) w2 += w[j] * w[j];
            return 1.0 / (1.0 + c * c + w2 + eta * eta);
        },
        [](double c, const double* w, int d, double eta) {
            double w2 = 0.0;
            for (int j = 0; j < d; ++j) w2 += w[j] * w[j];
            return std::exp(-(c * c + w2 + eta * eta));
        },
        [](double c, const double* w, int, double eta) { return std::tanh(c * w[0] - eta); },
    };
}

std::vector<double> measure_drift(const TrainConfig& config, const Problem& problem) {
    const std::vector<TestFunction> fs = standard_test_functions();
    const ParamSet p0 = init(config.n_hidden, config.dim, config.beta, config.act,
                             InitDistribution::iid(config.seed));
    const TrainState s = train(config, problem);
    std::vector<double> drift;
    drift.reserve(fs.size());
    for (const TestFunction& f : fs) {
        drift.push_back(std::abs(measure_pair(s.params, f) - measure_pair(p0, f)));
    }
    return drift;
}

FloorReport global_floor_test(const TrainConfig& base, double epsilon,
                              const std::vector<int>& Ns, const std::vector<uint64_t>& seeds,
                              int jobs) {
    if (epsilon < 0.0) {
        throw std::invalid_argument("global_floor_test: epsilon must be non-negative");
    }
    FloorReport report;
    report.epsilon = epsilon;
    report.closest = std::numeric_limits<double>::infinity();

    std::vector<int> sorted_Ns = Ns;
    std::sort(sorted_Ns.begin(), sorted_Ns.end());
    const Problem problem = Problem::build(base);

    for (int N : sorted_Ns) {
        // seed-averaged history; early-stopped runs hold their final value
        std::vector<std::vector<double>> histories(seeds.size());
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= seeds.size()) return;
                TrainConfig cfg = base;
                cfg.n_hidden = N;
                cfg.seed = seeds[i];
                const TrainState s = train(cfg, problem);
                histories[i].reserve(s.history.size());
                for (const HistoryRow& r : s.history) histories[i].push_back(r.J);
            }
        };
        const int nw = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
        if (nw == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
            for (std::thread& t : pool) t.join();
        }

        size_t len = 0;
        for (const auto& h : histories) len = std::max(len, h.size());
        std::vector<double> mean(len, 0.0);
        for (const auto& h : histories) {
            for (size_t k = 0; k < len; ++k) {
                mean[k] += (k < h.size() ? h[k] : h.back()) / seeds.size();
            }
        }
        // suffix maximum: sup over t >= tau of the averaged objective
        std::vector<double> suffix(len);
        double running = 0.0;
        for (size_t k = len; k-- > 0;) {
            running = std::max(running, mean[k]);
            suffix[k] = running;
        }
        report.closest = std::min(report.closest, suffix.back());
        for (size_t k = 0; k < len; ++k) {
            if (suffix[k] <= epsilon) {
                report.achieved = true;
                report.N0 = N;
                report.tau_step = static_cast<int>(k);
                return report;
            }
        }
    }
    return report;
}

} // namespace nnpde
