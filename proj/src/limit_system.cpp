#include "nnpde/limit_system.hpp"
#include "nnpde/errors.hpp"
#include "nnpde/objective.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace nnpde {

namespace {

constexpr int kSampleBlock = 1024;

struct KernelSamples {
    std::vector<double> c;   // M
    std::vector<double> w;   // M*d
    std::vector<double> eta; // M
};

KernelSamples draw_samples(const InitDistribution& dist, int dim, int M) {
    KernelSamples s;
    s.c.resize(M);
    s.w.resize(static_cast<size_t>(M) * dim);
    s.eta.resize(M);
    if (dist.kind == InitDistribution::Kind::PointMass) {
        std::fill(s.c.begin(), s.c.end(), dist.c_atom);
        std::fill(s.w.begin(), s.w.end(), dist.w_atom);
        std::fill(s.eta.begin(), s.eta.end(), dist.eta_atom);
        return s;
    }
    std::mt19937_64 rng(dist.seed);
    std::uniform_real_distribution<double> c_law(-dist.c_halfwidth, dist.c_halfwidth);
    std::normal_distribution<double> w_law(0.0, dist.w_stddev);
    std::normal_distribution<double> eta_law(0.0, dist.eta_stddev);
    for (int m = 0; m < M; ++m) {
        s.c[m] = c_law(rng);
        for (int j = 0; j < dim; ++j) {
            s.w[static_cast<size_t>(m) * dim + j] = w_law(rng);
        }
        s.eta[m] = eta_law(rng);
    }
    return s;
}

KernelMatrix estimate_kernel_impl(Eigen::MatrixXd coords, std::vector<double> quad,
                                  const InitDistribution& dist, Activation act, int M,
                                  double alpha) {
    if (M < 1) {
        throw std::invalid_argument("estimate_kernel: need mc_samples >= 1");
    }
    const int n = static_cast<int>(coords.rows());
    const int d = static_cast<int>(coords.cols());
    const KernelSamples samples = draw_samples(dist, d, M);

    // B = alpha/M [ sum_m s_m s_m^T + (sum_m d_m d_m^T) .* (X X^T + 1) ]
    // with s_m = sigma(w_m.x + eta_m) and d_m = c_m sigma'(w_m.x + eta_m);
    // the (x.x' + 1) factor comes out of the sample sum elementwise.
    Eigen::MatrixXd G_act = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd G_der = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd block(n, kSampleBlock);
    Eigen::MatrixXd dblock(n, kSampleBlock);
    for (int b0 = 0; b0 < M; b0 += kSampleBlock) {
        const int nb = std::min(kSampleBlock, M - b0);
        for (int m = 0; m < nb; ++m) {
            const double* wm = &samples.w[static_cast<size_t>(b0 + m) * d];
            const double cm = samples.c[b0 + m];
            const double em = samples.eta[b0 + m];
            for (int i = 0; i < n; ++i) {
                double pre = em;
                for (int j = 0; j < d; ++j) pre += wm[j] * coords(i, j);
                block(i, m) = activate(act, pre);
                dblock(i, m) = cm * activate_deriv(act, pre);
            }
        }
        G_act.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(nb), 1.0);
        G_der.selfadjointView<Eigen::Lower>().rankUpdate(dblock.leftCols(nb), 1.0);
    }

    KernelMatrix kernel;
    kernel.values.resize(n, n);
    const double scale = alpha / M;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k <= i; ++k) {
            double dot = 1.0;
            for (int j = 0; j < d; ++j) dot += coords(i, j) * coords(k, j);
            const double v = scale * (G_act(i, k) + G_der(i, k) * dot);
            kernel.values(i, k) = v;
            kernel.values(k, i) = v; // mirror: exact symmetry
        }
    }
    kernel.coords = std::move(coords);
    kernel.quad = std::move(quad);
    kernel.mc_samples = M;
    kernel.seed = dist.seed;
    kernel.alpha = alpha;
    return kernel;
}

Eigen::MatrixXd grid_coords(const Grid1D& g) {
    Eigen::MatrixXd X(g.n, 1);
    for (int i = 0; i < g.n; ++i) X(i, 0) = g.nodes[i];
    return X;
}

Eigen::MatrixXd grid_coords(const Grid2D& g) {
    Eigen::MatrixXd X(g.size(), 2);
    for (int i = 0; i < g.size(); ++i) {
        X(i, 0) = g.node_x(i);
        X(i, 1) = g.node_y(i);
    }
    return X;
}

} // namespace

KernelMatrix estimate_kernel(const Grid1D& grid, const InitDistribution& dist, Activation act,
                             int mc_samples, double alpha) {
    return estimate_kernel_impl(grid_coords(grid), grid.quad_weights, dist, act, mc_samples,
                                alpha);
}

KernelMatrix estimate_kernel(const Grid2D& grid, const InitDistribution& dist, Activation act,
                             int mc_samples, double alpha) {
    return estimate_kernel_impl(grid_coords(grid), grid.quad_weights, dist, act, mc_samples,
                                alpha);
}

Field apply_kernel(const KernelMatrix& kernel, const Field& u) {
    const int n = kernel.size();
    if (u.size() != static_cast<size_t>(n)) {
        throw std::invalid_argument("apply_kernel: field size mismatch");
    }
    Eigen::VectorXd wu(n);
    for (int i = 0; i < n; ++i) wu[i] = kernel.quad[i] * u[i];
    Eigen::VectorXd out = kernel.values * wu;
    return Field(out.data(), out.data() + n);
}

SpectralDecomposition spectrum(const KernelMatrix& kernel) {
    const int n = kernel.size();
    Eigen::VectorXd sqw(n);
    for (int i = 0; i < n; ++i) sqw[i] = std::sqrt(kernel.quad[i]);
    Eigen::MatrixXd C = kernel.values;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            C(i, j) *= sqw[i] * sqw[j];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success) {
        throw NumericError("spectrum: eigensolver failed");
    }
    SpectralDecomposition spec;
    spec.eigenvalues.resize(n);
    spec.eigenvectors.resize(n);
    // Eigen returns ascending order; flip to descending
    for (int k = 0; k < n; ++k) {
        const int src = n - 1 - k;
        spec.eigenvalues[k] = eig.eigenvalues()[src];
        Field e(n);
        for (int i = 0; i < n; ++i) {
            e[i] = eig.eigenvectors()(i, src) / sqw[i];
        }
        spec.eigenvectors[k] = std::move(e);
    }
    return spec;
}

void save_spectrum_csv(const std::string& path, const SpectralDecomposition& spec) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("save_spectrum_csv: cannot open " + path);
    }
    out << "k,lambda\n";
    char buf[64];
    for (size_t k = 0; k < spec.eigenvalues.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", k, spec.eigenvalues[k]);
        out << buf;
    }
}

double c_sigma_bound(const InitDistribution& dist, Activation act, const Grid1D& grid,
                     int mc_samples) {
    if (mc_samples < 1) {
        throw std::invalid_argument("c_sigma_bound: need mc_samples >= 1");
    }
    const KernelSamples samples = draw_samples(dist, 1, mc_samples);
    double total = 0.0;
    for (int m = 0; m < mc_samples; ++m) {
        const double wm = samples.w[m];
        const double cm = samples.c[m];
        const double em = samples.eta[m];
        double acc = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            const double x = grid.nodes[i];
            const double s = activate(act, wm * x + em);
            const double sp = activate_deriv(act, wm * x + em);
            acc += grid.quad_weights[i] *
                   (s * s + cm * cm * sp * sp * x * x + cm * cm * sp * sp);
        }
        total += acc;
    }
    return total / mc_samples;
}

TrainConfig LimitConfig::as_train_config() const {
    TrainConfig tc;
    tc.dim = 1;
    tc.grid_n = grid_n;
    tc.mu = mu;
    tc.moments = moments;
    tc.mode = ObjectiveMode::Weak;
    tc.act = act;
    tc.alpha = alpha;
    tc.dt = dt;
    tc.steps = steps;
    tc.seed = seed;
    tc.j_floor = j_floor;
    tc.target_csv = target_csv;
    return tc;
}

LimitTrajectory integrate_limit(const LimitConfig& config) {
    const Problem problem = Problem::build(config.as_train_config());
    const KernelMatrix kernel =
        estimate_kernel(problem.g1, InitDistribution::iid(config.seed), config.act,
                        config.mc_samples, config.alpha);
    return integrate_limit(config, problem, kernel);
}

namespace {

struct LimitEval {
    Field u;
    Field u_hat;
    double J = 0.0;
};

LimitEval eval_limit(const Problem& problem, const Field& g) {
    LimitEval e;
    e.u = problem.op.solve(g);
    e.J = objective(e.u, problem.h, problem.basis, ObjectiveMode::Weak);
    if (!std::isfinite(e.J)) {
        throw NumericError("integrate_limit: non-finite objective");
    }
    e.u_hat = problem.op.solve_adjoint(
        adjoint_rhs(e.u, problem.h, problem.basis, ObjectiveMode::Weak));
    return e;
}

} // namespace

LimitTrajectory integrate_limit(const LimitConfig& config, const Problem& problem,
                                const KernelMatrix& kernel) {
    LimitTrajectory traj;
    traj.dt = config.dt;
    const int n = problem.field_size();
    Field g(n, 0.0); // g_0 = 0: the limit output starts from the zero function

    for (int step = 0; step <= config.steps; ++step) {
        const double t = step * config.dt;
        LimitEval e = eval_limit(problem, g);
        traj.times.push_back(t);
        traj.J.push_back(e.J);
        if (step % config.store_every == 0) {
            traj.field_times.push_back(t);
            traj.u.push_back(e.u);
            traj.u_hat.push_back(e.u_hat);
            traj.g.push_back(g);
        }
        if (e.J <= config.j_floor) {
            traj.reached_floor = true;
            break;
        }
        if (step == config.steps) break;

        if (config.integrator == LimitIntegrator::Euler) {
            const Field Tu = apply_kernel(kernel, e.u_hat);
            for (int i = 0; i < n; ++i) g[i] -= config.dt * Tu[i];
        } else {
            // RK4 on dg/dt = -T_B uhat(g)
            auto F = [&](const Field& gg) {
                const LimitEval ee = eval_limit(problem, gg);
                Field f = apply_kernel(kernel, ee.u_hat);
                for (double& v : f) v = -v;
                return f;
            };
            Field k1 = apply_kernel(kernel, e.u_hat);
            for (double& v : k1) v = -v;
            Field g2(n), g3(n), g4(n);
            for (int i = 0; i < n; ++i) g2[i] = g[i] + 0.5 * config.dt * k1[i];
            const Field k2 = F(g2);
            for (int i = 0; i < n; ++i) g3[i] = g[i] + 0.5 * config.dt * k2[i];
            const Field k3 = F(g3);
            for (int i = 0; i < n; ++i) g4[i] = g[i] + config.dt * k3[i];
            const Field k4 = F(g4);
            for (int i = 0; i < n; ++i) {
                g[i] += config.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    return traj;
}

DissipationReport limit_dissipation_probe(const Problem& problem, const KernelMatrix& kernel,
                                          const Field& g, double dt) {
    const LimitEval e = eval_limit(problem, g);
    const Field Tu = apply_kernel(kernel, e.u_hat);
    Field g_next = g;
    for (size_t i = 0; i < g.size(); ++i) g_next[i] -= dt * Tu[i];
    const LimitEval e_next = eval_limit(problem, g_next);

    DissipationReport rep;
    rep.lhs = (e_next.J - e.J) / dt;
    rep.rhs = -inner(e.u_hat, Tu, kernel.quad);
    rep.rel_discrepancy = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.rhs), 1e-300);
    return rep;
}

ModalDecayReport modal_decay(const LimitTrajectory& traj, const SpectralDecomposition& spec,
                             const std::vector<double>& quad, int top_modes) {
    const int K = std::min<int>(top_modes, static_cast<int>(spec.eigenvalues.size()));
    const int T = static_cast<int>(traj.field_times.size());
    if (T < 2) {
        throw std::invalid_argument("modal_decay: trajectory must store at least two snapshots");
    }
    ModalDecayReport report;
    report.modes.reserve(K);
    constexpr double kLambdaFloor = 1e-10;
    constexpr double kEnergyFloor = 1e-28;

    for (int k = 0; k < K; ++k) {
        ModalDecayMode mode;
        mode.index = k;
        mode.lambda = spec.eigenvalues[k];
        mode.near_zero_eigenvalue = spec.eigenvalues[k] <= kLambdaFloor;

        std::vector<double> c2(T);
        for (int t = 0; t < T; ++t) {
            const double ck = inner(traj.u_hat[t], spec.eigenvectors[k], quad);
            c2[t] = ck * ck;
        }
        // trapezoid-in-time cumulative energy
        std::vector<double> cum(T, 0.0);
        for (int t = 1; t < T; ++t) {
            const double dt = traj.field_times[t] - traj.field_times[t - 1];
            cum[t] = cum[t - 1] + 0.5 * dt * (c2[t] + c2[t - 1]);
        }
        mode.energy = cum.back();
        if (mode.energy > kEnergyFloor) {
            const double half = 0.5 * mode.energy;
            for (int t = 0; t < T; ++t) {
                if (cum[t] >= half) {
                    mode.half_energy_time = traj.field_times[t];
                    break;
                }
            }
        }
        const int mid = T / 2;
        double head = 0.0, tail = 0.0;
        for (int t = 0; t < mid; ++t) head += c2[t];
        for (int t = mid; t < T; ++t) tail += c2[t];
        head /= mid;
        tail /= (T - mid);
        mode.tail_ratio = head > 0.0 ? tail / head : 0.0;
        report.modes.push_back(mode);
    }

    double prev_half = -1.0;
    for (const ModalDecayMode& m : report.modes) {
        if (m.near_zero_eigenvalue || m.energy <= kEnergyFloor) {
            continue; // no forced decay in that mode: flagged, not failed
        }
        if (prev_half >= 0.0 && m.half_energy_time < prev_half / 1.25) {
            report.ordering_consistent = false;
        }
        prev_half = std::max(prev_half, m.half_energy_time);
        if (m.tail_ratio >= 1.0) {
            report.tails_vanish = false;
        }
    }
    return report;
}

} // namespace nnpde
