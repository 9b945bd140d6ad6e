#include "nnpde/rans_channel.hpp"
#include "nnpde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

namespace nnpde::rans {

namespace {

/// Cached spacings of the staggered grid.
struct Geometry {
    int n = 0;                ///< cell count
    std::vector<double> yf;   ///< faces, n+1
    std::vector<double> yc;   ///< centers, n
    std::vector<double> hf;   ///< cell widths yf[i+1]-yf[i], n
    std::vector<double> hc;   ///< center gaps yc[j]-yc[j-1], indexed 1..n-1
    double d_bot = 0.0;       ///< first center to bottom wall
    double d_top = 0.0;       ///< last center to top wall
    std::vector<double> w_face; ///< trapezoid weights over faces

    explicit Geometry(const ChannelGrid& g) {
        n = g.n_y;
        yf = g.faces;
        yc = g.centers;
        hf.resize(n);
        for (int i = 0; i < n; ++i) hf[i] = yf[i + 1] - yf[i];
        hc.assign(n + 1, 0.0);
        for (int j = 1; j < n; ++j) hc[j] = yc[j] - yc[j - 1];
        d_bot = yc[0] - yf[0];
        d_top = yf[n] - yc[n - 1];
        w_face.assign(n + 1, 0.0);
        w_face[0] = 0.5 * hf[0];
        w_face[n] = 0.5 * hf[n - 1];
        for (int j = 1; j < n; ++j) w_face[j] = 0.5 * (yf[j + 1] - yf[j - 1]);
    }
};

int idx_u(int j) { return j - 1; }
int idx_k(const RansConfig& c, int i) { return (c.n_y - 1) + i; }
int idx_e(const RansConfig& c, int i) { return (c.n_y - 1) + c.n_y + i; }

} // namespace

int n_unknowns(const RansConfig& config) { return 3 * config.n_y - 1; }

RansState laminar_state(const RansConfig& config) {
    if (config.n_y < 8) {
        throw std::invalid_argument("laminar_state: need n_y >= 8 cells");
    }
    RansState s;
    s.grid = channel_grid(config.n_y, config.delta, config.eta);
    const double nu = config.nu();
    const double d = config.delta;
    // exact laminar balance: Ubulk = -dpdx d^2 / (3 rho nu)
    s.dpdx = -3.0 * config.rho * nu * config.U_bulk_target / (d * d);
    s.u.resize(config.n_y + 1);
    for (int j = 0; j <= config.n_y; ++j) {
        const double y = s.grid.faces[j];
        s.u[j] = (-s.dpdx / (2.0 * config.rho * nu)) * (d * d - y * y);
    }
    s.u.front() = 0.0;
    s.u.back() = 0.0;
    if (config.laminar) {
        s.k.assign(config.n_y, config.k_floor);
        s.eps.assign(config.n_y, config.eps_floor);
    } else {
        // start near the turbulent attractor: Dean-correlation wall shear,
        // equilibrium-level k with a near-wall taper, mixing-length eps
        const double cf_guess = 0.073 * std::pow(config.Re, -0.25);
        const double u_tau2 = 0.5 * cf_guess * config.U_bulk_target * config.U_bulk_target;
        s.dpdx = -config.rho * u_tau2 / d;
        const double k0 = 3.5 * u_tau2;
        // eps chosen so the initial eddy viscosity is ~30 nu: production can
        // outrun dissipation while the profile steepens toward turbulent
        const double nu_t0 = 30.0 * nu;
        s.k.resize(config.n_y);
        s.eps.resize(config.n_y);
        for (int i = 0; i < config.n_y; ++i) {
            const double dist = d - std::abs(s.grid.centers[i]);
            const double taper = std::min(1.0, std::pow(dist / (0.05 * d), 2));
            const double shape = std::max(0.3, 1.0 - 0.7 * (1.0 - dist / d));
            s.k[i] = std::max(k0 * taper * shape, config.k_floor);
            s.eps[i] = std::max(config.C_mu * s.k[i] * s.k[i] / nu_t0, config.eps_floor);
        }
        if (config.wall == WallTreatment::PinnedEps) {
            const double d_bot = s.grid.centers[0] - s.grid.faces[0];
            const double d_top = s.grid.faces[config.n_y] - s.grid.centers[config.n_y - 1];
            s.eps[0] = std::max(2.0 * nu * s.k[0] / (d_bot * d_bot), config.eps_floor);
            s.eps[config.n_y - 1] =
                std::max(2.0 * nu * s.k[config.n_y - 1] / (d_top * d_top), config.eps_floor);
        }
    }
    s.resid_norm = std::numeric_limits<double>::infinity();
    return s;
}

RansState turbulent_initial_state(const RansConfig& config) {
    RansState s = laminar_state(config);
    if (config.laminar) return s;
    const Geometry geo(s.grid);
    const int n = config.n_y;
    const double nu = config.nu();
    const double d = config.delta;

    const double cf_guess = 0.073 * std::pow(config.Re, -0.25);
    const double u_tau = config.U_bulk_target * std::sqrt(0.5 * cf_guess);
    s.dpdx = -config.rho * u_tau * u_tau / d;

    // frozen mixing-length eddy viscosity with Van Driest damping
    auto nu_t_frozen = [&](double y) {
        const double dist = d - std::abs(y);
        const double y_plus = dist * u_tau / nu;
        const double damp = 1.0 - std::exp(-y_plus / 26.0);
        const double ell = 0.41 * dist * damp;
        // |du/dy| from the total-stress balance tau = u_tau^2 (1 - dist/d)
        const double tau = u_tau * u_tau * std::max(1.0 - dist / d, 0.0);
        // nu_t = ell^2 |S|, S from (nu + nu_t)S = tau: solve the quadratic
        const double disc = nu * nu + 4.0 * ell * ell * tau;
        const double S = 2.0 * tau / (nu + std::sqrt(disc));
        return ell * ell * S;
    };

    // compose u by integrating du/dy = tau(y) / (nu + nu_t) from the wall
    s.u[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = geo.yc[i];
        const double tau = -s.dpdx * (-y) / config.rho; // tau(y) = -dpdx * (-y)
        const double slope = tau / (nu + nu_t_frozen(y));
        s.u[i + 1] = s.u[i] + slope * geo.hf[i];
    }
    s.u[n] = 0.0;
    // symmetrize (the composed half already ends near zero)
    for (int j = 0; j <= n / 2; ++j) {
        const double v = 0.5 * (s.u[j] + s.u[n - j]);
        s.u[j] = v;
        s.u[n - j] = v;
    }
    // rescale the bulk to the target
    const double ub = bulk_velocity(s);
    for (double& v : s.u) v *= config.U_bulk_target / ub;

    // local-equilibrium seeding: eps = nu_t S^2, k = nu_t |S| / sqrt(C_mu)
    for (int i = 0; i < n; ++i) {
        const double S = (s.u[i + 1] - s.u[i]) / geo.hf[i];
        const double nt = std::max(nu_t_frozen(geo.yc[i]), 1e-3 * nu);
        s.k[i] = std::max(nt * std::abs(S) / std::sqrt(config.C_mu), config.k_floor);
        s.eps[i] = std::max(nt * S * S, config.eps_floor);
    }
    if (config.wall == WallTreatment::PinnedEps) {
        s.eps[0] = std::max(2.0 * nu * s.k[0] / (geo.d_bot * geo.d_bot), config.eps_floor);
        s.eps[n - 1] =
            std::max(2.0 * nu * s.k[n - 1] / (geo.d_top * geo.d_top), config.eps_floor);
    }
    s.resid_norm = std::numeric_limits<double>::infinity();
    return s;
}

std::vector<double> eddy_viscosity(const RansState& state, const RansConfig& config) {
    std::vector<double> nu_t(config.n_y, 0.0);
    if (config.laminar) return nu_t;
    const double nu = config.nu();
    const double cap = config.nu_t_cap_factor * nu;
    // wall units from the imposed pressure gradient: tau_w = -dpdx * delta
    const double u_tau =
        std::sqrt(std::max(-state.dpdx * config.delta / config.rho, 1e-30));
    for (int i = 0; i < config.n_y; ++i) {
        const double k = std::max(state.k[i], config.k_floor);
        const double eps = std::max(state.eps[i], config.eps_floor);
        double f_mu = 1.0;
        if (config.wall == WallTreatment::Chien) {
            const double dist = config.delta - std::abs(state.grid.centers[i]);
            const double y_plus = dist * u_tau / nu;
            f_mu = 1.0 - std::exp(-0.0115 * y_plus);
        }
        nu_t[i] = std::min(f_mu * config.C_mu * k * k / eps, cap);
    }
    return nu_t;
}

Eigen::VectorXd pack_state(const RansState& state) {
    const int n = static_cast<int>(state.k.size());
    Eigen::VectorXd v(3 * n - 1);
    for (int j = 1; j < n; ++j) v[j - 1] = state.u[j];
    for (int i = 0; i < n; ++i) v[(n - 1) + i] = state.k[i];
    for (int i = 0; i < n; ++i) v[(n - 1) + n + i] = state.eps[i];
    return v;
}

void unpack_state(const Eigen::VectorXd& v, RansState& state) {
    const int n = static_cast<int>(state.k.size());
    if (v.size() != 3 * n - 1) {
        throw std::invalid_argument("unpack_state: size mismatch");
    }
    for (int j = 1; j < n; ++j) state.u[j] = v[j - 1];
    state.u.front() = 0.0;
    state.u.back() = 0.0;
    for (int i = 0; i < n; ++i) state.k[i] = v[(n - 1) + i];
    for (int i = 0; i < n; ++i) state.eps[i] = v[(n - 1) + n + i];
}

Eigen::VectorXd rans_residual(const RansState& state, const RansConfig& config,
                              const ClosureNet* net) {
    const Geometry geo(state.grid);
    const int n = config.n_y;
    const double nu = config.nu();
    const std::vector<double>& u = state.u;
    const std::vector<double>& k = state.k;
    const std::vector<double>& eps = state.eps;
    const std::vector<double> nu_t = eddy_viscosity(state, config);

    std::vector<double> S(n), F(n, 0.0);
    for (int i = 0; i < n; ++i) {
        S[i] = (u[i + 1] - u[i]) / geo.hf[i];
    }
    if (net != nullptr && !config.laminar) {
        const double lam = config.C_R / config.Re;
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d f = net->eval({geo.yc[i], k[i], eps[i], S[i]});
            F[i] = f[0] + lam * f[1];
        }
    }

    Eigen::VectorXd R(n_unknowns(config));

    // momentum at interior faces
    std::vector<double> phi(n);
    for (int i = 0; i < n; ++i) {
        phi[i] = (nu + nu_t[i]) * S[i] - F[i];
    }
    for (int j = 1; j < n; ++j) {
        R[idx_u(j)] = -state.dpdx / config.rho + (phi[j] - phi[j - 1]) / geo.hc[j];
    }

    if (config.laminar) {
        // park the model fields at their floors
        for (int i = 0; i < n; ++i) {
            R[idx_k(config, i)] = config.k_floor - k[i];
            R[idx_e(config, i)] = config.eps_floor - eps[i];
        }
        return R;
    }

    // k equation at centers; k = 0 on the walls
    const bool chien = config.wall == WallTreatment::Chien;
    const double u_tau = std::sqrt(std::max(-state.dpdx * config.delta / config.rho, 1e-30));
    std::vector<double> flux_k(n + 1), flux_e(n + 1);
    flux_k[0] = (nu / config.sigma_k) * (k[0] - 0.0) / geo.d_bot;
    flux_k[n] = (nu / config.sigma_k) * (0.0 - k[n - 1]) / geo.d_top;
    // eps wall values: zero for Chien; unused for PinnedEps (wall cells pinned)
    flux_e[0] = chien ? (nu / config.sigma_eps) * (eps[0] - 0.0) / geo.d_bot : 0.0;
    flux_e[n] = chien ? (nu / config.sigma_eps) * (0.0 - eps[n - 1]) / geo.d_top : 0.0;
    for (int j = 1; j < n; ++j) {
        const double ntf = 0.5 * (nu_t[j - 1] + nu_t[j]);
        flux_k[j] = ((nu + ntf) / config.sigma_k) * (k[j] - k[j - 1]) / geo.hc[j];
        flux_e[j] = ((nu + ntf) / config.sigma_eps) * (eps[j] - eps[j - 1]) / geo.hc[j];
    }
    for (int i = 0; i < n; ++i) {
        double sink = eps[i];
        if (chien) {
            const double dist = geo.yc[i] < 0.0 ? geo.yc[i] - geo.yf[0] : geo.yf[n] - geo.yc[i];
            sink += 2.0 * nu * k[i] / (dist * dist);
        }
        R[idx_k(config, i)] =
            (flux_k[i + 1] - flux_k[i]) / geo.hf[i] + nu_t[i] * S[i] * S[i] - sink;
    }

    if (chien) {
        for (int i = 0; i < n; ++i) {
            const double kc = std::max(k[i], config.k_floor);
            const double dist =
                geo.yc[i] < 0.0 ? geo.yc[i] - geo.yf[0] : geo.yf[n] - geo.yc[i];
            const double y_plus = dist * u_tau / nu;
            const double re_t = kc * kc / (nu * std::max(eps[i], config.eps_floor));
            const double f2 = 1.0 - 0.22 * std::exp(-(re_t / 6.0) * (re_t / 6.0));
            // production = C1 (eps/k) P with P = nu_t S^2, keeping f_mu damping
            R[idx_e(config, i)] = (flux_e[i + 1] - flux_e[i]) / geo.hf[i] +
                                  config.C_1eps * (eps[i] / kc) * nu_t[i] * S[i] * S[i] -
                                  config.C_2eps * f2 * eps[i] * eps[i] / kc -
                                  2.0 * nu * eps[i] / (dist * dist) * std::exp(-0.5 * y_plus);
        }
        return R;
    }

    // PinnedEps: near-wall cells pinned to the relation eps = 2 nu k / d^2
    const int pin = std::clamp(config.eps_pin_cells, 1, n / 2);
    for (int i = 0; i < n; ++i) {
        const bool near_bot = i < pin;
        const bool near_top = i >= n - pin;
        if (near_bot || near_top) {
            const double dist = near_bot ? geo.yc[i] - geo.yf[0] : geo.yf[n] - geo.yc[i];
            R[idx_e(config, i)] = 2.0 * nu * k[i] / (dist * dist) - eps[i];
            continue;
        }
        const double kc = std::max(k[i], config.k_floor);
        R[idx_e(config, i)] = (flux_e[i + 1] - flux_e[i]) / geo.hf[i] +
                              config.C_1eps * config.C_mu * k[i] * S[i] * S[i] -
                              config.C_2eps * eps[i] * eps[i] / kc;
    }
    return R;
}

double bulk_velocity(const RansState& state) {
    const Geometry geo(state.grid);
    double acc = 0.0;
    for (int j = 0; j <= geo.n; ++j) acc += geo.w_face[j] * state.u[j];
    return acc / (geo.yf[geo.n] - geo.yf[0]);
}

namespace {

/// Per-unknown pseudo-time steps from the local diffusion and sink rates.
Eigen::VectorXd local_steps(const RansState& state, const RansConfig& config,
                            const Geometry& geo) {
    const int n = config.n_y;
    const double nu = config.nu();
    const std::vector<double> nu_t = eddy_viscosity(state, config);
    Eigen::VectorXd dt(n_unknowns(config));
    // stable (diffusion/sink) rates tolerate dt*rate near the RK4 bound 2.78;
    // the margin absorbs nu_t growth within a step
    const double scale = 2.0 * config.cfl;
    // production is a positive feedback through nu_t(k): keep dt*rate small
    // so stages cannot compound the growth
    const double growth_cap = 0.5 * config.cfl;

    for (int j = 1; j < n; ++j) {
        const double rate = ((nu + nu_t[j]) / geo.hf[j] + (nu + nu_t[j - 1]) / geo.hf[j - 1]) /
                            geo.hc[j];
        dt[idx_u(j)] = scale / rate;
    }
    for (int i = 0; i < n; ++i) {
        const double kc = std::max(state.k[i], config.k_floor);
        const double ec = std::max(state.eps[i], config.eps_floor);
        const double S = (state.u[i + 1] - state.u[i]) / geo.hf[i];
        const double left = i == 0 ? nu / geo.d_bot
                                   : (nu + 0.5 * (nu_t[i - 1] + nu_t[i])) / geo.hc[i];
        const double right = i == n - 1 ? nu / geo.d_top
                                        : (nu + 0.5 * (nu_t[i] + nu_t[i + 1])) / geo.hc[i + 1];
        const double diff_k = (left + right) / (config.sigma_k * geo.hf[i]);
        const double diff_e = (left + right) / (config.sigma_eps * geo.hf[i]);
        const double prod_rate = 2.0 * config.C_mu * kc * S * S / ec;
        const double dist = geo.yc[i] < 0.0 ? geo.yc[i] - geo.yf[0] : geo.yf[n] - geo.yc[i];
        const double chien_rate =
            config.wall == WallTreatment::Chien ? 2.0 * nu / (dist * dist) : 0.0;
        dt[idx_k(config, i)] = std::min(scale / (diff_k + ec / kc + chien_rate),
                                        growth_cap / std::max(prod_rate, 1e-30));
        const bool pinned = config.wall == WallTreatment::PinnedEps &&
                            (i < config.eps_pin_cells || i >= n - config.eps_pin_cells);
        dt[idx_e(config, i)] =
            pinned ? std::min(1.0, scale)
                   : std::min(scale / (diff_e + 2.0 * config.C_2eps * ec / kc + chien_rate),
                              growth_cap / std::max(prod_rate, 1e-30));
    }
    return dt;
}

void clip_fields(RansState& state, const RansConfig& config) {
    for (double& v : state.k) v = std::max(v, config.k_floor);
    for (double& v : state.eps) v = std::max(v, config.eps_floor);
}

} // namespace

void relax(RansState& state, const RansConfig& config, const ClosureNet* net, int steps) {
    if (steps < 0) {
        throw std::invalid_argument("relax: steps must be >= 0");
    }
    const Geometry geo(state.grid);
    RansState work = state;

    double resid_start = -1.0;
    for (int step = 0; step < steps; ++step) {
        const Eigen::VectorXd dt = local_steps(state, config, geo);
        const Eigen::VectorXd U0 = pack_state(state);

        const Eigen::VectorXd K1 = rans_residual(state, config, net);
        state.resid_norm = K1.cwiseAbs().maxCoeff();
        if (!std::isfinite(state.resid_norm)) {
            throw NumericError("relax: non-finite residual at step " + std::to_string(step));
        }
        if (resid_start < 0.0) resid_start = state.resid_norm;
        if (state.resid_norm > 1e6 * resid_start + 1e3) {
            throw NumericError("relax: residual grew 1e6x (start " +
                               std::to_string(resid_start) + ", now " +
                               std::to_string(state.resid_norm) + ")");
        }
        if (state.resid_norm <= config.resid_floor) {
            return;
        }

        auto stage = [&](const Eigen::VectorXd& U) {
            unpack_state(U, work);
            clip_fields(work, config);
            work.dpdx = state.dpdx;
            return rans_residual(work, config, net);
        };
        const Eigen::VectorXd K2 = stage(U0 + 0.5 * dt.cwiseProduct(K1));
        const Eigen::VectorXd K3 = stage(U0 + 0.5 * dt.cwiseProduct(K2));
        const Eigen::VectorXd K4 = stage(U0 + dt.cwiseProduct(K3));
        const Eigen::VectorXd U1 =
            U0 + dt.cwiseProduct((K1 + 2.0 * K2 + 2.0 * K3 + K4) / 6.0);
        unpack_state(U1, state);
        clip_fields(state, config);

        // proportional bulk-velocity controller, one update per step
        const double ub = bulk_velocity(state);
        state.dpdx *= 1.0 - config.dpdx_gain * (ub - config.U_bulk_target) /
                                config.U_bulk_target;
        ++state.steps_taken;
    }
    // refresh the recorded norm for the final state
    const Eigen::VectorXd R = rans_residual(state, config, net);
    state.resid_norm = R.cwiseAbs().maxCoeff();
}

Diagnostics diagnostics(const RansState& state, const RansConfig& config) {
    const Geometry geo(state.grid);
    const int n = config.n_y;
    const double nu = config.nu();

    // one-sided second-order wall gradients on the nonuniform face spacing
    auto wall_gradient = [](double u0, double u1, double u2, double d1, double d2) {
        return -(2.0 * d1 + d2) / (d1 * (d1 + d2)) * u0 + (d1 + d2) / (d1 * d2) * u1 -
               d1 / (d2 * (d1 + d2)) * u2;
    };
    const double dudy_bot = wall_gradient(state.u[0], state.u[1], state.u[2], geo.hf[0],
                                          geo.hf[1]);
    const double dudy_top = wall_gradient(state.u[n], state.u[n - 1], state.u[n - 2],
                                          geo.hf[n - 1], geo.hf[n - 2]);

    Diagnostics d;
    d.tau_w_bottom = config.rho * nu * dudy_bot;
    d.tau_w_top = config.rho * nu * dudy_top; // sign flipped by the mirrored stencil
    d.tau_w = 0.5 * (d.tau_w_bottom + d.tau_w_top);
    if (!(d.tau_w > 0.0) || !std::isfinite(d.tau_w)) {
        throw NumericError("diagnostics: degenerate state, wall shear is not positive");
    }
    d.u_tau = std::sqrt(d.tau_w / config.rho);
    d.U_bulk = bulk_velocity(state);
    d.C_f = d.tau_w / (0.5 * config.rho * d.U_bulk * d.U_bulk);
    d.Re_tau = d.u_tau * config.delta / nu;

    const double delta_v = nu / d.u_tau;
    d.y_plus.resize(n + 1);
    d.u_plus.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double dist = config.delta - std::abs(geo.yf[j]);
        d.y_plus[j] = dist / delta_v;
        d.u_plus[j] = state.u[j] / d.u_tau;
    }
    return d;
}

namespace {

double reichardt(double y_plus) {
    constexpr double kappa = 0.41;
    return std::log1p(kappa * y_plus) / kappa +
           7.8 * (1.0 - std::exp(-y_plus / 11.0) -
                  (y_plus / 11.0) * std::exp(-y_plus / 3.0));
}

} // namespace

TargetProfile synth_target(const RansConfig& config) {
    const ChannelGrid grid = channel_grid(config.n_y, config.delta, config.eta);
    const Geometry geo(grid);
    const double nu = config.nu();
    // Dean friction correlation for a plane channel
    const double cf = 0.073 * std::pow(config.Re, -0.25);
    const double u_tau = config.U_bulk_target * std::sqrt(0.5 * cf);
    const double delta_v = nu / u_tau;

    TargetProfile t;
    t.Re = config.Re;
    t.provenance = "synthetic-law-of-the-wall";
    t.u.resize(config.n_y + 1);
    for (int j = 0; j <= config.n_y; ++j) {
        const double dist = config.delta - std::abs(grid.faces[j]);
        t.u[j] = u_tau * reichardt(dist / delta_v);
    }
    t.u.front() = 0.0;
    t.u.back() = 0.0;

    double bulk = 0.0;
    for (int j = 0; j <= config.n_y; ++j) bulk += geo.w_face[j] * t.u[j];
    bulk /= (grid.faces[config.n_y] - grid.faces[0]);
    const double scale = config.U_bulk_target / bulk;
    for (double& u : t.u) u *= scale;
    return t;
}

TargetProfile load_target_csv(const std::string& path, const RansConfig& config) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_target_csv: cannot open " + path);
    TargetProfile t;
    t.Re = config.Re;
    t.provenance = "file";
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.find_last_of(',');
        const std::string tail = pos == std::string::npos ? line : line.substr(pos + 1);
        try {
            t.u.push_back(std::stod(tail));
        } catch (const std::exception&) {
            if (t.u.empty()) continue; // header
            throw ConfigError("load_target_csv: bad value in " + path);
        }
    }
    if (t.u.size() != static_cast<size_t>(config.n_y + 1)) {
        throw ConfigError("load_target_csv: expected " + std::to_string(config.n_y + 1) +
                          " face values, got " + std::to_string(t.u.size()));
    }
    return t;
}

double rans_objective(const RansState& state, const TargetProfile& target) {
    const Geometry geo(state.grid);
    if (target.u.size() != state.u.size()) {
        throw std::invalid_argument("rans_objective: target/state size mismatch");
    }
    double acc = 0.0;
    for (size_t j = 0; j < state.u.size(); ++j) {
        const double d = target.u[j] - state.u[j];
        acc += geo.w_face[j] * d * d;
    }
    return 0.5 * acc;
}

Eigen::VectorXd rans_grad(const RansState& state, const RansConfig& config,
                          const ClosureNet& net, const TargetProfile& target) {
    if (!(state.resid_norm <= 10.0 * config.resid_floor)) {
        throw std::invalid_argument("rans_grad: state not converged (residual " +
                                    std::to_string(state.resid_norm) + ")");
    }
    const Geometry geo(state.grid);
    const int n = config.n_y;
    // augmented unknowns [u, k, eps, dpdx]: the bulk-velocity controller makes
    // dpdx an implicit degree of freedom with the constraint Ubulk = target
    const int m = n_unknowns(config) + 1;
    Eigen::VectorXd U(m);
    U.head(m - 1) = pack_state(state);
    U[m - 1] = state.dpdx;
    RansState work = state;

    auto eval = [&](const Eigen::VectorXd& v) {
        unpack_state(v.head(m - 1), work);
        work.dpdx = v[m - 1];
        Eigen::VectorXd R(m);
        R.head(m - 1) = rans_residual(work, config, &net);
        R[m - 1] = bulk_velocity(work) - config.U_bulk_target;
        return R;
    };
    const Eigen::VectorXd R0 = eval(U);

    // one-sided finite-difference Jacobian, column by column; steps scale
    // with the per-block magnitude so round-off stays below truncation
    Eigen::VectorXd block_scale(m);
    {
        const double u_scale = U.head(n - 1).cwiseAbs().maxCoeff();
        const double k_scale = U.segment(n - 1, n).cwiseAbs().maxCoeff();
        const double e_scale = U.segment(2 * n - 1, n).cwiseAbs().maxCoeff();
        for (int j = 0; j < n - 1; ++j) block_scale[j] = u_scale;
        for (int i = 0; i < n; ++i) block_scale[(n - 1) + i] = k_scale;
        for (int i = 0; i < n; ++i) block_scale[(2 * n - 1) + i] = e_scale;
        block_scale[m - 1] = std::abs(state.dpdx);
    }
    Eigen::MatrixXd jac(m, m);
    for (int col = 0; col < m; ++col) {
        const double h = 1e-6 * std::max(std::abs(U[col]), 1e-3 * block_scale[col]);
        Eigen::VectorXd Up = U;
        Up[col] += h;
        jac.col(col) = (eval(Up) - R0) / h;
    }

    Eigen::VectorXd dJdU = Eigen::VectorXd::Zero(m);
    for (int j = 1; j < n; ++j) {
        dJdU[idx_u(j)] = geo.w_face[j] * (state.u[j] - target.u[j]);
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac.transpose());
    Eigen::VectorXd lambda = lu.solve(dJdU);
    const double solve_err = (jac.transpose() * lambda - dJdU).norm();
    if (!std::isfinite(solve_err) || solve_err > 1e-8 * std::max(1.0, dJdU.norm())) {
        std::cerr << "rans_grad: near-singular Jacobian, applying 1e-10 diagonal shift\n";
        Eigen::MatrixXd shifted = jac.transpose();
        shifted.diagonal().array() += 1e-10;
        lambda = Eigen::PartialPivLU<Eigen::MatrixXd>(shifted).solve(dJdU);
    }

    // grad = -lambda^T dR/dtheta; theta enters only through the momentum flux
    const double lam_re = config.C_R / config.Re;
    const Eigen::Vector2d s(1.0, lam_re);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.n_params());
    for (int c = 0; c < n; ++c) {
        double gamma = 0.0;
        if (c >= 1) gamma += lambda[idx_u(c)] * (-1.0 / geo.hc[c]);
        if (c + 1 <= n - 1) gamma += lambda[idx_u(c + 1)] * (1.0 / geo.hc[c + 1]);
        if (gamma == 0.0) continue;
        const double S = (state.u[c + 1] - state.u[c]) / geo.hf[c];
        net.accumulate_scaled_grad({geo.yc[c], state.k[c], state.eps[c], S}, s, -gamma, grad);
    }
    return grad;
}

RansTrainResult train_rans(const std::vector<RansConfig>& configs,
                           const std::vector<TargetProfile>& targets, ClosureNet net,
                           const RansTrainOptions& options) {
    if (configs.empty() || configs.size() != targets.size()) {
        throw std::invalid_argument("train_rans: need one target per config");
    }

    // baseline: converge the pure k-epsilon model per Reynolds number
    std::vector<RansState> states;
    states.reserve(configs.size());
    for (const RansConfig& cfg : configs) {
        RansState s = turbulent_initial_state(cfg);
        relax(s, cfg, nullptr, cfg.max_steps);
        states.push_back(std::move(s));
    }

    // input standardization from the baseline states, with a 5% pad
    std::array<double, ClosureNet::kInputs> zmin, zmax;
    zmin.fill(std::numeric_limits<double>::infinity());
    zmax.fill(-std::numeric_limits<double>::infinity());
    for (size_t r = 0; r < configs.size(); ++r) {
        const Geometry geo(states[r].grid);
        for (int i = 0; i < configs[r].n_y; ++i) {
            const double S = (states[r].u[i + 1] - states[r].u[i]) / geo.hf[i];
            const std::array<double, 4> z = {geo.yc[i], states[r].k[i], states[r].eps[i], S};
            for (int j = 0; j < 4; ++j) {
                zmin[j] = std::min(zmin[j], z[j]);
                zmax[j] = std::max(zmax[j], z[j]);
            }
        }
    }
    for (int j = 0; j < 4; ++j) {
        const double pad = 0.05 * (zmax[j] - zmin[j]);
        zmin[j] -= pad;
        zmax[j] += pad;
    }
    net.set_standardization(zmin, zmax);

    RansTrainResult result{std::move(net), {}, 0.0, 0.0, 0, false};
    for (size_t r = 0; r < configs.size(); ++r) {
        result.baseline_J += rans_objective(states[r], targets[r]);
    }
    result.J_history.push_back(result.baseline_J);
    result.best_J = result.baseline_J;
    Eigen::VectorXd theta = result.net.flatten();
    Eigen::VectorXd best_theta = theta;
    double J_curr = result.baseline_J;

    // propose -> evaluate -> accept/backtrack; a rejected step halves the
    // trust factor instead of corrupting the states
    double trust = 1.0;
    constexpr int kMaxBacktracks = 8;
    for (int it = 1; it <= options.iterations; ++it) {
        Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(result.net.n_params());
        bool grad_ok = true;
        try {
            for (size_t r = 0; r < configs.size(); ++r) {
                relax(states[r], configs[r], &result.net, options.relax_steps);
                if (states[r].resid_norm > 10.0 * configs[r].resid_floor) {
                    relax(states[r], configs[r], &result.net, options.top_up_steps);
                }
                grad_sum += rans_grad(states[r], configs[r], result.net, targets[r]);
            }
        } catch (const std::exception&) {
            grad_ok = false;
        }
        if (!grad_ok) {
            result.stopped_early = true;
            break;
        }

        const double lr_sched =
            options.lr0 * std::pow(options.lr_decay, (it - 1) / options.lr_decay_every);
        bool accepted = false;
        for (int bt = 0; bt <= kMaxBacktracks && !accepted; ++bt) {
            double lr = lr_sched * trust;
            const double gmax = grad_sum.cwiseAbs().maxCoeff();
            if (gmax * lr > options.max_update) {
                lr = options.max_update / gmax;
            }
            ClosureNet candidate = result.net;
            candidate.unflatten(theta - lr * grad_sum);
            std::vector<RansState> trial = states;
            double J_new = 0.0;
            bool ok = true;
            try {
                for (size_t r = 0; r < configs.size(); ++r) {
                    relax(trial[r], configs[r], &candidate, options.relax_steps);
                    if (trial[r].resid_norm > 10.0 * configs[r].resid_floor) {
                        relax(trial[r], configs[r], &candidate, options.top_up_steps);
                    }
                    J_new += rans_objective(trial[r], targets[r]);
                }
            } catch (const std::exception&) {
                ok = false;
            }
            if (ok && std::isfinite(J_new) && J_new <= J_curr * options.accept_factor) {
                theta -= lr * grad_sum;
                result.net = std::move(candidate);
                states = std::move(trial);
                J_curr = J_new;
                trust = std::min(1.0, trust * 1.25);
                accepted = true;
            } else {
                trust *= 0.5;
            }
        }
        if (!accepted) {
            result.stopped_early = true;
            break;
        }
        result.J_history.push_back(J_curr);
        if (J_curr < result.best_J) {
            result.best_J = J_curr;
            result.best_iteration = it;
            best_theta = theta;
        }
        if (J_curr > options.instability_factor * result.baseline_J) {
            result.stopped_early = true;
            break;
        }
    }
    result.net.unflatten(best_theta);
    return result;
}

void save_profile_csv(const std::string& path, const RansState& state,
                      const RansConfig& config) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_profile_csv: cannot open " + path);
    out << "y,u\n";
    char buf[96];
    for (size_t j = 0; j < state.u.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", state.grid.faces[j], state.u[j]);
        out << buf;
    }
    const std::string centers_path = path + ".centers.csv";
    std::ofstream cout_(centers_path);
    if (!cout_) throw ConfigError("save_profile_csv: cannot open " + centers_path);
    cout_ << "y,k,eps,nu_t\n";
    const std::vector<double> nu_t = eddy_viscosity(state, config);
    for (int i = 0; i < config.n_y; ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g\n", state.grid.centers[i],
                      state.k[i], state.eps[i], nu_t[i]);
        cout_ << buf;
    }
}

void save_diagnostics_csv(const std::string& path, const std::vector<RansConfig>& configs,
                          const std::vector<Diagnostics>& diags) {
    if (configs.size() != diags.size()) {
        throw std::invalid_argument("save_diagnostics_csv: size mismatch");
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("save_diagnostics_csv: cannot open " + path);
    out << "Re,Re_tau,C_f\n";
    char buf[96];
    for (size_t i = 0; i < diags.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", configs[i].Re, diags[i].Re_tau,
                      diags[i].C_f);
        out << buf;
    }
}

} // namespace nnpde::rans
