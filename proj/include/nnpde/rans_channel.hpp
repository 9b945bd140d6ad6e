/// @file rans_channel.hpp
/// @brief Steady turbulent channel flow with the standard k-epsilon closure,
///        optional neural-network stress augmentation, pseudo-time RK4
///        relaxation, wall diagnostics, and a discrete-adjoint gradient of
///        the mean-velocity mismatch objective.
///
/// Staggered layout on the stretched ChannelGrid: mean velocity at faces
/// (walls pinned to zero), k / epsilon / nu_t at cell centers. The residual
/// treats the first and last epsilon cells as pinned to the near-wall
/// relation eps = 2 nu k / dy^2.
#pragma once

#include "nnpde/closure_net.hpp"
#include "nnpde/grid.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace nnpde::rans {

enum class WallTreatment {
    PinnedEps, ///< eps pinned to 2 nu k/d^2 in the wall cells, no damping
    Chien,     ///< Chien low-Re closure: f_mu, k and eps near-wall sinks, eps_w = 0
};

struct RansConfig {
    double Re = 6001.0;
    double delta = 1.0;
    double rho = 1.0;
    double U_bulk_target = 1.0;

    // standard k-epsilon constants
    double C_mu = 0.09;
    double sigma_k = 1.00;
    double sigma_eps = 1.30;
    double C_1eps = 1.44;
    double C_2eps = 1.92;
    /// scale of the second network channel; the smallest training Reynolds number
    double C_R = 6001.0;

    int n_y = 32;
    double eta = 0.995;

    double k_floor = 1e-10;
    double eps_floor = 1e-10;
    /// near-wall closure; the undamped PinnedEps variant overshoots the DNS
    /// friction coefficient by ~2.5x at Re = 6001
    WallTreatment wall = WallTreatment::Chien;
    /// cells per wall pinned to 2 nu k/d^2 (PinnedEps variant only)
    int eps_pin_cells = 1;
    double nu_t_cap_factor = 1e3; ///< nu_t <= cap * nu

    double cfl = 0.7;
    int max_steps = 400000;
    double resid_floor = 1e-8;
    double dpdx_gain = 0.1; ///< proportional bulk-velocity controller gain

    bool laminar = false; ///< force nu_t = 0 and park the k/eps equations

    double nu() const { return 2.0 * delta * U_bulk_target / Re; }
};

struct RansState {
    ChannelGrid grid;
    std::vector<double> u;   ///< faces, size n_y+1, walls pinned 0
    std::vector<double> k;   ///< centers
    std::vector<double> eps; ///< centers
    double dpdx = 0.0;
    double resid_norm = 0.0;
    int steps_taken = 0;
};

/// Parabolic profile with dp/dx chosen so the bulk velocity hits the target;
/// k and eps seeded at modest turbulent levels (or floors in laminar mode).
RansState laminar_state(const RansConfig& config);

/// Starting point for turbulent runs. Starts from the parabolic profile's
/// wall shear estimate, composes the velocity against a frozen mixing-length
/// eddy viscosity (closed form, no relaxation), and seeds k/eps at local
/// equilibrium with that viscosity. Coupled RK4 relaxation from the raw
/// parabola lets eps outrun k and relaminarizes the marginal-Re cases; this
/// state sits near the turbulent manifold instead.
RansState turbulent_initial_state(const RansConfig& config);

/// Eddy viscosity at centers: C_mu k^2/eps with floors and cap (zero in
/// laminar mode).
std::vector<double> eddy_viscosity(const RansState& state, const RansConfig& config);

/// Unknown vector packing [u_1..u_{n_y-1}, k_0..k_{n_y-1}, eps_0..eps_{n_y-1}].
int n_unknowns(const RansConfig& config);
Eigen::VectorXd pack_state(const RansState& state);
void unpack_state(const Eigen::VectorXd& v, RansState& state);

/// Steady residual; zero at a converged state. Signs are chosen so that
/// dU/dtau = R(U) relaxes every equation (including the pinned eps rows).
Eigen::VectorXd rans_residual(const RansState& state, const RansConfig& config,
                              const ClosureNet* net);

/// RK4 pseudo-time relaxation with per-unknown local steps and one dp/dx
/// controller update per step. Stops at config.resid_floor. Throws
/// NumericError if the residual grows 1e6x over its starting value.
void relax(RansState& state, const RansConfig& config, const ClosureNet* net, int steps);

struct Diagnostics {
    double tau_w = 0.0;
    double u_tau = 0.0;
    double C_f = 0.0;
    double Re_tau = 0.0;
    double U_bulk = 0.0;
    double tau_w_bottom = 0.0;
    double tau_w_top = 0.0;
    std::vector<double> y_plus; ///< per face, distance to the nearest wall in wall units
    std::vector<double> u_plus;
};

Diagnostics diagnostics(const RansState& state, const RansConfig& config);

struct TargetProfile {
    double Re = 0.0;
    std::vector<double> u; ///< at faces
    std::string provenance; ///< "synthetic-law-of-the-wall" or "file"
};

/// Reichardt law-of-the-wall composite profile, scaled so the bulk velocity
/// is exactly the configured target. Re_tau is estimated from the Dean
/// friction correlation C_f = 0.073 Re^(-1/4).
TargetProfile synth_target(const RansConfig& config);

/// y,value CSV with one row per face.
TargetProfile load_target_csv(const std::string& path, const RansConfig& config);

double bulk_velocity(const RansState& state);

/// Objective J = 1/2 int (h - u)^2 dy over the faces.
double rans_objective(const RansState& state, const TargetProfile& target);

/// Discrete adjoint at a converged state: solve Jac^T lambda = dJ/dU with the
/// Jacobian from one-sided finite differences, then grad = -lambda^T dR/dtheta
/// with the network differentiated analytically. Requires
/// state.resid_norm <= 10 * config.resid_floor.
Eigen::VectorXd rans_grad(const RansState& state, const RansConfig& config,
                          const ClosureNet& net, const TargetProfile& target);

struct RansTrainOptions {
    int iterations = 200;
    int relax_steps = 100; ///< relaxation steps per optimization iteration
    double lr0 = 0.5;
    double lr_decay = 0.5;
    int lr_decay_every = 80; ///< piecewise-constant schedule
    double instability_factor = 10.0;
    int top_up_steps = 20000; ///< extra relaxation if 100 steps left resid high
    double max_update = 0.02;   ///< clip |lr * grad|_inf per iteration
    double accept_factor = 1.2; ///< backtrack when J grows beyond this factor
};

struct RansTrainResult {
    ClosureNet net; ///< best-so-far parameters
    std::vector<double> J_history; ///< summed training J per iteration (0 = baseline)
    double baseline_J = 0.0;
    double best_J = 0.0;
    int best_iteration = 0;
    bool stopped_early = false;
};

/// Train the closure on one state per Reynolds number against the given
/// targets. Standardization is fixed from the baseline converged states.
RansTrainResult train_rans(const std::vector<RansConfig>& configs,
                           const std::vector<TargetProfile>& targets, ClosureNet net,
                           const RansTrainOptions& options);

void save_profile_csv(const std::string& path, const RansState& state,
                      const RansConfig& config);
void save_diagnostics_csv(const std::string& path, const std::vector<RansConfig>& configs,
                          const std::vector<Diagnostics>& diags);

} // namespace nnpde::rans
