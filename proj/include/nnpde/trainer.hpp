/// @file trainer.hpp
/// @brief Explicit-Euler discretization of the continuous gradient flow:
///        forward solve -> adjoint solve -> parameter gradient -> update,
///        with objective logging and a monotonicity watchdog.
#pragma once

#include "nnpde/elliptic.hpp"
#include "nnpde/grid.hpp"
#include "nnpde/network.hpp"
#include "nnpde/objective.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nnpde {

struct TrainConfig {
    int dim = 1;
    int grid_n = 257;   ///< nodes per axis
    double mu = 0.1;
    int moments = 10;   ///< moment count per axis (weak objective)
    ObjectiveMode mode = ObjectiveMode::Weak;

    int n_hidden = 100;
    double beta = 2.0 / 3.0;
    Activation act = Activation::Tanh;
    uint64_t seed = 0;

    double alpha = 1.0; ///< base rate; effective rate is alpha * N^(2 beta - 1)
    double dt = 0.25;
    int steps = 20000;

    double monotonicity_tol = 1e-12; ///< relative uptick tolerated before the watchdog fires
    int max_halvings = 10;
    double j_floor = 1e-14;
    double grad_floor = 1e-12;

    std::string target_csv; ///< empty = built-in target for the dimension

    double alpha_eff() const;
};

/// Grid, operator, basis, and target bundled for one experiment; build once
/// and share across runs (immutable after construction).
struct Problem {
    int dim = 1;
    Grid1D g1;
    Grid2D g2;
    DiscreteOperator op;
    MomentBasis basis;
    Field h;

    static Problem build(const TrainConfig& config);

    const std::vector<double>& quad() const { return basis.quad; }
    int field_size() const { return dim == 1 ? g1.n : g2.size(); }
    Field net_forward(const ParamSet& p) const;
    ParamGrad net_grads(const ParamSet& p, const Field& u_hat) const;
    double h1_norm_of(const Field& f) const;
};

struct HistoryRow {
    int step;
    double J;
    double grad_norm;
    double dt;
    double seconds;
};

struct TrainState {
    ParamSet params;
    int step = 0;
    double dt = 0.0; ///< current step size (halved by the watchdog, sticky)
    double J = 0.0;
    double last_grad_norm = 0.0; ///< |grad J| at the params most recently differentiated
    Field g;     ///< network output at params
    Field u;     ///< forward solution
    Field u_hat; ///< adjoint solution
    std::vector<HistoryRow> history;
    bool stopped = false;
    std::string stop_reason;
};

/// Initialize parameters and evaluate the step-0 state (fields and J).
TrainState init_train(const TrainConfig& config, const Problem& problem);

/// One watchdog-guarded Euler step. Appends the history row for the state it
/// starts from, then updates it. Throws NumericError on non-finite values or
/// when max_halvings retries cannot restore descent.
void train_step(TrainState& state, const TrainConfig& config, const Problem& problem,
                double elapsed_seconds = 0.0);

/// Run to the step budget, the J floor, or the gradient floor.
TrainState train(const TrainConfig& config);
TrainState train(const TrainConfig& config, const Problem& problem);

/// Write history as CSV: step,J,grad_norm,dt,seconds.
void save_history_csv(const std::string& path, const std::vector<HistoryRow>& history);

/// One-step check of the energy identity dJ/dt = -alpha <(int uhat sigma)^2
/// + c^2 (int uhat sigma' x)^2 + c^2 (int uhat sigma')^2, mu^N>, evaluated as
/// -alpha_eff * |grad J|^2. Takes a trial Euler step of size dt from params
/// and compares the finite difference of J against the identity.
struct DissipationReport {
    double lhs = 0.0; ///< (J(theta - dt a grad) - J(theta)) / dt
    double rhs = 0.0; ///< -alpha_eff |grad J|^2
    double rel_discrepancy = 0.0;
};

DissipationReport dissipation_probe(const Problem& problem, const TrainConfig& config,
                                    const ParamSet& params, double dt);

} // namespace nnpde
