#include "nnpde/trainer.hpp"
#include "nnpde/errors.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace nnpde {

double TrainConfig::alpha_eff() const {
    return alpha * std::pow(static_cast<double>(n_hidden), 2.0 * beta - 1.0);
}

Problem Problem::build(const TrainConfig& config) {
    Problem p;
    p.dim = config.dim;
    if (config.dim == 1) {
        p.g1 = uniform_grid(config.grid_n);
        p.op = DiscreteOperator::assemble(p.g1, config.mu);
        p.basis = cosine_basis_1d(p.g1, config.moments);
        p.h = config.target_csv.empty() ? quintic_bump_target(p.g1)
                                        : load_field_csv(config.target_csv, p.g1.n);
    } else if (config.dim == 2) {
        p.g2 = uniform_grid_2d(config.grid_n, config.grid_n);
        p.op = DiscreteOperator::assemble(p.g2, config.mu);
        p.basis = cosine_basis_2d(p.g2, config.moments, config.moments);
        p.h = config.target_csv.empty() ? parabolic_bump_target(p.g2)
                                        : load_field_csv(config.target_csv, p.g2.size());
    } else {
        throw std::invalid_argument("Problem::build: dim must be 1 or 2");
    }
    return p;
}

Field Problem::net_forward(const ParamSet& p) const {
    return dim == 1 ? forward(p, g1) : forward(p, g2);
}

ParamGrad Problem::net_grads(const ParamSet& p, const Field& u_hat) const {
    return dim == 1 ? param_grads(p, g1, u_hat) : param_grads(p, g2, u_hat);
}

double Problem::h1_norm_of(const Field& f) const {
    return dim == 1 ? h1_norm(f, g1) : h1_norm(f, g2);
}

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

/// Evaluate fields and objective at the given parameters.
void evaluate(TrainState& s, const Problem& problem, ObjectiveMode mode) {
    s.g = problem.net_forward(s.params);
    s.u = problem.op.solve(s.g);
    s.J = objective(s.u, problem.h, problem.basis, mode);
}

void apply_update(ParamSet& p, const ParamGrad& g, double step_scale) {
    for (size_t i = 0; i < p.c.size(); ++i) p.c[i] -= step_scale * g.c[i];
    for (size_t i = 0; i < p.w.size(); ++i) p.w[i] -= step_scale * g.w[i];
    for (size_t i = 0; i < p.eta.size(); ++i) p.eta[i] -= step_scale * g.eta[i];
}

} // namespace

TrainState init_train(const TrainConfig& config, const Problem& problem) {
    TrainState s;
    s.params = init(config.n_hidden, config.dim, config.beta, config.act,
                    InitDistribution::iid(config.seed));
    s.dt = config.dt;
    s.step = 0;
    evaluate(s, problem, config.mode);
    s.u_hat = problem.op.solve_adjoint(adjoint_rhs(s.u, problem.h, problem.basis, config.mode));
    return s;
}

void train_step(TrainState& state, const TrainConfig& config, const Problem& problem,
                double elapsed_seconds) {
    const ParamGrad grad = problem.net_grads(state.params, state.u_hat);
    const double grad_norm2 = grad.squared_norm();
    if (!std::isfinite(grad_norm2)) {
        throw NumericError("train_step: non-finite gradient at step " +
                           std::to_string(state.step) + " (J=" + std::to_string(state.J) + ")");
    }
    state.last_grad_norm = std::sqrt(grad_norm2);
    state.history.push_back(
        {state.step, state.J, state.last_grad_norm, state.dt, elapsed_seconds});

    const double a_eff = config.alpha_eff();
    const double J_prev = state.J;
    TrainState trial;
    int halvings = 0;
    for (;;) {
        trial.params = state.params;
        apply_update(trial.params, grad, state.dt * a_eff);
        if (!all_finite(trial.params.c) || !all_finite(trial.params.w) ||
            !all_finite(trial.params.eta)) {
            throw NumericError("train_step: non-finite parameters at step " +
                               std::to_string(state.step));
        }
        evaluate(trial, problem, config.mode);
        if (!std::isfinite(trial.J)) {
            throw NumericError("train_step: non-finite objective at step " +
                               std::to_string(state.step) + " with dt=" + std::to_string(state.dt));
        }
        if (trial.J <= J_prev * (1.0 + config.monotonicity_tol) + 1e-300) {
            break; // descent (within tolerance) achieved
        }
        if (++halvings > config.max_halvings) {
            throw NumericError("train_step: watchdog exhausted " +
                               std::to_string(config.max_halvings) + " halvings at step " +
                               std::to_string(state.step) + " (J " + std::to_string(J_prev) +
                               " -> " + std::to_string(trial.J) + ")");
        }
        state.dt *= 0.5; // sticky: later steps keep the reduced dt
    }

    state.params = std::move(trial.params);
    state.g = std::move(trial.g);
    state.u = std::move(trial.u);
    state.J = trial.J;
    state.u_hat =
        problem.op.solve_adjoint(adjoint_rhs(state.u, problem.h, problem.basis, config.mode));
    ++state.step;
}

TrainState train(const TrainConfig& config) {
    const Problem problem = Problem::build(config);
    return train(config, problem);
}

TrainState train(const TrainConfig& config, const Problem& problem) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    TrainState state = init_train(config, problem);
    state.last_grad_norm = std::numeric_limits<double>::infinity();
    while (state.step < config.steps) {
        if (state.J <= config.j_floor) {
            state.stop_reason = "objective floor";
            state.stopped = true;
            break;
        }
        if (state.last_grad_norm <= config.grad_floor) {
            state.stop_reason = "gradient floor";
            state.stopped = true;
            break;
        }
        train_step(state, config, problem, elapsed());
    }
    if (!state.stopped) {
        state.stop_reason = "step budget";
        state.stopped = true;
    }
    // closing row for the final state
    const ParamGrad grad = problem.net_grads(state.params, state.u_hat);
    state.last_grad_norm = std::sqrt(grad.squared_norm());
    state.history.push_back({state.step, state.J, state.last_grad_norm, state.dt, elapsed()});
    return state;
}

void save_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("save_history_csv: cannot open " + path);
    }
    out << "step,J,grad_norm,dt,seconds\n";
    char buf[160];
    for (const HistoryRow& r : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.6f\n", r.step, r.J, r.grad_norm,
                      r.dt, r.seconds);
        out << buf;
    }
}

DissipationReport dissipation_probe(const Problem& problem, const TrainConfig& config,
                                    const ParamSet& params, double dt) {
    TrainState s;
    s.params = params;
    evaluate(s, problem, config.mode);
    s.u_hat = problem.op.solve_adjoint(adjoint_rhs(s.u, problem.h, problem.basis, config.mode));
    const ParamGrad grad = problem.net_grads(s.params, s.u_hat);
    const double a_eff = config.alpha_eff();

    TrainState trial;
    trial.params = params;
    apply_update(trial.params, grad, dt * a_eff);
    evaluate(trial, problem, config.mode);

    DissipationReport rep;
    rep.lhs = (trial.J - s.J) / dt;
    // identity: dJ/dt = -alpha_eff |grad J|^2, equivalently
    // -alpha <(int uhat sigma)^2 + c^2(int uhat sigma' x)^2 + c^2(int uhat sigma')^2, mu^N>
    rep.rhs = -a_eff * grad.squared_norm();
    const double denom = std::max(std::abs(rep.rhs), 1e-300);
    rep.rel_discrepancy = std::abs(rep.lhs - rep.rhs) / denom;
    return rep;
}

} // namespace nnpde
