/// @file convergence_lab.hpp
/// @brief Orchestrates N-sweeps, pre-limit vs. limit comparisons, empirical
///        measure drift, and the global-floor search. These are the numerical
///        instantiations of the convergence and global-decay statements.
#pragma once

#include "nnpde/limit_system.hpp"
#include "nnpde/network.hpp"
#include "nnpde/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nnpde {

struct SweepEntry {
    int n_hidden = 0;
    uint64_t seed = 0;
    double final_J = 0.0;
    double seconds = 0.0;
    int steps_run = 0;
    bool failed = false;
    std::string error;
    std::vector<double> J_tail; ///< last few recorded J values
};

struct SweepResult {
    std::vector<SweepEntry> entries; ///< ordered by (N, seed)
    std::vector<std::pair<int, double>> median_final; ///< per N, failures excluded
};

/// Train every (N, seed) pair. Entries run concurrently on up to `jobs`
/// workers; per-run failures are recorded and the sweep continues.
SweepResult sweep_N(const TrainConfig& base, const std::vector<int>& Ns,
                    const std::vector<uint64_t>& seeds, int jobs = 1);

/// Table layout "N,objective" (median over seeds).
void save_sweep_csv(const std::string& path, const SweepResult& sweep);
/// Full per-run records.
void save_sweep_runs_csv(const std::string& path, const SweepResult& sweep);

struct ComparisonMetrics {
    std::vector<double> times;
    std::vector<double> err_u_h1;    ///< |u^N - u*|_H1
    std::vector<double> err_uhat_h1; ///< |uhat^N - uhat*|_H1
    std::vector<double> err_g_l2;    ///< |g^N - g|_L2
    std::vector<double> q_n;         ///< Q^N(t) = sqrt(2 J^N_t)
    double max_err_u_h1 = 0.0;
    double max_err_uhat_h1 = 0.0;
    double max_err_g_l2 = 0.0;
    double init_gap_l2 = 0.0; ///< |g^N_0|_L2 (the limit starts from g = 0)
};

/// Train the pre-limit system with config.dt on the same grid as the limit
/// trajectory (which must be stored every step at the same dt) and measure
/// the field discrepancies at every shared time step. The optional override
/// replaces the seeded initialization (used for fixed-point checks).
ComparisonMetrics compare_prelimit_limit(const TrainConfig& config, const Problem& problem,
                                         const LimitTrajectory& limit,
                                         const ParamSet* init_override = nullptr);

void save_compare_csv(const std::string& path, const ComparisonMetrics& metrics);

struct InitGapScaling {
    std::vector<int> Ns;
    std::vector<double> rms_norm; ///< sqrt(mean over seeds of |g^N_0|^2)
    double slope = 0.0;           ///< log-log least-squares slope; theory: -(beta - 1/2)
};

InitGapScaling initial_output_scaling(const TrainConfig& base, const Problem& problem,
                                      const std::vector<int>& Ns, int n_seeds);

/// Bounded C^2 observables of (c, w, eta) used for the empirical-measure
/// stability checks. Always returns five functions.
std::vector<TestFunction> standard_test_functions();

/// Per-function |<f, mu^N_final> - <f, mu^N_0>| after training with config.
std::vector<double> measure_drift(const TrainConfig& config, const Problem& problem);

struct FloorReport {
    double epsilon = 0.0;
    bool achieved = false;
    int N0 = 0;       ///< smallest tested N whose seed-averaged J stays <= eps
    int tau_step = 0; ///< first step from which the average stays there
    double closest = 0.0; ///< best (smallest) suffix maximum seen over all N
};

/// Search for (tau, N0) with sup_{t >= tau} mean_seeds J_t^N <= epsilon.
FloorReport global_floor_test(const TrainConfig& base, double epsilon,
                              const std::vector<int>& Ns, const std::vector<uint64_t>& seeds,
                              int jobs = 1);

} // namespace nnpde
