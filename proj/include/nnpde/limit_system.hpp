/// @file limit_system.hpp
/// @brief The mean-field kernel B(x,x'; mu0), the integral operator T_B, its
///        spectrum, and the non-local limit system
///            A u* = g,   A uhat* = adjoint rhs(u*),   dg/dt = -T_B uhat*.
#pragma once

#include "nnpde/grid.hpp"
#include "nnpde/network.hpp"
#include "nnpde/trainer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace nnpde {

/// Quadrature-aware discretization of the kernel
///   B(x,x') = alpha < sigma(wx'+eta) sigma(wx+eta)
///             + sigma'(wx'+eta) sigma'(wx+eta) c^2 (x.x' + 1), mu0 >,
/// estimated over mc_samples Monte-Carlo draws of (c, w, eta).
struct KernelMatrix {
    Eigen::MatrixXd values; ///< n x n, exactly symmetric, alpha baked in
    Eigen::MatrixXd coords; ///< n x d node coordinates
    std::vector<double> quad;
    int mc_samples = 0;
    uint64_t seed = 0;
    double alpha = 1.0;

    int size() const { return static_cast<int>(values.rows()); }
};

KernelMatrix estimate_kernel(const Grid1D& grid, const InitDistribution& dist, Activation act,
                             int mc_samples, double alpha = 1.0);
KernelMatrix estimate_kernel(const Grid2D& grid, const InitDistribution& dist, Activation act,
                             int mc_samples, double alpha = 1.0);

/// [T_B u](x_i) = sum_j B(x_i, x_j) w_j u_j.
Field apply_kernel(const KernelMatrix& kernel, const Field& u);

/// Eigenpairs of W^(1/2) B W^(1/2) mapped back so the eigenvectors are
/// orthonormal in the quadrature inner product. Eigenvalues descending.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    std::vector<Field> eigenvectors;
};

SpectralDecomposition spectrum(const KernelMatrix& kernel);

void save_spectrum_csv(const std::string& path, const SpectralDecomposition& spec);

/// Monte-Carlo + quadrature estimate of the eigenvalue upper bound
///   C_sigma = < int sigma^2 + int |c sigma' x|^2 + int |c sigma'|^2, mu0 >.
/// By convention the bound excludes the alpha factor; compare against
/// eigenvalues of a kernel built with the same alpha as lambda <= alpha*C_sigma.
double c_sigma_bound(const InitDistribution& dist, Activation act, const Grid1D& grid,
                     int mc_samples);

enum class LimitIntegrator { Euler, RK4 };

struct LimitConfig {
    int grid_n = 257;
    double mu = 0.1;
    int moments = 10;
    double dt = 5.0;
    int steps = 600000;
    double j_floor = 1e-14;
    int mc_samples = 100000;
    uint64_t seed = 0;
    double alpha = 1.0;
    Activation act = Activation::Tanh;
    LimitIntegrator integrator = LimitIntegrator::Euler;
    int store_every = 1; ///< field snapshot cadence; J is recorded every step
    std::string target_csv;

    TrainConfig as_train_config() const;
};

struct LimitTrajectory {
    double dt = 0.0;
    std::vector<double> times; ///< per recorded J entry
    std::vector<double> J;
    std::vector<double> field_times; ///< per stored field snapshot
    std::vector<Field> u;
    std::vector<Field> u_hat;
    std::vector<Field> g;
    bool reached_floor = false;
};

LimitTrajectory integrate_limit(const LimitConfig& config);
LimitTrajectory integrate_limit(const LimitConfig& config, const Problem& problem,
                                const KernelMatrix& kernel);

/// One-step check of the limit energy identity dJ/dt = -<uhat, T_B uhat>.
DissipationReport limit_dissipation_probe(const Problem& problem, const KernelMatrix& kernel,
                                          const Field& g, double dt);

/// Per-mode diagnostics of c_k(t) = <uhat*(t), e_k>_quad.
struct ModalDecayMode {
    int index = 0;          ///< position in the descending-eigenvalue order
    double lambda = 0.0;
    double energy = 0.0;        ///< int c_k^2 dt over the run
    double half_energy_time = 0.0; ///< first time cumulative energy reaches half
    double tail_ratio = 0.0;    ///< mean c_k^2 over last half / first half
    bool near_zero_eigenvalue = false; ///< lambda below threshold: no forced decay
};

struct ModalDecayReport {
    std::vector<ModalDecayMode> modes;
    /// true when half-energy times are non-decreasing as lambda decreases
    /// (checked with 25% slack over modes carrying energy, skipping
    /// near-zero-eigenvalue modes)
    bool ordering_consistent = true;
    /// true when every checked mode's tail_ratio < 1
    bool tails_vanish = true;
};

ModalDecayReport modal_decay(const LimitTrajectory& traj, const SpectralDecomposition& spec,
                             const std::vector<double>& quad, int top_modes = 5);

} // namespace nnpde
