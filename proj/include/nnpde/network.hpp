/// @file network.hpp
/// @brief Shallow network source term g(x) = N^{-beta} sum_i c_i sigma(w_i.x + eta_i),
///        its initialization law, grid evaluation, and parameter gradients.
#pragma once

#include "nnpde/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nnpde {

enum class Activation { Tanh, Sigmoid };

double activate(Activation a, double x);
double activate_deriv(Activation a, double x);
const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Law of the initial parameters (c, w, eta). The default iid law draws
/// c ~ U[-1,1] and w, eta ~ N(0,1). A point-mass law puts every unit at one
/// atom; it is used to build degenerate kernels with closed-form values.
struct InitDistribution {
    enum class Kind { IID, PointMass };

    Kind kind = Kind::IID;
    double c_halfwidth = 1.0;
    double w_stddev = 1.0;
    double eta_stddev = 1.0;
    double c_atom = 0.0;
    double w_atom = 0.0; ///< broadcast over all components of w
    double eta_atom = 0.0;
    uint64_t seed = 0;

    static InitDistribution iid(uint64_t seed, double c_halfwidth = 1.0,
                                double w_stddev = 1.0, double eta_stddev = 1.0);
    static InitDistribution point_mass(double c, double w, double eta);
};

/// The parameter triple theta = {(c_i, w_i, eta_i)} plus the normalization
/// exponent beta in (1/2, 1) and the activation tag.
struct ParamSet {
    int n_hidden = 0;
    int dim = 1;
    double beta = 2.0 / 3.0;
    Activation act = Activation::Tanh;
    std::vector<double> c;   ///< size N
    std::vector<double> w;   ///< size N*dim, unit-major
    std::vector<double> eta; ///< size N

    /// N^{-beta}
    double scale() const;
};

/// Gradient of the objective with respect to each parameter class; shapes
/// match ParamSet.
struct ParamGrad {
    std::vector<double> c;
    std::vector<double> w;
    std::vector<double> eta;

    double squared_norm() const;
};

/// Draw a ParamSet from the given law. Reproducible for a fixed dist.seed.
/// Throws std::invalid_argument unless beta lies strictly inside (1/2, 1).
ParamSet init(int n_hidden, int dim, double beta, Activation act, const InitDistribution& dist);

/// Evaluate the network at every grid node.
Field forward(const ParamSet& params, const Grid1D& grid);
Field forward(const ParamSet& params, const Grid2D& grid);

/// Objective gradients from the adjoint solution u_hat:
///   d/dc_i   = N^{-beta} <u_hat, sigma(w_i.x + eta_i)>
///   d/dw_i
///   d/deta_i  carry the extra factors c_i x and c_i respectively.
ParamGrad param_grads(const ParamSet& params, const Grid1D& grid, const Field& u_hat);
ParamGrad param_grads(const ParamSet& params, const Grid2D& grid, const Field& u_hat);

/// Pairing of a test function against the empirical measure:
/// (1/N) sum_i f(c_i, w_i, eta_i).
using TestFunction = std::function<double(double c, const double* w, int dim, double eta)>;
double measure_pair(const ParamSet& params, const TestFunction& f);

/// Checkpoint I/O. Text format: one header line "n_hidden,dim,beta,activation",
/// then one line per unit "c,w_0..w_{d-1},eta" at full precision.
void save_checkpoint(const ParamSet& params, const std::string& path);
ParamSet load_checkpoint(const std::string& path);

} // namespace nnpde
