/// @file closure_net.hpp
/// @brief Gated two-hidden-layer closure network for the channel RANS model:
///        H1 = ELU(W1 z + b1), H2 = ELU(W2 H1 + b2), G = sigmoid(W3 z + b3),
///        f = W4 (G .* H2) + b4, with standardized inputs
///        z = (y, k, eps, du/dy) and two output channels.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>

namespace nnpde {

class ClosureNet {
public:
    static constexpr int kInputs = 4;
    static constexpr int kOutputs = 2;

    /// Hidden layers get a uniform Glorot draw; the output layer starts at
    /// exactly zero so an untrained net reproduces the baseline model.
    static ClosureNet create(int width1, int width2, uint64_t seed);

    /// Per-feature affine map fixed from training data; inputs are mapped to
    /// roughly [-1, 1] before the first layer.
    void set_standardization(const std::array<double, kInputs>& z_min,
                             const std::array<double, kInputs>& z_max);

    Eigen::Vector2d eval(const std::array<double, kInputs>& z_raw) const;

    /// Accumulate gamma * d(s . f(z))/d(theta) into grad (flat layout).
    void accumulate_scaled_grad(const std::array<double, kInputs>& z_raw,
                                const Eigen::Vector2d& s, double gamma,
                                Eigen::VectorXd& grad) const;

    int n_params() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& theta);

    int width1() const { return static_cast<int>(W1_.rows()); }
    int width2() const { return static_cast<int>(W2_.rows()); }

    /// Flat binary checkpoint with a versioned header.
    void save(const std::string& path) const;
    static ClosureNet load(const std::string& path);

private:
    ClosureNet() = default;

    Eigen::MatrixXd W1_, W2_, W3_, W4_;
    Eigen::VectorXd b1_, b2_, b3_, b4_;
    std::array<double, kInputs> z_min_{0.0, 0.0, 0.0, 0.0};
    std::array<double, kInputs> z_max_{1.0, 1.0, 1.0, 1.0};

    Eigen::Vector4d standardize(const std::array<double, kInputs>& z_raw) const;
};

} // namespace nnpde
