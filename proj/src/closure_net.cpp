#include "nnpde/closure_net.hpp"
#include "nnpde/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>

namespace nnpde {

namespace {

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_deriv(double x) { return x > 0.0 ? 1.0 : std::exp(x); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::MatrixXd glorot(int rows, int cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

} // namespace

ClosureNet ClosureNet::create(int width1, int width2, uint64_t seed) {
    if (width1 < 1 || width2 < 1) {
        throw std::invalid_argument("ClosureNet: widths must be positive");
    }
    std::mt19937_64 rng(seed);
    ClosureNet net;
    net.W1_ = glorot(width1, kInputs, rng);
    net.b1_ = Eigen::VectorXd::Zero(width1);
    net.W2_ = glorot(width2, width1, rng);
    net.b2_ = Eigen::VectorXd::Zero(width2);
    net.W3_ = glorot(width2, kInputs, rng);
    net.b3_ = Eigen::VectorXd::Zero(width2);
    net.W4_ = Eigen::MatrixXd::Zero(kOutputs, width2); // zero output at init
    net.b4_ = Eigen::VectorXd::Zero(kOutputs);
    return net;
}

void ClosureNet::set_standardization(const std::array<double, kInputs>& z_min,
                                     const std::array<double, kInputs>& z_max) {
    z_min_ = z_min;
    z_max_ = z_max;
}

Eigen::Vector4d ClosureNet::standardize(const std::array<double, kInputs>& z_raw) const {
    Eigen::Vector4d z;
    for (int j = 0; j < kInputs; ++j) {
        const double span = z_max_[j] - z_min_[j];
        z[j] = span > 0.0 ? 2.0 * (z_raw[j] - z_min_[j]) / span - 1.0 : z_raw[j];
    }
    return z;
}

Eigen::Vector2d ClosureNet::eval(const std::array<double, kInputs>& z_raw) const {
    const Eigen::Vector4d z = standardize(z_raw);
    Eigen::VectorXd a1 = W1_ * z + b1_;
    for (int i = 0; i < a1.size(); ++i) a1[i] = elu(a1[i]);
    Eigen::VectorXd a2 = W2_ * a1 + b2_;
    for (int i = 0; i < a2.size(); ++i) a2[i] = elu(a2[i]);
    Eigen::VectorXd gate = W3_ * z + b3_;
    for (int i = 0; i < gate.size(); ++i) gate[i] = logistic(gate[i]);
    return W4_ * gate.cwiseProduct(a2) + b4_;
}

void ClosureNet::accumulate_scaled_grad(const std::array<double, kInputs>& z_raw,
                                        const Eigen::Vector2d& s, double gamma,
                                        Eigen::VectorXd& grad) const {
    const Eigen::Vector4d z = standardize(z_raw);
    const Eigen::VectorXd pre1 = W1_ * z + b1_;
    Eigen::VectorXd h1 = pre1;
    for (int i = 0; i < h1.size(); ++i) h1[i] = elu(pre1[i]);
    const Eigen::VectorXd pre2 = W2_ * h1 + b2_;
    Eigen::VectorXd h2 = pre2;
    for (int i = 0; i < h2.size(); ++i) h2[i] = elu(pre2[i]);
    const Eigen::VectorXd pre3 = W3_ * z + b3_;
    Eigen::VectorXd gate = pre3;
    for (int i = 0; i < gate.size(); ++i) gate[i] = logistic(pre3[i]);
    const Eigen::VectorXd gated = gate.cwiseProduct(h2);

    // backward pass for L = gamma * s . f
    const Eigen::Vector2d dy4 = gamma * s;
    const Eigen::VectorXd d_gated = W4_.transpose() * dy4;
    Eigen::VectorXd d_pre3 = d_gated.cwiseProduct(h2);
    for (int i = 0; i < d_pre3.size(); ++i) d_pre3[i] *= gate[i] * (1.0 - gate[i]);
    Eigen::VectorXd d_pre2 = d_gated.cwiseProduct(gate);
    for (int i = 0; i < d_pre2.size(); ++i) d_pre2[i] *= elu_deriv(pre2[i]);
    Eigen::VectorXd d_pre1 = W2_.transpose() * d_pre2;
    for (int i = 0; i < d_pre1.size(); ++i) d_pre1[i] *= elu_deriv(pre1[i]);

    // flat layout: W1, b1, W2, b2, W3, b3, W4, b4 (row-major matrices)
    int off = 0;
    auto add_mat = [&](const Eigen::MatrixXd& outer_rows_cols, const Eigen::VectorXd& rowv,
                       const Eigen::VectorXd& colv) {
        const int r = static_cast<int>(outer_rows_cols.rows());
        const int c = static_cast<int>(outer_rows_cols.cols());
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) grad[off++] += rowv[i] * colv[j];
        }
    };
    auto add_vec = [&](const Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i) grad[off++] += v[i];
    };
    add_mat(W1_, d_pre1, z);
    add_vec(d_pre1);
    add_mat(W2_, d_pre2, h1);
    add_vec(d_pre2);
    add_mat(W3_, d_pre3, z);
    add_vec(d_pre3);
    add_mat(W4_, dy4, gated);
    add_vec(dy4);
}

int ClosureNet::n_params() const {
    return static_cast<int>(W1_.size() + b1_.size() + W2_.size() + b2_.size() + W3_.size() +
                            b3_.size() + W4_.size() + b4_.size());
}

Eigen::VectorXd ClosureNet::flatten() const {
    Eigen::VectorXd theta(n_params());
    int off = 0;
    auto put_mat = [&](const Eigen::MatrixXd& m) {
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j) theta[off++] = m(i, j);
        }
    };
    auto put_vec = [&](const Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i) theta[off++] = v[i];
    };
    put_mat(W1_);
    put_vec(b1_);
    put_mat(W2_);
    put_vec(b2_);
    put_mat(W3_);
    put_vec(b3_);
    put_mat(W4_);
    put_vec(b4_);
    return theta;
}

void ClosureNet::unflatten(const Eigen::VectorXd& theta) {
    if (theta.size() != n_params()) {
        throw std::invalid_argument("ClosureNet::unflatten: size mismatch");
    }
    int off = 0;
    auto get_mat = [&](Eigen::MatrixXd& m) {
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j) m(i, j) = theta[off++];
        }
    };
    auto get_vec = [&](Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i) v[i] = theta[off++];
    };
    get_mat(W1_);
    get_vec(b1_);
    get_mat(W2_);
    get_vec(b2_);
    get_mat(W3_);
    get_vec(b3_);
    get_mat(W4_);
    get_vec(b4_);
}

namespace {
constexpr char kMagic[4] = {'N', 'N', 'C', 'N'};
constexpr uint32_t kVersion = 1;
} // namespace

void ClosureNet::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("ClosureNet::save: cannot open " + path);
    out.write(kMagic, 4);
    auto put_u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    put_u32(kVersion);
    put_u32(static_cast<uint32_t>(width1()));
    put_u32(static_cast<uint32_t>(width2()));
    out.write(reinterpret_cast<const char*>(z_min_.data()), sizeof(z_min_));
    out.write(reinterpret_cast<const char*>(z_max_.data()), sizeof(z_max_));
    const Eigen::VectorXd theta = flatten();
    out.write(reinterpret_cast<const char*>(theta.data()),
              static_cast<std::streamsize>(theta.size() * sizeof(double)));
}

ClosureNet ClosureNet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("ClosureNet::load: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw ConfigError("ClosureNet::load: bad magic in " + path);
    }
    auto get_u32 = [&]() {
        uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    const uint32_t version = get_u32();
    if (version != kVersion) {
        throw ConfigError("ClosureNet::load: unsupported version " + std::to_string(version));
    }
    const int w1 = static_cast<int>(get_u32());
    const int w2 = static_cast<int>(get_u32());
    ClosureNet net = create(w1, w2, 0);
    in.read(reinterpret_cast<char*>(net.z_min_.data()), sizeof(net.z_min_));
    in.read(reinterpret_cast<char*>(net.z_max_.data()), sizeof(net.z_max_));
    Eigen::VectorXd theta(net.n_params());
    in.read(reinterpret_cast<char*>(theta.data()),
            static_cast<std::streamsize>(theta.size() * sizeof(double)));
    if (!in) throw ConfigError("ClosureNet::load: truncated file " + path);
    net.unflatten(theta);
    return net;
}

} // namespace nnpde
