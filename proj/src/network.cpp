#include "nnpde/network.hpp"
#include "nnpde/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace nnpde {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return 0.0;
}

double activate_deriv(Activation a, double x) {
    switch (a) {
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
    }
    return 0.0;
}

const char* activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "sigmoid";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation: " + name);
}

InitDistribution InitDistribution::iid(uint64_t seed, double c_halfwidth, double w_stddev,
                                       double eta_stddev) {
    InitDistribution d;
    d.kind = Kind::IID;
    d.seed = seed;
    d.c_halfwidth = c_halfwidth;
    d.w_stddev = w_stddev;
    d.eta_stddev = eta_stddev;
    return d;
}

InitDistribution InitDistribution::point_mass(double c, double w, double eta) {
    InitDistribution d;
    d.kind = Kind::PointMass;
    d.c_atom = c;
    d.w_atom = w;
    d.eta_atom = eta;
    return d;
}

double ParamSet::scale() const {
    return std::pow(static_cast<double>(n_hidden), -beta);
}

double ParamGrad::squared_norm() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    for (double v : w) s += v * v;
    for (double v : eta) s += v * v;
    return s;
}

ParamSet init(int n_hidden, int dim, double beta, Activation act, const InitDistribution& dist) {
    if (n_hidden < 1) {
        throw std::invalid_argument("init: n_hidden must be >= 1");
    }
    if (dim < 1 || dim > 2) {
        throw std::invalid_argument("init: dim must be 1 or 2");
    }
    if (!(beta > 0.5 && beta < 1.0)) {
        throw std::invalid_argument("init: beta must lie strictly inside (1/2, 1)");
    }
    ParamSet p;
    p.n_hidden = n_hidden;
    p.dim = dim;
    p.beta = beta;
    p.act = act;
    p.c.resize(n_hidden);
    p.w.resize(static_cast<size_t>(n_hidden) * dim);
    p.eta.resize(n_hidden);

    if (dist.kind == InitDistribution::Kind::PointMass) {
        std::fill(p.c.begin(), p.c.end(), dist.c_atom);
        std::fill(p.w.begin(), p.w.end(), dist.w_atom);
        std::fill(p.eta.begin(), p.eta.end(), dist.eta_atom);
        return p;
    }

    std::mt19937_64 rng(dist.seed);
    std::uniform_real_distribution<double> c_law(-dist.c_halfwidth, dist.c_halfwidth);
    std::normal_distribution<double> w_law(0.0, dist.w_stddev);
    std::normal_distribution<double> eta_law(0.0, dist.eta_stddev);
    for (int i = 0; i < n_hidden; ++i) {
        p.c[i] = c_law(rng);
        for (int j = 0; j < dim; ++j) {
            p.w[static_cast<size_t>(i) * dim + j] = w_law(rng);
        }
        p.eta[i] = eta_law(rng);
    }
    return p;
}

namespace {

// Block size for unit-batched evaluation; bounds the n-by-block scratch.
constexpr int kUnitBlock = 2048;

Eigen::MatrixXd node_coords(const Grid1D& g) {
    Eigen::MatrixXd X(g.n, 1);
    for (int i = 0; i < g.n; ++i) X(i, 0) = g.nodes[i];
    return X;
}

Eigen::MatrixXd node_coords(const Grid2D& g) {
    Eigen::MatrixXd X(g.size(), 2);
    for (int idx = 0; idx < g.size(); ++idx) {
        X(idx, 0) = g.node_x(idx);
        X(idx, 1) = g.node_y(idx);
    }
    return X;
}

// sigma and sigma' over a whole block; sigmoid goes through tanh so both
// activations use one vectorized transcendental and get the derivative free
void apply_activation(Activation act, Eigen::MatrixXd& pre) {
    if (act == Activation::Tanh) {
        pre = pre.array().tanh();
    } else {
        pre = 0.5 * (1.0 + (0.5 * pre.array()).tanh());
    }
}

Eigen::MatrixXd activation_deriv_from_value(Activation act, const Eigen::MatrixXd& S) {
    if (act == Activation::Tanh) {
        return 1.0 - S.array().square();
    }
    return S.array() * (1.0 - S.array());
}

Field forward_impl(const ParamSet& p, const Eigen::MatrixXd& X) {
    if (p.dim != X.cols()) {
        throw std::invalid_argument("forward: grid dimension does not match network dim");
    }
    const int n = static_cast<int>(X.rows());
    const int N = p.n_hidden;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int b0 = 0; b0 < N; b0 += kUnitBlock) {
        const int nb = std::min(kUnitBlock, N - b0);
        Eigen::MatrixXd W(nb, p.dim);
        Eigen::VectorXd cb(nb), etab(nb);
        for (int i = 0; i < nb; ++i) {
            cb[i] = p.c[b0 + i];
            etab[i] = p.eta[b0 + i];
            for (int j = 0; j < p.dim; ++j) {
                W(i, j) = p.w[static_cast<size_t>(b0 + i) * p.dim + j];
            }
        }
        Eigen::MatrixXd pre = X * W.transpose();
        pre.rowwise() += etab.transpose();
        apply_activation(p.act, pre);
        out.noalias() += pre * cb;
    }
    out *= p.scale();
    return Field(out.data(), out.data() + n);
}

ParamGrad grads_impl(const ParamSet& p, const Eigen::MatrixXd& X,
                     const std::vector<double>& quad, const Field& u_hat) {
    if (p.dim != X.cols()) {
        throw std::invalid_argument("param_grads: grid dimension does not match network dim");
    }
    if (u_hat.size() != static_cast<size_t>(X.rows()) || quad.size() != u_hat.size()) {
        throw std::invalid_argument("param_grads: field size mismatch");
    }
    const int n = static_cast<int>(X.rows());
    const int N = p.n_hidden;
    const double scale = p.scale();

    Eigen::VectorXd v(n); // quadrature-weighted adjoint
    for (int r = 0; r < n; ++r) v[r] = quad[r] * u_hat[r];
    Eigen::MatrixXd vx(n, p.dim); // v scaled by each coordinate
    for (int j = 0; j < p.dim; ++j) vx.col(j) = v.cwiseProduct(X.col(j));

    ParamGrad g;
    g.c.resize(N);
    g.w.resize(static_cast<size_t>(N) * p.dim);
    g.eta.resize(N);

    for (int b0 = 0; b0 < N; b0 += kUnitBlock) {
        const int nb = std::min(kUnitBlock, N - b0);
        Eigen::MatrixXd W(nb, p.dim);
        Eigen::VectorXd etab(nb);
        for (int i = 0; i < nb; ++i) {
            etab[i] = p.eta[b0 + i];
            for (int j = 0; j < p.dim; ++j) {
                W(i, j) = p.w[static_cast<size_t>(b0 + i) * p.dim + j];
            }
        }
        Eigen::MatrixXd pre = X * W.transpose();
        pre.rowwise() += etab.transpose();
        apply_activation(p.act, pre);
        const Eigen::MatrixXd& S = pre;
        const Eigen::MatrixXd Sp = activation_deriv_from_value(p.act, S);
        Eigen::VectorXd gc = S.transpose() * v;
        Eigen::VectorXd ge = Sp.transpose() * v;
        Eigen::MatrixXd gw = Sp.transpose() * vx; // nb x dim
        for (int i = 0; i < nb; ++i) {
            const double ci = p.c[b0 + i];
            g.c[b0 + i] = scale * gc[i];
            g.eta[b0 + i] = scale * ci * ge[i];
            for (int j = 0; j < p.dim; ++j) {
                g.w[static_cast<size_t>(b0 + i) * p.dim + j] = scale * ci * gw(i, j);
            }
        }
    }
    return g;
}

} // namespace

Field forward(const ParamSet& params, const Grid1D& grid) {
    return forward_impl(params, node_coords(grid));
}

Field forward(const ParamSet& params, const Grid2D& grid) {
    return forward_impl(params, node_coords(grid));
}

ParamGrad param_grads(const ParamSet& params, const Grid1D& grid, const Field& u_hat) {
    return grads_impl(params, node_coords(grid), grid.quad_weights, u_hat);
}

ParamGrad param_grads(const ParamSet& params, const Grid2D& grid, const Field& u_hat) {
    return grads_impl(params, node_coords(grid), grid.quad_weights, u_hat);
}

double measure_pair(const ParamSet& params, const TestFunction& f) {
    double sum = 0.0;
    for (int i = 0; i < params.n_hidden; ++i) {
        sum += f(params.c[i], &params.w[static_cast<size_t>(i) * params.dim], params.dim,
                 params.eta[i]);
    }
    return sum / params.n_hidden;
}

void save_checkpoint(const ParamSet& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("save_checkpoint: cannot open " + path);
    }
    char buf[64];
    auto put = [&](double x, char sep) {
        std::snprintf(buf, sizeof(buf), "%.17g%c", x, sep);
        out << buf;
    };
    out << p.n_hidden << "," << p.dim << ",";
    put(p.beta, ',');
    out << activation_name(p.act) << "\n";
    for (int i = 0; i < p.n_hidden; ++i) {
        put(p.c[i], ',');
        for (int j = 0; j < p.dim; ++j) {
            put(p.w[static_cast<size_t>(i) * p.dim + j], ',');
        }
        put(p.eta[i], '\n');
    }
}

ParamSet load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("load_checkpoint: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("load_checkpoint: empty file " + path);
    }
    std::istringstream header(line);
    std::string tok;
    ParamSet p;
    std::getline(header, tok, ',');
    p.n_hidden = std::stoi(tok);
    std::getline(header, tok, ',');
    p.dim = std::stoi(tok);
    std::getline(header, tok, ',');
    p.beta = std::stod(tok);
    std::getline(header, tok, ',');
    p.act = activation_from_name(tok);

    p.c.resize(p.n_hidden);
    p.w.resize(static_cast<size_t>(p.n_hidden) * p.dim);
    p.eta.resize(p.n_hidden);
    for (int i = 0; i < p.n_hidden; ++i) {
        if (!std::getline(in, line)) {
            throw ConfigError("load_checkpoint: truncated file " + path);
        }
        std::istringstream row(line);
        std::getline(row, tok, ',');
        p.c[i] = std::stod(tok);
        for (int j = 0; j < p.dim; ++j) {
            std::getline(row, tok, ',');
            p.w[static_cast<size_t>(i) * p.dim + j] = std::stod(tok);
        }
        std::getline(row, tok, ',');
        p.eta[i] = std::stod(tok);
    }
    return p;
}

} // namespace nnpde
