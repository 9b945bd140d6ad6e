#include "nnpde/grid.hpp"
#include "nnpde/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace nnpde {

Grid1D uniform_grid(int n) {
    if (n < 3) {
        throw std::invalid_argument("uniform_grid: need n >= 3 nodes, got " + std::to_string(n));
    }
    Grid1D g;
    g.n = n;
    g.spacing = 1.0 / (n - 1);
    g.nodes.resize(n);
    g.quad_weights.assign(n, g.spacing);
    for (int i = 0; i < n; ++i) {
        g.nodes[i] = i * g.spacing;
    }
    g.nodes.front() = 0.0;
    g.nodes.back() = 1.0;
    g.quad_weights.front() = 0.5 * g.spacing;
    g.quad_weights.back() = 0.5 * g.spacing;
    g.interior.resize(n - 2);
    for (int i = 1; i < n - 1; ++i) {
        g.interior[i - 1] = i;
    }
    return g;
}

Grid2D uniform_grid_2d(int nx, int ny) {
    Grid2D g;
    g.gx = uniform_grid(nx);
    g.gy = uniform_grid(ny);
    g.quad_weights.resize(static_cast<size_t>(nx) * ny);
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            g.quad_weights[g.index(ix, iy)] = g.gx.quad_weights[ix] * g.gy.quad_weights[iy];
        }
    }
    g.interior.reserve(static_cast<size_t>(nx - 2) * (ny - 2));
    for (int ix = 1; ix < nx - 1; ++ix) {
        for (int iy = 1; iy < ny - 1; ++iy) {
            g.interior.push_back(g.index(ix, iy));
        }
    }
    return g;
}

ChannelGrid channel_grid(int n_y, double delta, double eta) {
    if (n_y < 2) {
        throw std::invalid_argument("channel_grid: need n_y >= 2 cells");
    }
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::invalid_argument("channel_grid: eta must lie in (0,1)");
    }
    if (delta <= 0.0) {
        throw std::invalid_argument("channel_grid: delta must be positive");
    }
    ChannelGrid g;
    g.n_y = n_y;
    g.delta = delta;
    g.eta = eta;
    g.faces.resize(n_y + 1);
    const double norm = std::sin(eta * std::numbers::pi / 2.0);
    for (int j = 0; j <= n_y; ++j) {
        // uniform parameter in [-1, 1]; exact endpoints and midpoint
        const double s = -1.0 + 2.0 * j / n_y;
        g.faces[j] = delta * std::sin(eta * std::numbers::pi * s / 2.0) / norm;
    }
    // enforce exact antisymmetry (sin is odd; kill residual round-off)
    for (int j = 0; j <= n_y / 2; ++j) {
        const double v = 0.5 * (g.faces[n_y - j] - g.faces[j]);
        g.faces[j] = -v;
        g.faces[n_y - j] = v;
    }
    g.centers.resize(n_y);
    for (int j = 0; j < n_y; ++j) {
        g.centers[j] = 0.5 * (g.faces[j] + g.faces[j + 1]);
    }
    return g;
}

namespace {

void check_size(size_t have, size_t want, const char* who) {
    if (have != want) {
        throw std::invalid_argument(std::string(who) + ": field size " + std::to_string(have) +
                                    " does not match grid size " + std::to_string(want));
    }
}

} // namespace

double integrate(const Field& f, const Grid1D& g) {
    check_size(f.size(), static_cast<size_t>(g.n), "integrate");
    double sum = 0.0;
    for (int i = 0; i < g.n; ++i) {
        sum += g.quad_weights[i] * f[i];
    }
    return sum;
}

double integrate(const Field& f, const Grid2D& g) {
    check_size(f.size(), static_cast<size_t>(g.size()), "integrate");
    double sum = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        sum += g.quad_weights[i] * f[i];
    }
    return sum;
}

double inner(const Field& a, const Field& b, const std::vector<double>& quad) {
    if (a.size() != b.size() || a.size() != quad.size()) {
        throw std::invalid_argument("inner: size mismatch");
    }
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        sum += quad[i] * a[i] * b[i];
    }
    return sum;
}

double l2_norm(const Field& f, const std::vector<double>& quad) {
    return std::sqrt(inner(f, f, quad));
}

double h1_seminorm(const Field& f, const Grid1D& g) {
    check_size(f.size(), static_cast<size_t>(g.n), "h1_seminorm");
    double sum = 0.0;
    for (int i = 0; i + 1 < g.n; ++i) {
        const double d = (f[i + 1] - f[i]) / g.spacing;
        sum += g.spacing * d * d;
    }
    return std::sqrt(sum);
}

double h1_seminorm(const Field& f, const Grid2D& g) {
    check_size(f.size(), static_cast<size_t>(g.size()), "h1_seminorm");
    const int nx = g.nx();
    const int ny = g.ny();
    const double hx = g.gx.spacing;
    const double hy = g.gy.spacing;
    double sum = 0.0;
    for (int ix = 0; ix + 1 < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const double d = (f[g.index(ix + 1, iy)] - f[g.index(ix, iy)]) / hx;
            sum += hx * g.gy.quad_weights[iy] * d * d;
        }
    }
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy + 1 < ny; ++iy) {
            const double d = (f[g.index(ix, iy + 1)] - f[g.index(ix, iy)]) / hy;
            sum += hy * g.gx.quad_weights[ix] * d * d;
        }
    }
    return std::sqrt(sum);
}

double h1_norm(const Field& f, const Grid1D& g) {
    const double semi = h1_seminorm(f, g);
    const double l2 = l2_norm(f, g.quad_weights);
    return std::sqrt(semi * semi + l2 * l2);
}

double h1_norm(const Field& f, const Grid2D& g) {
    const double semi = h1_seminorm(f, g);
    const double l2 = l2_norm(f, g.quad_weights);
    return std::sqrt(semi * semi + l2 * l2);
}

void save_grid_csv(const std::string& path, const Grid1D& g) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("save_grid_csv: cannot open " + path);
    }
    out << "x\n";
    for (double x : g.nodes) {
        out << x << "\n";
    }
}

void save_grid_csv(const std::string& path, const ChannelGrid& g) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("save_grid_csv: cannot open " + path);
    }
    out << "y\n";
    for (double y : g.faces) {
        out << y << "\n";
    }
}

} // namespace nnpde
