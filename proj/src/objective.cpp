#include "nnpde/objective.hpp"
#include "nnpde/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace nnpde {

const char* objective_mode_name(ObjectiveMode m) {
    return m == ObjectiveMode::Weak ? "weak" : "strong";
}

ObjectiveMode objective_mode_from_name(const std::string& name) {
    if (name == "weak") return ObjectiveMode::Weak;
    if (name == "strong") return ObjectiveMode::Strong;
    throw std::invalid_argument("unknown objective mode: " + name);
}

MomentBasis cosine_basis_1d(const Grid1D& grid, int L) {
    if (L < 1) {
        throw std::invalid_argument("cosine_basis_1d: L must be >= 1");
    }
    MomentBasis basis;
    basis.L = L;
    basis.quad = grid.quad_weights;
    basis.m.reserve(L);
    const double root2 = std::numbers::sqrt2;
    for (int l = 0; l < L; ++l) {
        Field m(grid.n);
        for (int i = 0; i < grid.n; ++i) {
            m[i] = (l == 0) ? 1.0 : root2 * std::cos(l * std::numbers::pi * grid.nodes[i]);
        }
        basis.m.push_back(std::move(m));
    }
    return basis;
}

MomentBasis cosine_basis_2d(const Grid2D& grid, int Lx, int Ly) {
    if (Lx < 1 || Ly < 1) {
        throw std::invalid_argument("cosine_basis_2d: Lx, Ly must be >= 1");
    }
    const MomentBasis bx = cosine_basis_1d(grid.gx, Lx);
    const MomentBasis by = cosine_basis_1d(grid.gy, Ly);
    MomentBasis basis;
    basis.L = Lx * Ly;
    basis.quad = grid.quad_weights;
    basis.m.reserve(basis.L);
    for (int lx = 0; lx < Lx; ++lx) {
        for (int ly = 0; ly < Ly; ++ly) {
            Field m(grid.size());
            for (int ix = 0; ix < grid.nx(); ++ix) {
                for (int iy = 0; iy < grid.ny(); ++iy) {
                    m[grid.index(ix, iy)] = bx.m[lx][ix] * by.m[ly][iy];
                }
            }
            basis.m.push_back(std::move(m));
        }
    }
    return basis;
}

std::vector<double> moment_residual(const Field& u, const Field& h, const MomentBasis& basis) {
    if (u.size() != h.size() || u.size() != basis.quad.size()) {
        throw std::invalid_argument("moment_residual: field/basis size mismatch");
    }
    std::vector<double> r(basis.L);
    for (int l = 0; l < basis.L; ++l) {
        double s = 0.0;
        const Field& m = basis.m[l];
        for (size_t i = 0; i < u.size(); ++i) {
            s += basis.quad[i] * (u[i] - h[i]) * m[i];
        }
        r[l] = s;
    }
    return r;
}

double objective(const Field& u, const Field& h, const MomentBasis& basis, ObjectiveMode mode) {
    if (u.size() != h.size() || u.size() != basis.quad.size()) {
        throw std::invalid_argument("objective: field/basis size mismatch");
    }
    if (mode == ObjectiveMode::Strong) {
        double s = 0.0;
        for (size_t i = 0; i < u.size(); ++i) {
            const double d = u[i] - h[i];
            s += basis.quad[i] * d * d;
        }
        return 0.5 * s;
    }
    double s = 0.0;
    for (double r : moment_residual(u, h, basis)) {
        s += r * r;
    }
    return 0.5 * s;
}

Field adjoint_rhs(const Field& u, const Field& h, const MomentBasis& basis, ObjectiveMode mode) {
    if (u.size() != h.size() || u.size() != basis.quad.size()) {
        throw std::invalid_argument("adjoint_rhs: field/basis size mismatch");
    }
    Field rhs(u.size(), 0.0);
    if (mode == ObjectiveMode::Strong) {
        for (size_t i = 0; i < u.size(); ++i) {
            rhs[i] = u[i] - h[i];
        }
        return rhs;
    }
    const std::vector<double> r = moment_residual(u, h, basis);
    for (int l = 0; l < basis.L; ++l) {
        const Field& m = basis.m[l];
        for (size_t i = 0; i < rhs.size(); ++i) {
            rhs[i] += r[l] * m[i];
        }
    }
    return rhs;
}

Field quintic_bump_target(const Grid1D& grid) {
    Field h(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.nodes[i];
        const double x5 = x * x * x * x * x;
        const double y = 1.0 - x;
        const double y5 = y * y * y * y * y;
        h[i] = y * x5 + x * y5;
    }
    return h;
}

Field parabolic_bump_target(const Grid2D& grid) {
    Field h(grid.size());
    for (int idx = 0; idx < grid.size(); ++idx) {
        const double x = grid.node_x(idx);
        const double y = grid.node_y(idx);
        h[idx] = (x - x * x) * (y - y * y);
    }
    return h;
}

Field load_field_csv(const std::string& path, size_t expected_size) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("load_field_csv: cannot open " + path);
    }
    Field f;
    f.reserve(expected_size);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.find_last_of(',');
        const std::string tail = pos == std::string::npos ? line : line.substr(pos + 1);
        try {
            f.push_back(std::stod(tail));
        } catch (const std::exception&) {
            if (f.empty()) continue; // header line
            throw ConfigError("load_field_csv: bad value in " + path + ": " + line);
        }
    }
    if (f.size() != expected_size) {
        throw ConfigError("load_field_csv: " + path + " has " + std::to_string(f.size()) +
                          " values, expected " + std::to_string(expected_size));
    }
    return f;
}

namespace {

void write_row(std::ofstream& out, std::initializer_list<double> vals) {
    char buf[64];
    bool first = true;
    for (double v : vals) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        if (!first) out << ",";
        out << buf;
        first = false;
    }
    out << "\n";
}

} // namespace

void save_field_csv(const std::string& path, const Field& f, const Grid1D& grid) {
    if (f.size() != static_cast<size_t>(grid.n)) {
        throw std::invalid_argument("save_field_csv: size mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("save_field_csv: cannot open " + path);
    }
    out << "x,value\n";
    for (int i = 0; i < grid.n; ++i) {
        write_row(out, {grid.nodes[i], f[i]});
    }
}

void save_field_csv(const std::string& path, const Field& f, const Grid2D& grid) {
    if (f.size() != static_cast<size_t>(grid.size())) {
        throw std::invalid_argument("save_field_csv: size mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("save_field_csv: cannot open " + path);
    }
    out << "x,y,value\n";
    for (int idx = 0; idx < grid.size(); ++idx) {
        write_row(out, {grid.node_x(idx), grid.node_y(idx), f[idx]});
    }
}

} // namespace nnpde
