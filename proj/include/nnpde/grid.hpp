/// @file grid.hpp
/// @brief Uniform unit-domain grids, the stretched channel grid, and quadrature.
///
/// Fields are plain vectors of nodal values. 2D fields are stored row-major
/// over (x, y): index(ix, iy) = ix * ny + iy. All quadrature is composite
/// trapezoid, whose weights sum to the domain measure exactly.
#pragma once

#include <string>
#include <vector>

namespace nnpde {

/// A scalar function sampled on a grid.
using Field = std::vector<double>;

struct Grid1D {
    int n = 0;                        ///< node count
    double spacing = 0.0;             ///< h = 1/(n-1)
    std::vector<double> nodes;        ///< 0 = x_0 < ... < x_{n-1} = 1
    std::vector<double> quad_weights; ///< trapezoid weights, sum to 1
    std::vector<int> interior;        ///< node indices excluding both ends

    int size() const { return n; }
};

/// Tensor-product grid on [0,1]^2.
struct Grid2D {
    Grid1D gx;
    Grid1D gy;
    std::vector<double> quad_weights; ///< per node, index(ix,iy), sum to 1
    std::vector<int> interior;        ///< nodes interior in both directions

    int nx() const { return gx.n; }
    int ny() const { return gy.n; }
    int size() const { return gx.n * gy.n; }
    int index(int ix, int iy) const { return ix * gy.n + iy; }
    double node_x(int idx) const { return gx.nodes[idx / gy.n]; }
    double node_y(int idx) const { return gy.nodes[idx % gy.n]; }
};

/// Wall-normal channel grid on [-delta, delta], faces clustered at the walls
/// by y = delta * sin(eta*pi*s/2) / sin(eta*pi/2) applied to uniform s.
struct ChannelGrid {
    int n_y = 0;                  ///< cell count
    double delta = 1.0;           ///< half-height
    double eta = 0.995;           ///< stretching parameter in (0,1)
    std::vector<double> faces;    ///< n_y + 1 face coordinates
    std::vector<double> centers;  ///< n_y cell centers (face midpoints)
};

/// Build a uniform grid with n >= 3 nodes on [0,1].
Grid1D uniform_grid(int n);

/// Build the tensor product of two uniform grids on [0,1]^2.
Grid2D uniform_grid_2d(int nx, int ny);

/// Build the stretched channel grid. Requires n_y >= 2 and eta in (0,1);
/// the solver modules require n_y >= 8.
ChannelGrid channel_grid(int n_y, double delta, double eta);

/// Trapezoid approximation of the integral of a sampled field.
double integrate(const Field& f, const Grid1D& g);
double integrate(const Field& f, const Grid2D& g);

/// Weighted inner product sum_i w_i a_i b_i. Sizes must agree.
double inner(const Field& a, const Field& b, const std::vector<double>& quad);

/// sqrt(<f,f>_quad)
double l2_norm(const Field& f, const std::vector<double>& quad);

/// Discrete H^1_0 seminorm: forward differences of nodal values, boundary
/// values pinned to zero by construction of the fields this library produces.
double h1_seminorm(const Field& f, const Grid1D& g);
double h1_seminorm(const Field& f, const Grid2D& g);

/// sqrt(seminorm^2 + l2^2)
double h1_norm(const Field& f, const Grid1D& g);
double h1_norm(const Field& f, const Grid2D& g);

/// One coordinate per line, for plot tooling.
void save_grid_csv(const std::string& path, const Grid1D& g);
void save_grid_csv(const std::string& path, const ChannelGrid& g);

} // namespace nnpde
