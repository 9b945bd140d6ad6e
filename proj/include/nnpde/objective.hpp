/// @file objective.hpp
/// @brief Cosine moment bases, the weak (moment-mismatch) and strong (L2)
///        objectives, and their adjoint right-hand sides.
#pragma once

#include "nnpde/grid.hpp"

#include <string>
#include <vector>

namespace nnpde {

enum class ObjectiveMode { Weak, Strong };

const char* objective_mode_name(ObjectiveMode m);
ObjectiveMode objective_mode_from_name(const std::string& name);

/// Moment functions sampled on a grid, orthonormal in the quadrature inner
/// product, together with that quadrature.
struct MomentBasis {
    int L = 0;
    std::vector<Field> m;
    std::vector<double> quad;
};

/// m_0 = 1, m_l = sqrt(2) cos(l pi x) for l >= 1.
MomentBasis cosine_basis_1d(const Grid1D& grid, int L = 10);

/// Tensor products of the 1D basis, Lx*Ly functions total, ordered lx-major.
MomentBasis cosine_basis_2d(const Grid2D& grid, int Lx = 10, int Ly = 10);

/// Moment residual r_l = <u - h, m_l>_quad.
std::vector<double> moment_residual(const Field& u, const Field& h, const MomentBasis& basis);

/// Weak: (1/2) sum_l r_l^2.  Strong: (1/2) ||u - h||^2_quad.
double objective(const Field& u, const Field& h, const MomentBasis& basis, ObjectiveMode mode);

/// Right-hand side of the adjoint PDE; the quadrature gradient of the
/// objective with respect to u.
/// Weak: sum_l r_l m_l(x).  Strong: u(x) - h(x).
Field adjoint_rhs(const Field& u, const Field& h, const MomentBasis& basis, ObjectiveMode mode);

/// Built-in 1D target (1-x) x^5 + x (1-x)^5, a symmetric quintic bump.
Field quintic_bump_target(const Grid1D& grid);

/// Built-in 2D target (x - x^2)(y - y^2).
Field parabolic_bump_target(const Grid2D& grid);

/// Load a target from CSV with lines "coordinate,value" (1D) or
/// "x,y,value" (2D); a header line is skipped if present. The values must
/// cover every grid node in grid ordering.
Field load_field_csv(const std::string& path, size_t expected_size);

/// Write "coordinate(s),value" rows.
void save_field_csv(const std::string& path, const Field& f, const Grid1D& grid);
void save_field_csv(const std::string& path, const Field& f, const Grid2D& grid);

} // namespace nnpde
