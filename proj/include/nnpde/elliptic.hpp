/// @file elliptic.hpp
/// @brief Discrete elliptic operator A = -mu*Laplacian + I with homogeneous
///        Dirichlet conditions, plus cached direct solves.
///
/// The operator acts on interior nodes only; Dirichlet rows are eliminated.
/// A is symmetric positive definite by construction, so the adjoint solve is
/// the same factorized solve. solve_adjoint is kept as a separate entry point
/// so call sites show which PDE they are solving.
#pragma once

#include "nnpde/grid.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace nnpde {

class DiscreteOperator {
public:
    /// Empty operator; assign from assemble() before use.
    DiscreteOperator() = default;

    /// 3-point (1D) second-order stencil on interior nodes. mu > 0.
    static DiscreteOperator assemble(const Grid1D& grid, double mu);
    /// 5-point (2D) second-order stencil on interior nodes. mu > 0.
    static DiscreteOperator assemble(const Grid2D& grid, double mu);

    /// Solve A u = rhs. rhs is sampled on the full grid; only interior values
    /// enter. Returns a full-grid field with zero boundary values.
    Field solve(const Field& rhs) const;

    /// Adjoint solve; identical to solve because A is self-adjoint.
    Field solve_adjoint(const Field& rhs) const;

    /// Apply A to an interior-supported full-grid field. Output boundary
    /// entries are zero.
    Field apply(const Field& u) const;

    int dim() const { return dim_; }
    double mu() const { return mu_; }
    int full_size() const { return full_size_; }
    const std::vector<int>& interior() const { return interior_; }
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

private:
    void factorize();

    int dim_ = 0;
    double mu_ = 0.0;
    int full_size_ = 0;
    std::vector<int> interior_;
    Eigen::SparseMatrix<double> matrix_;
    // shared_ptr keeps the operator copyable; the factorization is immutable
    // after assembly and its solve() is safe to call concurrently
    std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

} // namespace nnpde
