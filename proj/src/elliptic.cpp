#include "nnpde/elliptic.hpp"
#include "nnpde/errors.hpp"

#include <cmath>

namespace nnpde {

DiscreteOperator DiscreteOperator::assemble(const Grid1D& grid, double mu) {
    if (mu <= 0.0) {
        throw std::invalid_argument("DiscreteOperator: mu must be positive");
    }
    DiscreteOperator op;
    op.dim_ = 1;
    op.mu_ = mu;
    op.full_size_ = grid.n;
    op.interior_ = grid.interior;

    const int m = static_cast<int>(op.interior_.size());
    const double h2 = grid.spacing * grid.spacing;
    const double diag = 2.0 * mu / h2 + 1.0;
    const double off = -mu / h2;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(3 * m);
    for (int r = 0; r < m; ++r) {
        trips.emplace_back(r, r, diag);
        if (r > 0) trips.emplace_back(r, r - 1, off);
        if (r + 1 < m) trips.emplace_back(r, r + 1, off);
    }
    op.matrix_.resize(m, m);
    op.matrix_.setFromTriplets(trips.begin(), trips.end());
    op.factorize();
    return op;
}

DiscreteOperator DiscreteOperator::assemble(const Grid2D& grid, double mu) {
    if (mu <= 0.0) {
        throw std::invalid_argument("DiscreteOperator: mu must be positive");
    }
    DiscreteOperator op;
    op.dim_ = 2;
    op.mu_ = mu;
    op.full_size_ = grid.size();
    op.interior_ = grid.interior;

    const int nx = grid.nx();
    const int ny = grid.ny();
    const int mx = nx - 2;
    const int my = ny - 2;
    const int m = mx * my;
    const double hx2 = grid.gx.spacing * grid.gx.spacing;
    const double hy2 = grid.gy.spacing * grid.gy.spacing;
    const double diag = 2.0 * mu / hx2 + 2.0 * mu / hy2 + 1.0;
    const double offx = -mu / hx2;
    const double offy = -mu / hy2;

    // interior_ is ordered ix-major then iy, matching Grid2D::interior;
    // row r corresponds to (ix, iy) = (1 + r / my, 1 + r % my)
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(5 * m);
    for (int r = 0; r < m; ++r) {
        const int ix = r / my;
        const int iy = r % my;
        trips.emplace_back(r, r, diag);
        if (ix > 0) trips.emplace_back(r, r - my, offx);
        if (ix + 1 < mx) trips.emplace_back(r, r + my, offx);
        if (iy > 0) trips.emplace_back(r, r - 1, offy);
        if (iy + 1 < my) trips.emplace_back(r, r + 1, offy);
    }
    op.matrix_.resize(m, m);
    op.matrix_.setFromTriplets(trips.begin(), trips.end());
    op.factorize();
    return op;
}

void DiscreteOperator::factorize() {
    llt_ = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    llt_->compute(matrix_);
    if (llt_->info() != Eigen::Success) {
        throw NumericError("DiscreteOperator: Cholesky factorization failed");
    }
}

Field DiscreteOperator::solve(const Field& rhs) const {
    if (rhs.size() != static_cast<size_t>(full_size_)) {
        throw std::invalid_argument("DiscreteOperator::solve: rhs size mismatch");
    }
    const int m = static_cast<int>(interior_.size());
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        b[r] = rhs[interior_[r]];
    }
    Eigen::VectorXd x = llt_->solve(b);
    if (llt_->info() != Eigen::Success) {
        throw NumericError("DiscreteOperator::solve: back substitution failed");
    }
    Field u(full_size_, 0.0);
    for (int r = 0; r < m; ++r) {
        u[interior_[r]] = x[r];
    }
    return u;
}

Field DiscreteOperator::solve_adjoint(const Field& rhs) const {
    // A is symmetric; the adjoint system is the same factorized solve
    return solve(rhs);
}

Field DiscreteOperator::apply(const Field& u) const {
    if (u.size() != static_cast<size_t>(full_size_)) {
        throw std::invalid_argument("DiscreteOperator::apply: field size mismatch");
    }
    const int m = static_cast<int>(interior_.size());
    Eigen::VectorXd x(m);
    for (int r = 0; r < m; ++r) {
        x[r] = u[interior_[r]];
    }
    Eigen::VectorXd y = matrix_ * x;
    Field out(full_size_, 0.0);
    for (int r = 0; r < m; ++r) {
        out[interior_[r]] = y[r];
    }
    return out;
}

} // namespace nnpde
