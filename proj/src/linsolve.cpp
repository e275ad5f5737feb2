#include "nsbem/linsolve.hpp"

#include <fmt/format.h>

#include <cmath>

namespace nsbem {

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs, double residual_tolerance) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size())
        throw SolveError(fmt::format("system is {}x{} with {} right-hand side entries", matrix.rows(), matrix.cols(),
                                     rhs.size()));
    if (!matrix.allFinite() || !rhs.allFinite()) throw SolveError("system contains non-finite entries");
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix);
    const Eigen::MatrixXd& lu_matrix = lu.matrixLU();
    const double scale = matrix.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < lu_matrix.rows(); ++i) {
        if (!(std::abs(lu_matrix(i, i)) > 1e-14 * scale))
            throw SolveError(fmt::format("singular matrix: pivot {} is {:.3e} (unpinned Neumann nullspace or "
                                         "duplicate nodes?)",
                                         i, lu_matrix(i, i)));
    }
    Eigen::VectorXd x = lu.solve(rhs);
    const double r = (matrix * x - rhs).norm();
    const double ref = std::max(rhs.norm(), matrix.norm() * x.norm());
    if (!x.allFinite() || (ref > 0.0 && r > residual_tolerance * ref))
        throw SolveError(fmt::format("residual {:.3e} exceeds {:.1e} of {:.3e}", r, residual_tolerance, ref));
    return x;
}

Solution solve_dense(const DenseSystem& system, double residual_tolerance) {
    Eigen::MatrixXd a = system.matrix;
    Eigen::VectorXd b = system.rhs;
    Solution sol;
    if (system.needs_gauge && system.size() > 0) {
        a.row(0).setZero();
        a(0, 0) = 1.0;
        b(0) = 0.0;
        sol.gauge = "phi pinned to 0 at node 0";
    }
    const Eigen::VectorXd x = solve_dense(a, b, residual_tolerance);
    const double ref = std::max(b.norm(), a.norm() * x.norm());
    sol.residual = ref > 0.0 ? (a * x - b).norm() / ref : 0.0;
    const std::size_t n = system.size();
    sol.phi.resize(n);
    sol.q.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (system.bcs.kind[j] == BcKind::Dirichlet) {
            sol.phi[j] = system.bcs.value[j];
            sol.q[j] = x(static_cast<Eigen::Index>(j));
        } else {
            sol.phi[j] = x(static_cast<Eigen::Index>(j));
            sol.q[j] = system.bcs.value[j];
        }
    }
    return sol;
}

}  // namespace nsbem
