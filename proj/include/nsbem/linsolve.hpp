#pragma once

#include "nsbem/assembly.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace nsbem {

/// Factorization hit a zero pivot or the residual check failed.
class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-node potential and normal derivative after a solve.
struct Solution {
    std::vector<double> phi;
    std::vector<double> q;
    std::string gauge;          // non-empty when phi was pinned (pure Neumann)
    double residual = 0.0;      // ||A x - b|| / max(||b||, ||A|| ||x||)
};

/// LU with partial pivoting on a raw square system; verifies the residual.
Eigen::VectorXd solve_dense(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs,
                            double residual_tolerance = 1e-10);

/// Solves an assembled system and scatters the unknowns back to nodes. A
/// system flagged `needs_gauge` has row 0 replaced by phi(node 0) = 0.
Solution solve_dense(const DenseSystem& system, double residual_tolerance = 1e-10);

}  // namespace nsbem
