#include "nsbem/linsolve.hpp"

#include <doctest.h>

#include <random>

using namespace nsbem;

TEST_CASE("identity and diagonal systems") {
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
    CHECK((solve_dense(Eigen::MatrixXd::Identity(5, 5), b) - b).norm() == 0.0);
    Eigen::MatrixXd a(2, 2);
    a << 2, 0, 0, 4;
    const Eigen::VectorXd x = solve_dense(a, Eigen::Vector2d(2, 8));
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(2.0));
}

TEST_CASE("random well-conditioned 200 x 200 system") {
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd a(200, 200);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    a += 20.0 * Eigen::MatrixXd::Identity(200, 200);
    Eigen::VectorXd b(200);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = u(rng);
    const Eigen::VectorXd x = solve_dense(a, b);
    CHECK((a * x - b).norm() / b.norm() <= 1e-10);
    // deterministic
    CHECK((solve_dense(a, b).array() == x.array()).all());
}

TEST_CASE("singular and malformed systems are reported") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);
    try {
        solve_dense(a, Eigen::Vector3d(1, 2, 3));
        FAIL("expected SolveError");
    } catch (const SolveError& e) {
        CHECK(std::string(e.what()).find("pivot") != std::string::npos);
    }
    CHECK_THROWS_AS(solve_dense(Eigen::MatrixXd::Identity(3, 2), Eigen::Vector3d(1, 2, 3)), SolveError);
    Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
    nan(0, 1) = std::nan("");
    CHECK_THROWS_AS(solve_dense(nan, Eigen::Vector2d(1, 1)), SolveError);
}

TEST_CASE("unknowns scatter back to phi and q by boundary condition kind") {
    DenseSystem sys;
    sys.matrix = Eigen::MatrixXd::Identity(3, 3) * 2.0;
    sys.rhs = Eigen::Vector3d(2, 4, 6);
    sys.bcs.kind = {BcKind::Dirichlet, BcKind::Neumann, BcKind::Dirichlet};
    sys.bcs.value = {10, 20, 30};
    const Solution s = solve_dense(sys);
    CHECK(s.phi == std::vector<double>{10, 2, 30});
    CHECK(s.q == std::vector<double>{1, 20, 3});
    CHECK(s.gauge.empty());
    CHECK(s.residual < 1e-15);
}

TEST_CASE("pure Neumann systems get a gauge") {
    DenseSystem sys;
    sys.matrix.resize(2, 2);
    sys.matrix << 1, -1, -1, 1;
    sys.rhs = Eigen::Vector2d(-1, 1);
    sys.bcs = BoundaryConditions::neumann({0.0, 0.0});
    CHECK_THROWS_AS(solve_dense(sys), SolveError);
    sys.needs_gauge = true;
    const Solution s = solve_dense(sys);
    CHECK(s.phi[0] == 0.0);
    CHECK(s.phi[1] == doctest::Approx(1.0));
    CHECK_FALSE(s.gauge.empty());
}
