#pragma once

#include "ttda/dense_tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ttda {

/// A p x q matrix with orthonormal columns (p >= q). The checked constructor
/// enforces feasibility at entry; every retraction maintains it.
struct StiefelPoint {
    Matrix x;

    explicit StiefelPoint(Matrix m, double tol = 1e-8);
};

/// max |X^T X - I|
double feasibility_error(const Matrix& x);

struct SolverConfig {
    int max_iter = 500;
    double grad_tol = 1e-6;
    double step_init = 1e-3;
    double sufficient_decrease = 1e-4;  ///< Armijo constant against the window max
    double backtrack = 0.5;
    int nonmonotone_window = 5;
    int max_backtracks = 30;
    std::uint64_t seed = 0;  ///< reserved; the solve itself is deterministic
};

/// value = vec(X)^T A vec(X) and the Euclidean gradient reshape(2 A vec(X)).
/// A must be symmetric; vec is column-major so it coincides with the canonical
/// vectorization of the 3-mode factor whose left unfolding X is.
std::pair<double, Matrix> quadratic_value_grad(const Matrix& a, const Matrix& x);

/// Curvilinear step X(tau) = (I + tau/2 W)^{-1} (I - tau/2 W) X with
/// W = G X^T - X G^T. For p > 2q the inverse is applied through the low-rank
/// Woodbury form (a 2q x 2q solve). Throws if the system is singular, which
/// signals a step too large.
Matrix cayley_retract(const Matrix& x, const Matrix& grad, double tau);

struct StiefelResult {
    Matrix x;
    std::vector<double> objective_trace;  ///< objective_trace[0] is the start value
    int iterations = 0;
    bool converged = false;           ///< gradient test met
    bool line_search_failed = false;  ///< stopped without sufficient decrease
    double final_grad_norm = 0.0;
    double max_feasibility_error = 0.0;  ///< worst |X^T X - I| over all iterates

    struct IterationRecord {
        int iter;
        double objective;
        double grad_norm;
        double step;
    };
    std::vector<IterationRecord> records;
};

/// Minimize vec(X)^T A vec(X) over X^T X = I by curvilinear search with
/// Barzilai-Borwein steps (BB1/BB2 alternating) and nonmonotone backtracking
/// against the max of the last nonmonotone_window objective values.
/// Terminates when the tangent-gradient norm drops below grad_tol or after
/// max_iter iterations. Deterministic given x0 and cfg.
StiefelResult minimize_on_stiefel(const Matrix& a, const StiefelPoint& x0,
                                  const SolverConfig& cfg = {});

/// CSV trace (iter, objective, gradient norm, step) for convergence plots.
void write_trace_csv(const StiefelResult& result, std::ostream& out);

}  // namespace ttda
