#include "ttda/stiefel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>
#include <ostream>
#include <stdexcept>

namespace ttda {

StiefelPoint::StiefelPoint(Matrix m, double tol) : x(std::move(m)) {
    if (x.rows() < x.cols()) throw std::invalid_argument("Stiefel point needs rows >= cols");
    if (feasibility_error(x) > tol)
        throw std::invalid_argument("Stiefel point is not feasible: columns not orthonormal");
}

double feasibility_error(const Matrix& x) {
    const Matrix gram = x.transpose() * x;
    return (gram - Matrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
}

std::pair<double, Matrix> quadratic_value_grad(const Matrix& a, const Matrix& x) {
    const Index p = x.rows();
    const Index q = x.cols();
    if (a.rows() != a.cols() || a.rows() != p * q)
        throw std::invalid_argument("quadratic matrix size does not match vec(X)");
    Eigen::Map<const Vector> v(x.data(), p * q);
    Vector av = a * v;
    const double value = v.dot(av);
    Matrix grad = 2.0 * Eigen::Map<Matrix>(av.data(), p, q);
    return {value, std::move(grad)};
}

Matrix cayley_retract(const Matrix& x, const Matrix& grad, double tau) {
    const Index p = x.rows();
    const Index q = x.cols();
    if (grad.rows() != p || grad.cols() != q)
        throw std::invalid_argument("gradient shape does not match the point");
    if (tau == 0.0) return x;

    if (p > 2 * q) {
        // W = U V^T with U = [G, X], V = [X, -G]; Woodbury turns the p x p
        // solve into a 2q x 2q one.
        Matrix u(p, 2 * q), v(p, 2 * q);
        u.leftCols(q) = grad;
        u.rightCols(q) = x;
        v.leftCols(q) = x;
        v.rightCols(q) = -grad;

        const Matrix m = Matrix::Identity(2 * q, 2 * q) + 0.5 * tau * v.transpose() * u;
        Eigen::FullPivLU<Matrix> lu(m);
        if (!lu.isInvertible()) throw std::runtime_error("cayley_retract: singular system, step too large");
        return x - tau * u * lu.solve(v.transpose() * x);
    }

    const Matrix w = grad * x.transpose() - x * grad.transpose();
    const Matrix lhs = Matrix::Identity(p, p) + 0.5 * tau * w;
    Eigen::FullPivLU<Matrix> lu(lhs);
    if (!lu.isInvertible()) throw std::runtime_error("cayley_retract: singular system, step too large");
    return lu.solve((Matrix::Identity(p, p) - 0.5 * tau * w) * x);
}

namespace {

// Tangent gradient W X = G - X G^T X for feasible X.
Matrix tangent_gradient(const Matrix& x, const Matrix& grad) {
    return grad - x * (grad.transpose() * x);
}

void repair_feasibility(Matrix& x) {
    // polar correction X <- X (X^T X)^{-1/2}
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.transpose() * x);
    const Vector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
    x = x * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

StiefelResult minimize_on_stiefel(const Matrix& a, const StiefelPoint& x0, const SolverConfig& cfg) {
    if (cfg.backtrack <= 0.0 || cfg.backtrack >= 1.0)
        throw std::invalid_argument("backtrack factor must lie in (0,1)");
    if (cfg.grad_tol <= 0.0 || cfg.step_init <= 0.0)
        throw std::invalid_argument("solver tolerances must be positive");

    const Matrix sym = 0.5 * (a + a.transpose());

    StiefelResult out;
    out.x = x0.x;
    auto [f, g] = quadratic_value_grad(sym, out.x);
    if (!std::isfinite(f)) throw std::runtime_error("non-finite objective at the starting point");
    out.objective_trace.push_back(f);
    out.max_feasibility_error = feasibility_error(out.x);

    std::deque<double> window{f};
    double tau = cfg.step_init;
    Matrix tg = tangent_gradient(out.x, g);
    double gnorm = tg.norm();

    for (int it = 1; it <= cfg.max_iter; ++it) {
        out.records.push_back({it - 1, f, gnorm, tau});
        if (gnorm <= cfg.grad_tol) {
            out.converged = true;
            break;
        }
        const double f_ref = *std::max_element(window.begin(), window.end());
        // d/dtau F(X(tau)) at 0 is -(|G|^2 - tr((X^T G)^2)) = -|W|^2/2 <= 0
        const Matrix xtg = out.x.transpose() * g;
        const double slope = -(g.squaredNorm() - (xtg * xtg).trace());

        double t = tau;
        Matrix x_new;
        double f_new = 0.0;
        bool accepted = false;
        for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
            try {
                x_new = cayley_retract(out.x, g, t);
            } catch (const std::runtime_error&) {
                t *= cfg.backtrack;
                continue;
            }
            if (feasibility_error(x_new) > 1e-12) repair_feasibility(x_new);
            f_new = quadratic_value_grad(sym, x_new).first;
            if (!std::isfinite(f_new)) throw std::runtime_error("non-finite objective during line search");
            if (f_new <= f_ref + cfg.sufficient_decrease * t * slope) {
                accepted = true;
                break;
            }
            t *= cfg.backtrack;
        }
        out.iterations = it;
        if (!accepted) {
            out.line_search_failed = true;
            std::cerr << "minimize_on_stiefel: line search failed at iteration " << it
                      << " (gradient norm " << gnorm << "); keeping current point\n";
            break;
        }

        const Matrix s = x_new - out.x;
        auto [f_next, g_next] = quadratic_value_grad(sym, x_new);
        Matrix tg_next = tangent_gradient(x_new, g_next);
        const Matrix y = tg_next - tg;

        const double sy = std::abs((s.array() * y.array()).sum());
        double bb;
        if (it % 2 == 1) {
            bb = s.squaredNorm() / sy;  // BB1
        } else {
            bb = sy / y.squaredNorm();  // BB2
        }
        tau = (std::isfinite(bb) && bb > 0.0) ? std::clamp(bb, 1e-10, 1e10) : cfg.step_init;

        out.x = std::move(x_new);
        f = f_next;
        g = std::move(g_next);
        tg = std::move(tg_next);
        gnorm = tg.norm();
        out.objective_trace.push_back(f);
        out.max_feasibility_error = std::max(out.max_feasibility_error, feasibility_error(out.x));

        window.push_back(f);
        if (static_cast<int>(window.size()) > cfg.nonmonotone_window) window.pop_front();
    }

    out.final_grad_norm = gnorm;
    return out;
}

void write_trace_csv(const StiefelResult& result, std::ostream& out) {
    out << "iter,objective,grad_norm,step\n";
    for (const auto& rec : result.records) {
        out << rec.iter << ',' << rec.objective << ',' << rec.grad_norm << ',' << rec.step << '\n';
    }
}

}  // namespace ttda
