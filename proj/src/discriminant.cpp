#include "ttda/discriminant.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace ttda {

namespace {

void fix_column_signs(Matrix& u) {
    for (Index j = 0; j < u.cols(); ++j) {
        Index imax;
        u.col(j).cwiseAbs().maxCoeff(&imax);
        if (u(imax, j) < 0.0) u.col(j) = -u.col(j);
    }
}

// Unfolding with the given mode as rows: I_n x (prod of the others).
Matrix mode_unfolding(const DenseTensor& t, Index n) {
    std::vector<Index> perm{n};
    for (Index m = 0; m < t.order(); ++m) {
        if (m != n) perm.push_back(m);
    }
    const DenseTensor moved = transpose(t, perm);
    return unfold_view(moved, 1);
}

DenseTensor project_other_modes(const DenseTensor& t, const std::vector<Matrix>& subspaces, Index skip) {
    DenseTensor out = t;
    for (Index m = 0; m < t.order(); ++m) {
        if (m == skip) continue;
        out = mode_product(out, subspaces[static_cast<std::size_t>(m)], m);
    }
    return out;
}

}  // namespace

ScatterPair scatter_matrices(const LabeledTensorSet& data, double lambda) {
    data.validate(1);
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    const Index d = data.sample_size();

    Matrix s_w = Matrix::Zero(d, d);
    Matrix s_b = Matrix::Zero(d, d);
    const DenseTensor total = data.total_mean();

    for (Index c = 0; c < data.num_classes(); ++c) {
        const DenseTensor mean_c = data.class_mean(c);
        for (Index k = 0; k < data.class_size(c); ++k) {
            const Vector diff = data.sample(c, k).values() - mean_c.values();
            s_w.selfadjointView<Eigen::Lower>().rankUpdate(diff);
        }
        const Vector between = mean_c.values() - total.values();
        s_b.selfadjointView<Eigen::Lower>().rankUpdate(between, static_cast<double>(data.class_size(c)));
    }
    s_w.triangularView<Eigen::StrictlyUpper>() = s_w.transpose();
    s_b.triangularView<Eigen::StrictlyUpper>() = s_b.transpose();
    return {std::move(s_w), std::move(s_b), lambda};
}

LdaResult lda_solve(const Matrix& s, Index r) {
    if (s.rows() != s.cols()) throw std::invalid_argument("lda_solve expects a square matrix");
    if (r < 1 || r > s.rows()) throw std::invalid_argument("subspace dimension out of range");

    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

    LdaResult out;
    out.u = es.eigenvectors().leftCols(r);  // ascending order: smallest first
    out.eigenvalues = es.eigenvalues().head(r);
    fix_column_signs(out.u);
    return out;
}

LdaResult lda_solve(const ScatterPair& scatter, Index r) { return lda_solve(scatter.s(), r); }

ScatterPair mode_scatter(const LabeledTensorSet& data, const std::vector<Matrix>& subspaces,
                         Index n, double lambda) {
    data.validate(1);
    const Index n_modes = static_cast<Index>(data.sample_shape().size());
    if (n < 0 || n >= n_modes) throw std::invalid_argument("mode index out of range");
    if (static_cast<Index>(subspaces.size()) != n_modes)
        throw std::invalid_argument("one subspace per mode expected");
    for (Index m = 0; m < n_modes; ++m) {
        if (m != n && subspaces[static_cast<std::size_t>(m)].rows() != data.sample_shape()[static_cast<std::size_t>(m)])
            throw std::invalid_argument("subspace rows do not match mode size");
    }

    const Index d = data.sample_shape()[static_cast<std::size_t>(n)];
    Matrix s_w = Matrix::Zero(d, d);
    Matrix s_b = Matrix::Zero(d, d);
    const DenseTensor total = data.total_mean();
    const Shape& shape = data.sample_shape();

    for (Index c = 0; c < data.num_classes(); ++c) {
        const DenseTensor mean_c = data.class_mean(c);
        for (Index k = 0; k < data.class_size(c); ++k) {
            DenseTensor centered(shape, data.sample(c, k).values() - mean_c.values());
            const Matrix un = mode_unfolding(project_other_modes(centered, subspaces, n), n);
            s_w.selfadjointView<Eigen::Lower>().rankUpdate(un);
        }
        DenseTensor between(shape, mean_c.values() - total.values());
        const Matrix ub = mode_unfolding(project_other_modes(between, subspaces, n), n);
        s_b.selfadjointView<Eigen::Lower>().rankUpdate(ub, static_cast<double>(data.class_size(c)));
    }
    s_w.triangularView<Eigen::StrictlyUpper>() = s_w.transpose();
    s_b.triangularView<Eigen::StrictlyUpper>() = s_b.transpose();
    return {std::move(s_w), std::move(s_b), lambda};
}

MdaResult cmda(const LabeledTensorSet& data, const std::vector<Index>& ranks, double lambda,
               const CmdaConfig& cfg) {
    data.validate();
    const Index n_modes = static_cast<Index>(data.sample_shape().size());
    if (static_cast<Index>(ranks.size()) != n_modes)
        throw std::invalid_argument("one rank per mode expected");

    MdaResult out;
    out.subspaces.reserve(static_cast<std::size_t>(n_modes));
    for (Index m = 0; m < n_modes; ++m) {
        const Index dim = data.sample_shape()[static_cast<std::size_t>(m)];
        const Index r = ranks[static_cast<std::size_t>(m)];
        if (r < 1 || r > dim) throw std::invalid_argument("mode rank out of range");
        out.subspaces.push_back(Matrix::Identity(dim, r));
    }

    for (int it = 0; it < cfg.max_iter; ++it) {
        double change = 0.0;
        for (Index n = 0; n < n_modes; ++n) {
            const ScatterPair sp = mode_scatter(data, out.subspaces, n, lambda);
            const LdaResult lr = lda_solve(sp, ranks[static_cast<std::size_t>(n)]);
            Matrix& u = out.subspaces[static_cast<std::size_t>(n)];
            change = std::max(change, (lr.u - u).norm() / u.norm());
            u = lr.u;
            out.objective_trace.push_back(lr.objective());
        }
        out.iterations = it + 1;
        if (change < cfg.change_tol) break;
    }
    return out;
}

MdaResult dgtda(const LabeledTensorSet& data, const std::vector<Index>& ranks) {
    data.validate();
    const Index n_modes = static_cast<Index>(data.sample_shape().size());
    if (static_cast<Index>(ranks.size()) != n_modes)
        throw std::invalid_argument("one rank per mode expected");

    std::vector<Matrix> identities;
    for (Index m = 0; m < n_modes; ++m) {
        const Index dim = data.sample_shape()[static_cast<std::size_t>(m)];
        identities.push_back(Matrix::Identity(dim, dim));
    }

    MdaResult out;
    out.iterations = 1;
    for (Index n = 0; n < n_modes; ++n) {
        const ScatterPair sp = mode_scatter(data, identities, n, 0.0);

        // lambda_n = largest eigenvalue of S_W^{+1/2} S_B S_W^{+1/2}; a zero
        // within-scatter makes the ratio unbounded and the problem reduces to
        // the top between-class eigenvectors.
        double lambda_n = 1.0;
        if (sp.s_w.norm() > 0.0) {
            Eigen::SelfAdjointEigenSolver<Matrix> ew(sp.s_w);
            const Vector evals = ew.eigenvalues();
            const double cutoff = 1e-12 * evals.cwiseAbs().maxCoeff();
            Vector inv_sqrt = Vector::Zero(evals.size());
            for (Index i = 0; i < evals.size(); ++i) {
                if (evals(i) > cutoff) inv_sqrt(i) = 1.0 / std::sqrt(evals(i));
            }
            const Matrix w_half = ew.eigenvectors() * inv_sqrt.asDiagonal() * ew.eigenvectors().transpose();
            Eigen::SelfAdjointEigenSolver<Matrix> er(w_half * sp.s_b * w_half);
            lambda_n = er.eigenvalues().maxCoeff();
        }
        out.mode_lambdas.push_back(lambda_n);

        const LdaResult lr = lda_solve(sp.s_w - lambda_n * sp.s_b, ranks[static_cast<std::size_t>(n)]);
        out.subspaces.push_back(lr.u);
        out.objective_trace.push_back(lr.objective());
    }
    return out;
}

DenseTensor tucker_core(const DenseTensor& y, const std::vector<Matrix>& subspaces) {
    if (static_cast<Index>(subspaces.size()) != y.order())
        throw std::invalid_argument("one subspace per mode expected");
    DenseTensor out = y;
    for (Index m = 0; m < y.order(); ++m) {
        out = mode_product(out, subspaces[static_cast<std::size_t>(m)], m);
    }
    return out;
}

double between_scatter_top_sum(const LabeledTensorSet& data, Index r) {
    data.validate(1);
    const Index c_count = data.num_classes();
    const DenseTensor total = data.total_mean();

    Matrix diffs(data.sample_size(), c_count);
    for (Index c = 0; c < c_count; ++c) {
        diffs.col(c) = std::sqrt(static_cast<double>(data.class_size(c))) *
                       (data.class_mean(c).values() - total.values());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(diffs.transpose() * diffs);
    const Vector evals = es.eigenvalues();  // ascending; nonzero spectrum of S_B

    double sum = 0.0;
    const Index take = std::min(r, evals.size());
    for (Index i = 0; i < take; ++i) {
        const double v = evals(evals.size() - 1 - i);
        if (v > 0.0) sum += v;
    }
    return sum;
}

}  // namespace ttda
