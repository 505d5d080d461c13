#include "ttda/ttda.hpp"

#include "ttda/tten_io.hpp"

#include <Eigen/Eigenvalues>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace ttda {

using nlohmann::json;

std::vector<BranchRange> branch_ranges(const BranchSpec& spec, Index n_modes) {
    std::vector<BranchRange> ranges;
    Index prev = 0;
    for (Index b : spec.boundaries) {
        if (b <= prev || b >= n_modes) throw std::invalid_argument("branch boundaries must be strictly increasing inside (0, N)");
        ranges.push_back({prev, b});
        prev = b;
    }
    ranges.push_back({prev, n_modes});
    return ranges;
}

namespace {

// Left partial chain as a matrix (prod_{m<n} I_m) x R_{n-1}; 1x1 for n = 0.
Matrix left_basis(const TTChain& chain, Index n) {
    if (n == 0) return Matrix::Ones(1, 1);
    const DenseTensor part = chain_contract(chain, 0, n - 1);
    const Index cols = part.shape().back();
    return Eigen::Map<const Matrix>(part.data(), part.size() / cols, cols);
}

// Right partial chain as a matrix (prod_{m>n} I_m) x (R_n * R_N).
Matrix right_basis(const TTChain& chain, Index n) {
    const Index n_modes = chain.length();
    const DenseTensor part = chain_contract(chain, n + 1, n_modes - 1);
    // (R_n, I_{n+1}, ..., I_{N-1}, R_N) -> (I modes..., R_n, R_N)
    std::vector<Index> perm;
    for (Index m = 1; m + 1 < part.order(); ++m) perm.push_back(m);
    perm.push_back(0);
    perm.push_back(part.order() - 1);
    const DenseTensor moved = transpose(part, perm);
    const Index cols = part.dim(0) * part.shape().back();
    return Eigen::Map<const Matrix>(moved.data(), moved.size() / cols, cols);
}

void check_scatter_tensor(const TTChain& chain, const DenseTensor& s_tensor) {
    const Shape dims = chain.mode_dims();
    const Index n_modes = static_cast<Index>(dims.size());
    if (s_tensor.order() != 2 * n_modes)
        throw std::invalid_argument("scatter tensor must have twice the chain's modes");
    for (Index m = 0; m < n_modes; ++m) {
        if (s_tensor.dim(m) != dims[static_cast<std::size_t>(m)] ||
            s_tensor.dim(m + n_modes) != dims[static_cast<std::size_t>(m)])
            throw std::invalid_argument("scatter tensor dims do not match the chain");
    }
}

}  // namespace

DenseTensor factor_quadratic(const TTChain& chain, const DenseTensor& s_tensor, Index n) {
    const Index n_modes = chain.length();
    if (n < 0 || n >= n_modes) throw std::invalid_argument("factor index out of range");
    if (chain.rank_left() != 1) throw std::invalid_argument("factor_quadratic expects a chain with leading rank 1");
    check_scatter_tensor(chain, s_tensor);

    const Index d_total = shape_product(chain.mode_dims());
    Eigen::Map<const Matrix> s_mat(s_tensor.data(), d_total, d_total);

    const Matrix p = left_basis(chain, n);
    const Index r_left = p.cols();
    const Index d_left = p.rows();
    const Index i_n = chain.factor(n).mode_dim();

    if (n == n_modes - 1) {
        // columns (r_{N-1}, j_N): P column r placed at row offset d_left * j_N
        const Index cols = r_left * i_n;
        Matrix phi = Matrix::Zero(d_total, cols);
        for (Index j = 0; j < i_n; ++j) {
            for (Index r = 0; r < r_left; ++r) {
                phi.col(r + r_left * j).segment(d_left * j, d_left) = p.col(r);
            }
        }
        const Matrix a = phi.transpose() * (s_mat * phi);
        return DenseTensor({r_left, i_n, r_left, i_n}, Eigen::Map<const Vector>(a.data(), a.size()));
    }

    const Matrix q = right_basis(chain, n);
    const Index r_right = chain.factor(n).rank_right();
    const Index r_feat = chain.rank_right();
    const Index d_right = q.rows();

    // phi[(i_<, i_n, i_>), (r_{n-1}, j_n, (r_n, r_N))] = P(i_<, r_{n-1}) delta(i_n, j_n) Q(i_>, (r_n, r_N))
    const Index block = r_left * i_n;
    Matrix phi = Matrix::Zero(d_total, block * r_right * r_feat);
    for (Index cq = 0; cq < r_right * r_feat; ++cq) {
        for (Index j = 0; j < i_n; ++j) {
            for (Index r = 0; r < r_left; ++r) {
                auto col = phi.col(r + r_left * j + block * cq);
                for (Index iz = 0; iz < d_right; ++iz) {
                    col.segment(d_left * (j + i_n * iz), d_left) = q(iz, cq) * p.col(r);
                }
            }
        }
    }

    const Matrix g = phi.transpose() * (s_mat * phi);
    const Index b = block * r_right;
    Matrix a = Matrix::Zero(b, b);
    for (Index k = 0; k < r_feat; ++k) a += g.block(k * b, k * b, b, b);
    return DenseTensor({r_left, i_n, r_right, r_left, i_n, r_right},
                       Eigen::Map<const Vector>(a.data(), a.size()));
}

namespace {

TTChain init_chain_from_mean(const LabeledTensorSet& data, const std::vector<Index>& ranks) {
    return tt_svd(data.total_mean(), ranks);
}

double normalized_factor_change(const TTChain& now, const std::vector<DenseTensor>& before) {
    double change = 0.0;
    for (Index n = 0; n < now.length(); ++n) {
        const Vector& a = now.factor(n).core.values();
        const Vector& b = before[static_cast<std::size_t>(n)].values();
        change = std::max(change, (a - b).norm() / b.norm());
    }
    return change;
}

void check_lower_bound(double objective, double bound) {
    const double slack = 1e-6 * std::max(1.0, std::abs(bound)) + 1e-9;
    if (objective < bound - slack)
        throw std::logic_error("objective fell below the between-class spectral bound");
}

}  // namespace

namespace {

struct SweepResult {
    TTChain chain;
    std::vector<double> trace;
    int iterations = 0;
    bool degenerate = false;
};

// Alternating factor optimization of tr(U^T S U) for a fixed scatter matrix.
// `data_scale` is the squared data norm behind S, used to recognize a
// degenerate (zero up to rounding) scatter.
SweepResult ttda_sweep(const Matrix& s, const Shape& shape, TTChain chain, double lower_bound,
                       double data_scale, const TTFitConfig& cfg) {
    const Index n_modes = static_cast<Index>(shape.size());
    SweepResult out{std::move(chain), {}, 0, false};

    if (s.norm() <= 1e-20 * std::max(data_scale, 1e-300)) {
        std::cerr << "ttda_fit: degenerate (zero) scatter, keeping the initial factors\n";
        out.degenerate = true;
        out.trace.push_back(0.0);
        return out;
    }

    Shape s_shape(shape);
    s_shape.insert(s_shape.end(), shape.begin(), shape.end());
    const DenseTensor s_tensor(s_shape, Eigen::Map<const Vector>(s.data(), s.size()));

    std::ofstream stiefel_trace;
    if (!cfg.stiefel_trace_path.empty()) {
        stiefel_trace.open(cfg.stiefel_trace_path, std::ios::app);
        if (!stiefel_trace) throw std::runtime_error("cannot open stiefel trace file");
    }

    {
        const Matrix u0 = subspace_matrix(out.chain);
        out.trace.push_back((u0.transpose() * s * u0).trace());
        check_lower_bound(out.trace.back(), lower_bound);
    }

    std::vector<DenseTensor> prev;
    for (const auto& f : out.chain.factors()) prev.push_back(f.core);

    for (int it = 1; it <= cfg.max_iter; ++it) {
        for (Index n = 0; n + 1 < n_modes; ++n) {
            const DenseTensor a6 = factor_quadratic(out.chain, s_tensor, n);
            TTFactor& factor = out.chain.factor(n);
            const Index rows = factor.rank_left() * factor.mode_dim();
            const Index cols = factor.rank_right();
            Eigen::Map<const Matrix> a_mat(a6.data(), rows * cols, rows * cols);
            Eigen::Map<const Matrix> x0(factor.core.data(), rows, cols);

            const StiefelResult sr = minimize_on_stiefel(a_mat, StiefelPoint(x0), cfg.stiefel);
            if (stiefel_trace.is_open()) write_trace_csv(sr, stiefel_trace);
            factor.core = DenseTensor({factor.rank_left(), factor.mode_dim(), cols},
                                      Eigen::Map<const Vector>(sr.x.data(), sr.x.size()));
            factor.left_orthogonal = true;
            out.trace.push_back(sr.objective_trace.back());
            check_lower_bound(out.trace.back(), lower_bound);
        }

        {
            const DenseTensor a4 = factor_quadratic(out.chain, s_tensor, n_modes - 1);
            TTFactor& factor = out.chain.factor(n_modes - 1);
            const Index rows = factor.rank_left() * factor.mode_dim();
            Eigen::Map<const Matrix> a_mat(a4.data(), rows, rows);
            const LdaResult lr = lda_solve(a_mat, factor.rank_right());
            factor.core = DenseTensor({factor.rank_left(), factor.mode_dim(), factor.rank_right()},
                                      Eigen::Map<const Vector>(lr.u.data(), lr.u.size()));
            factor.left_orthogonal = true;
            out.trace.push_back(lr.objective());
            check_lower_bound(out.trace.back(), lower_bound);
        }

        out.iterations = it;
        const double change = normalized_factor_change(out.chain, prev);
        prev.clear();
        for (const auto& f : out.chain.factors()) prev.push_back(f.core);
        if (change < cfg.factor_change_tol) break;
    }
    return out;
}

}  // namespace

TTDAResult ttda_fit(const LabeledTensorSet& data, const std::vector<Index>& ranks,
                    double lambda, const TTFitConfig& cfg) {
    data.validate();
    const Shape shape = data.sample_shape();
    if (static_cast<Index>(ranks.size()) != static_cast<Index>(shape.size()))
        throw std::invalid_argument("ttda_fit expects one rank per mode");
    if (data.sample_size() > cfg.scatter_dim_limit)
        throw std::invalid_argument("vectorized dimension exceeds the scatter materialization limit");

    TTChain init = init_chain_from_mean(data, ranks);
    const Index r_feat = init.rank_right();
    const double lower_bound = -lambda * between_scatter_top_sum(data, r_feat);

    double data_scale = 0.0;
    for (Index c = 0; c < data.num_classes(); ++c) {
        for (Index k = 0; k < data.class_size(c); ++k) data_scale += data.sample(c, k).values().squaredNorm();
    }

    const ScatterPair scatter = scatter_matrices(data, lambda);
    SweepResult sweep = ttda_sweep(scatter.s(), shape, std::move(init), lower_bound, data_scale, cfg);

    TTDAResult out;
    out.chain = std::move(sweep.chain);
    out.objective_trace = std::move(sweep.trace);
    out.iterations = sweep.iterations;
    out.degenerate_scatter = sweep.degenerate;
    out.lower_bound = lower_bound;
    out.subspace = subspace_matrix(out.chain);
    for (Index c = 0; c < data.num_classes(); ++c) {
        for (Index k = 0; k < data.class_size(c); ++k) {
            out.cores.push_back(project(out.subspace, data.sample(c, k)));
            out.core_labels.push_back(static_cast<int>(c));
        }
    }
    return out;
}

BranchSpec select_branch_points(const Shape& shape, Index branch_count) {
    const Index n_modes = static_cast<Index>(shape.size());
    if (branch_count < 1 || branch_count > n_modes)
        throw std::invalid_argument("branch count must lie in [1, N]");
    if (branch_count == 1) return {};

    if (branch_count == 2) {
        Index best_d = 1;
        double best = -1.0;
        for (Index d = 1; d < n_modes; ++d) {
            double left = 1.0, right = 1.0;
            for (Index m = 0; m < d; ++m) left *= static_cast<double>(shape[static_cast<std::size_t>(m)]);
            for (Index m = d; m < n_modes; ++m) right *= static_cast<double>(shape[static_cast<std::size_t>(m)]);
            const double score = std::abs(left - right);
            if (best < 0.0 || score < best) {
                best = score;
                best_d = d;
            }
        }
        return {{best_d}};
    }

    std::vector<double> log_dims;
    double log_total = 0.0;
    for (Index d : shape) {
        log_dims.push_back(std::log(static_cast<double>(d)));
        log_total += log_dims.back();
    }
    const double target = log_total / static_cast<double>(branch_count);

    // exhaustive over strictly increasing boundaries, in lexicographic order
    std::vector<Index> cuts(static_cast<std::size_t>(branch_count) - 1);
    std::iota(cuts.begin(), cuts.end(), Index{1});
    std::vector<Index> best_cuts;
    double best = -1.0;
    while (true) {
        double score = 0.0;
        Index prev = 0;
        for (std::size_t k = 0; k <= cuts.size(); ++k) {
            const Index end = (k == cuts.size()) ? n_modes : cuts[k];
            double branch_log = 0.0;
            for (Index m = prev; m < end; ++m) branch_log += log_dims[static_cast<std::size_t>(m)];
            score += std::abs(branch_log - target);
            prev = end;
        }
        if (best < 0.0 || score < best) {
            best = score;
            best_cuts = cuts;
        }
        // next combination
        int k = static_cast<int>(cuts.size()) - 1;
        while (k >= 0 && cuts[static_cast<std::size_t>(k)] == n_modes - static_cast<Index>(cuts.size()) + k) --k;
        if (k < 0) break;
        ++cuts[static_cast<std::size_t>(k)];
        for (std::size_t j = static_cast<std::size_t>(k) + 1; j < cuts.size(); ++j) cuts[j] = cuts[j - 1] + 1;
    }
    return {best_cuts};
}

namespace {

// Replace the modes [start, start+len) by a single mode of size v.cols(),
// contracting them against the rows of v.
DenseTensor contract_block(const DenseTensor& t, Index start, Index len, const Matrix& v) {
    Index left = 1, mid = 1, right = 1;
    for (Index m = 0; m < start; ++m) left *= t.dim(m);
    for (Index m = start; m < start + len; ++m) mid *= t.dim(m);
    for (Index m = start + len; m < t.order(); ++m) right *= t.dim(m);
    if (mid != v.rows()) throw std::invalid_argument("block size does not match subspace rows");

    const DenseTensor folded = reshape(t, {left, mid, right});
    const DenseTensor product = mode_product(folded, v, 1);

    Shape out_shape;
    for (Index m = 0; m < start; ++m) out_shape.push_back(t.dim(m));
    out_shape.push_back(v.cols());
    for (Index m = start + len; m < t.order(); ++m) out_shape.push_back(t.dim(m));
    return reshape(product, out_shape);
}

// Project the sample onto every branch except `skip`. Blocks are contracted
// from the last branch down so earlier positions stay valid.
DenseTensor contract_other_branches(const DenseTensor& y, const std::vector<BranchRange>& ranges,
                                    const std::vector<Matrix>& subspaces, Index skip) {
    DenseTensor z = y;
    for (Index b = static_cast<Index>(ranges.size()) - 1; b >= 0; --b) {
        if (b == skip) continue;
        const auto& range = ranges[static_cast<std::size_t>(b)];
        z = contract_block(z, range.begin, range.length(), subspaces[static_cast<std::size_t>(b)]);
    }
    return z;
}

// Sample projected onto every branch but b, as a (branch size x pseudo-mode)
// matrix: branch b's own modes grouped as rows, the other branches' rank
// modes as columns.
Matrix branch_unfolding(const DenseTensor& y, const std::vector<BranchRange>& ranges,
                        const std::vector<Matrix>& subspaces, Index b) {
    const auto& range = ranges[static_cast<std::size_t>(b)];
    DenseTensor z = contract_other_branches(y, ranges, subspaces, b);
    // projected mode order: branches before b are single rank modes at
    // positions 0..b-1, b's block follows, later branches trail. Move the
    // branch's own modes to the front.
    std::vector<Index> perm;
    for (Index m = 0; m < range.length(); ++m) perm.push_back(b + m);
    for (Index m = 0; m < static_cast<Index>(b); ++m) perm.push_back(m);
    for (Index m = b + range.length(); m < z.order(); ++m) perm.push_back(m);
    z = transpose(z, perm);
    const Index rows = shape_product(Shape(z.shape().begin(), z.shape().begin() + range.length()));
    return Eigen::Map<const Matrix>(z.data(), rows, z.size() / rows);
}

// Scatters of the branch-b projections. Centering happens before the slice
// sum, matching the mode-scatter convention: every pseudo-mode column of the
// centered projection contributes one outer product, so the class structure
// along the pseudo-mode never inflates the within-class term.
struct BranchScatter {
    Matrix s;
    double lower_bound;
    double data_scale;
};

BranchScatter branch_scatter(const LabeledTensorSet& data, const std::vector<BranchRange>& ranges,
                             const std::vector<Matrix>& subspaces, Index b, double lambda,
                             Index r_feat) {
    const auto& range = ranges[static_cast<std::size_t>(b)];
    const Index d_branch = shape_product(Shape(data.sample_shape().begin() + range.begin,
                                               data.sample_shape().begin() + range.end));

    Matrix s_w = Matrix::Zero(d_branch, d_branch);
    Matrix s_b = Matrix::Zero(d_branch, d_branch);
    double data_scale = 0.0;

    const Matrix total = branch_unfolding(data.total_mean(), ranges, subspaces, b);
    std::vector<Matrix> between_blocks;
    for (Index c = 0; c < data.num_classes(); ++c) {
        const Matrix mean_c = branch_unfolding(data.class_mean(c), ranges, subspaces, b);
        for (Index k = 0; k < data.class_size(c); ++k) {
            const Matrix z = branch_unfolding(data.sample(c, k), ranges, subspaces, b);
            data_scale += z.squaredNorm();
            s_w.selfadjointView<Eigen::Lower>().rankUpdate(z - mean_c);
        }
        const Matrix between = mean_c - total;
        s_b.selfadjointView<Eigen::Lower>().rankUpdate(between, static_cast<double>(data.class_size(c)));
        between_blocks.push_back(std::sqrt(static_cast<double>(data.class_size(c))) * between);
    }
    s_w.triangularView<Eigen::StrictlyUpper>() = s_w.transpose();
    s_b.triangularView<Eigen::StrictlyUpper>() = s_b.transpose();

    // top spectrum of s_b through the low-rank Gram of the stacked between blocks
    Index cols = 0;
    for (const auto& blk : between_blocks) cols += blk.cols();
    Matrix stacked(d_branch, cols);
    Index at = 0;
    for (const auto& blk : between_blocks) {
        stacked.middleCols(at, blk.cols()) = blk;
        at += blk.cols();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(stacked.transpose() * stacked);
    const Vector evals = es.eigenvalues();
    double top = 0.0;
    for (Index i = 0; i < std::min(r_feat, evals.size()); ++i) {
        const double v = evals(evals.size() - 1 - i);
        if (v > 0.0) top += v;
    }

    return {s_w - lambda * s_b, -lambda * top, data_scale};
}

}  // namespace

DenseTensor project_branches(const DenseTensor& y, const std::vector<TTChain>& chains,
                             const std::vector<BranchRange>& ranges) {
    std::vector<Matrix> subspaces;
    for (const auto& chain : chains) subspaces.push_back(subspace_matrix(chain));
    DenseTensor z = y;
    for (Index b = static_cast<Index>(ranges.size()) - 1; b >= 0; --b) {
        const auto& range = ranges[static_cast<std::size_t>(b)];
        z = contract_block(z, range.begin, range.length(), subspaces[static_cast<std::size_t>(b)]);
    }
    return z;
}

BranchModel multibranch_fit(const LabeledTensorSet& data, const BranchSpec& spec,
                            const std::vector<std::vector<Index>>& ranks, double lambda,
                            const MultiBranchConfig& cfg) {
    data.validate();
    const Shape shape = data.sample_shape();
    const Index n_modes = static_cast<Index>(shape.size());
    const auto ranges = branch_ranges(spec, n_modes);
    const Index f = static_cast<Index>(ranges.size());
    if (static_cast<Index>(ranks.size()) != f)
        throw std::invalid_argument("one rank list per branch expected");
    for (Index b = 0; b < f; ++b) {
        if (static_cast<Index>(ranks[static_cast<std::size_t>(b)].size()) != ranges[static_cast<std::size_t>(b)].length())
            throw std::invalid_argument("branch rank list length must match the branch's mode count");
    }

    BranchModel model;
    model.spec = spec;
    model.data_shape = shape;
    model.lambda = lambda;
    model.branch_ranks = ranks;

    if (f == 1) {
        const TTDAResult res = ttda_fit(data, ranks[0], lambda, cfg.tt);
        model.chains.push_back(res.chain);
        model.objective_traces.push_back(res.objective_trace);
        for (std::size_t i = 0; i < res.cores.size(); ++i) {
            model.cores.emplace_back(Shape{res.cores[i].size()}, res.cores[i]);
            model.core_labels.push_back(res.core_labels[i]);
        }
        return model;
    }

    // per-branch initialization from the branch-unfolded mean tensor
    const DenseTensor mean = data.total_mean();
    for (Index b = 0; b < f; ++b) {
        const auto& range = ranges[static_cast<std::size_t>(b)];
        std::vector<Index> perm;
        for (Index m = range.begin; m < range.end; ++m) perm.push_back(m);
        for (Index m = 0; m < n_modes; ++m) {
            if (m < range.begin || m >= range.end) perm.push_back(m);
        }
        DenseTensor moved = transpose(mean, perm);
        Shape folded_shape(shape.begin() + range.begin, shape.begin() + range.end);
        folded_shape.push_back(moved.size() / shape_product(folded_shape));
        moved = reshape(moved, folded_shape);

        std::vector<Index> init_ranks = ranks[static_cast<std::size_t>(b)];
        init_ranks.push_back(1);  // trailing rest-mode factor, discarded below
        const TTChain full = tt_svd(moved, init_ranks);
        std::vector<TTFactor> keep(full.factors().begin(), full.factors().end() - 1);
        model.chains.emplace_back(std::move(keep));
    }

    for (int loop = 0; loop < cfg.loop_iter; ++loop) {
        for (Index b = 0; b < f; ++b) {
            std::vector<Matrix> subspaces;
            for (const auto& chain : model.chains) subspaces.push_back(subspace_matrix(chain));
            const auto& range = ranges[static_cast<std::size_t>(b)];
            const Shape branch_shape(shape.begin() + range.begin, shape.begin() + range.end);
            const Index r_feat = model.chains[static_cast<std::size_t>(b)].rank_right();

            const BranchScatter bs = branch_scatter(data, ranges, subspaces, b, lambda, r_feat);
            SweepResult res = ttda_sweep(bs.s, branch_shape,
                                         std::move(model.chains[static_cast<std::size_t>(b)]),
                                         bs.lower_bound, bs.data_scale, cfg.tt);
            model.chains[static_cast<std::size_t>(b)] = std::move(res.chain);
            model.objective_traces.push_back(std::move(res.trace));
        }
    }

    for (Index c = 0; c < data.num_classes(); ++c) {
        for (Index k = 0; k < data.class_size(c); ++k) {
            model.cores.push_back(project_branches(data.sample(c, k), model.chains, ranges));
            model.core_labels.push_back(static_cast<int>(c));
        }
    }
    return model;
}

BranchCountEstimate optimal_branch_count(double r, double i, double c, double k,
                                         std::optional<Index> n_modes) {
    if (r < 2.0) throw std::invalid_argument("optimal_branch_count requires r >= 2");
    if (i < 1.0 || c < 1.0 || k < 1.0) throw std::invalid_argument("sizes must be at least 1");
    const double raw = std::log((r * r * i - r * i) / (c * k * std::log(r))) / std::log(r);
    Index value = static_cast<Index>(std::llround(raw));
    if (value < 1) value = 1;
    if (n_modes && value > *n_modes) value = *n_modes;
    return {raw, value};
}

StorageCount storage_count(const BranchModel& model) {
    StorageCount count;
    for (const auto& chain : model.chains) {
        for (const auto& factor : chain.factors()) count.subspace_elements += factor.core.size();
    }
    for (const auto& core : model.cores) count.core_elements += core.size();
    return count;
}

StorageCount storage_count(const Shape& shape, const BranchSpec& spec,
                           const std::vector<std::vector<Index>>& ranks, Index samples) {
    const auto ranges = branch_ranges(spec, static_cast<Index>(shape.size()));
    if (ranks.size() != ranges.size()) throw std::invalid_argument("one rank list per branch expected");

    StorageCount count;
    std::int64_t core_per_sample = 1;
    for (std::size_t b = 0; b < ranges.size(); ++b) {
        const auto& r = ranks[b];
        if (static_cast<Index>(r.size()) != ranges[b].length())
            throw std::invalid_argument("branch rank list length must match the branch's mode count");
        Index prev = 1;
        for (Index m = 0; m < ranges[b].length(); ++m) {
            const Index dim = shape[static_cast<std::size_t>(ranges[b].begin + m)];
            count.subspace_elements += prev * dim * r[static_cast<std::size_t>(m)];
            prev = r[static_cast<std::size_t>(m)];
        }
        core_per_sample *= r.back();
    }
    count.core_elements = core_per_sample * samples;
    return count;
}

std::int64_t storage_closed_form(Index n_modes, Index i, Index r, Index c, Index k, Index f) {
    if (f < 1 || f > n_modes) throw std::invalid_argument("branch count must lie in [1, N]");
    std::int64_t cores = 1;
    for (Index b = 0; b < f; ++b) cores *= r;
    return (n_modes - f) * r * r * i + f * r * i + cores * c * k;
}

double normalized_storage(const StorageCount& count, Index samples, Index sample_size) {
    return static_cast<double>(count.total()) /
           (static_cast<double>(samples) * static_cast<double>(sample_size));
}

void save_branch_model(const BranchModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["boundaries"] = model.spec.boundaries;
    manifest["data_shape"] = model.data_shape;
    manifest["lambda"] = model.lambda;
    manifest["branch_ranks"] = model.branch_ranks;
    manifest["objective_traces"] = model.objective_traces;
    manifest["core_labels"] = model.core_labels;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write model manifest");
    out << manifest.dump(2) << "\n";

    char name[32];
    for (std::size_t b = 0; b < model.chains.size(); ++b) {
        std::snprintf(name, sizeof(name), "branch_%02d", static_cast<int>(b));
        save_chain(model.chains[b], dir / name);
    }
    std::filesystem::create_directories(dir / "cores");
    for (std::size_t i = 0; i < model.cores.size(); ++i) {
        std::snprintf(name, sizeof(name), "core_%05d.tten", static_cast<int>(i));
        write_tten(model.cores[i], dir / "cores" / name);
    }
}

BranchModel load_branch_model(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("cannot read model manifest in " + dir.string());
    json manifest = json::parse(in);

    BranchModel model;
    model.spec.boundaries = manifest.at("boundaries").get<std::vector<Index>>();
    model.data_shape = manifest.at("data_shape").get<Shape>();
    model.lambda = manifest.at("lambda").get<double>();
    model.branch_ranks = manifest.at("branch_ranks").get<std::vector<std::vector<Index>>>();
    model.objective_traces = manifest.at("objective_traces").get<std::vector<std::vector<double>>>();
    model.core_labels = manifest.at("core_labels").get<std::vector<int>>();

    char name[32];
    for (Index b = 0; b < model.spec.branch_count(); ++b) {
        std::snprintf(name, sizeof(name), "branch_%02d", static_cast<int>(b));
        model.chains.push_back(load_chain(dir / name));
    }
    for (std::size_t i = 0; i < model.core_labels.size(); ++i) {
        std::snprintf(name, sizeof(name), "core_%05d.tten", static_cast<int>(i));
        model.cores.push_back(read_tten(dir / "cores" / name));
    }
    return model;
}

}  // namespace ttda
