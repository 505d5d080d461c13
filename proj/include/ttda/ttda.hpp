#pragma once

#include "ttda/discriminant.hpp"
#include "ttda/stiefel.hpp"
#include "ttda/tt_chain.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttda {

/// Partition of the modes 0..N-1 into f contiguous branches. boundaries holds
/// the split positions (number of modes left of each cut), strictly increasing
/// inside (0, N); f = boundaries.size() + 1.
struct BranchSpec {
    std::vector<Index> boundaries;

    Index branch_count() const { return static_cast<Index>(boundaries.size()) + 1; }
};

struct BranchRange {
    Index begin;
    Index end;  ///< one past the last mode
    Index length() const { return end - begin; }
};

std::vector<BranchRange> branch_ranges(const BranchSpec& spec, Index n_modes);

struct TTFitConfig {
    int max_iter = 200;              ///< outer sweeps
    double factor_change_tol = 0.1;  ///< normalized factor change stopping rule
    Index scatter_dim_limit = 4096;  ///< refuse to materialize S beyond this D
    SolverConfig stiefel{};
    std::string stiefel_trace_path;  ///< append inner-solver CSV traces here when set
};

struct TTDAResult {
    TTChain chain;
    Matrix subspace;             ///< cached L(chain) of shape (prod I, R_N)
    std::vector<Vector> cores;   ///< training projections x = U^T V(y), (class, sample) order
    std::vector<int> core_labels;
    std::vector<double> objective_trace;  ///< tr(U^T S U) at start and after every factor update
    int iterations = 0;
    double lower_bound = 0.0;  ///< -lambda * sum of top-R_N eigenvalues of S_B
    bool degenerate_scatter = false;
};

/// Coefficient tensor of the quadratic objective in factor n with all other
/// factors fixed: contracts the scatter tensor (2N modes) against the left
/// and right partial chains on both index blocks and traces the two dangling
/// feature bonds. Shape (R_{n-1}, I_n, R_n, R_{n-1}, I_n, R_n) for n < N-1;
/// the last factor has no right part and no bond trace, giving the 4-mode
/// (R_{N-1}, I_N, R_{N-1}, I_N). The grouped square matrix is symmetric.
DenseTensor factor_quadratic(const TTChain& chain, const DenseTensor& s_tensor, Index n);

/// Alternating factor optimization of tr(U^T S U) over a left-orthogonal
/// chain: factors 0..N-2 by curvilinear Stiefel search on their quadratic,
/// the last factor by an exact eigensolve. Factors start from a TT
/// decomposition of the mean training tensor. Stops on the normalized factor
/// change rule or after max_iter sweeps. The objective trace is checked
/// against the -lambda * (top between-class spectrum) lower bound on every
/// update.
TTDAResult ttda_fit(const LabeledTensorSet& data, const std::vector<Index>& ranks,
                    double lambda, const TTFitConfig& cfg = {});

/// Split positions balancing the per-branch products of mode sizes: for f = 2
/// the split minimizing |prod_left - prod_right|; for f >= 3 the boundaries
/// minimizing the total log-distance of branch products to the f-th root of
/// the total. Ties go to the smallest boundary tuple.
BranchSpec select_branch_points(const Shape& shape, Index branch_count);

struct MultiBranchConfig {
    int loop_iter = 3;  ///< outer passes over the branches
    TTFitConfig tt{};
};

struct BranchModel {
    BranchSpec spec;
    Shape data_shape;
    std::vector<TTChain> chains;  ///< one left-orthogonal chain per branch
    double lambda = 0.0;
    std::vector<DenseTensor> cores;  ///< projected training cores, shape (r_1, ..., r_f)
    std::vector<int> core_labels;
    std::vector<std::vector<double>> objective_traces;  ///< one per branch update
    std::vector<std::vector<Index>> branch_ranks;
};

/// Alternating branch optimization: every pass projects the samples onto all
/// other branches' subspaces and updates one branch's warm-started chain by
/// the TTDA sweep on the projected scatter. Projections keep a trailing
/// pseudo-mode holding the other branches' ranks; centering happens before
/// the pseudo-mode columns are summed into the scatter, as in the per-mode
/// scatter convention. A single branch delegates to ttda_fit unchanged.
/// Cores are the all-branch projections.
BranchModel multibranch_fit(const LabeledTensorSet& data, const BranchSpec& spec,
                            const std::vector<std::vector<Index>>& ranks, double lambda,
                            const MultiBranchConfig& cfg = {});

/// Project one sample onto every branch subspace, giving the (r_1, ..., r_f) core.
DenseTensor project_branches(const DenseTensor& y, const std::vector<TTChain>& chains,
                             const std::vector<BranchRange>& ranges);

struct BranchCountEstimate {
    double raw;   ///< log_r((r^2 I - r I) / (C K ln r))
    Index value;  ///< rounded to the closest positive integer, clamped to [1, N] when N given
};

/// Closed-form branch count minimizing (N-f) r^2 I + f r I + r^f C K over f.
BranchCountEstimate optimal_branch_count(double r, double i, double c, double k,
                                         std::optional<Index> n_modes = std::nullopt);

struct StorageCount {
    std::int64_t subspace_elements = 0;
    std::int64_t core_elements = 0;
    std::int64_t total() const { return subspace_elements + core_elements; }
};

StorageCount storage_count(const BranchModel& model);
/// Structural count without a trained model: factor elements from the branch
/// ranks plus core elements for `samples` projected tensors.
StorageCount storage_count(const Shape& shape, const BranchSpec& spec,
                           const std::vector<std::vector<Index>>& ranks, Index samples);
/// Closed-form total (N-f) r^2 I + f r I + r^f C K for uniform dims and ranks;
/// f = N is the Tucker row.
std::int64_t storage_closed_form(Index n_modes, Index i, Index r, Index c, Index k, Index f);

double normalized_storage(const StorageCount& count, Index samples, Index sample_size);

/// Directory layout: manifest.json plus one chain directory per branch and the
/// stacked training cores.
void save_branch_model(const BranchModel& model, const std::filesystem::path& dir);
BranchModel load_branch_model(const std::filesystem::path& dir);

}  // namespace ttda
