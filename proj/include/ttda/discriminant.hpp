#pragma once

#include "ttda/labeled_set.hpp"

#include <vector>

namespace ttda {

/// Within-class and between-class scatter matrices with the combined
/// trade-off matrix S = S_W - lambda * S_B. Both scatters are symmetric PSD;
/// S_B has rank at most C-1.
struct ScatterPair {
    Matrix s_w;
    Matrix s_b;
    double lambda = 0.0;

    Matrix s() const { return s_w - lambda * s_b; }
};

/// Scatters of the vectorized samples. S_W sums the centered outer products
/// per sample; S_B sums V(M_c - M) outer products per sample, so each class
/// term carries weight K_c.
ScatterPair scatter_matrices(const LabeledTensorSet& data, double lambda);

struct LdaResult {
    Matrix u;            ///< orthonormal columns, D x r
    Vector eigenvalues;  ///< the r algebraically smallest eigenvalues of S

    double objective() const { return eigenvalues.sum(); }
};

/// Columns of u are eigenvectors of the symmetric matrix s for the r smallest
/// eigenvalues. Column signs are fixed (largest-magnitude entry positive) so
/// repeated solves are stable. Eigen-ties yield some orthonormal basis of the
/// tied space; compare objectives or projectors, not raw columns.
LdaResult lda_solve(const Matrix& s, Index r);
LdaResult lda_solve(const ScatterPair& scatter, Index r);

/// Mode-n scatters after projecting every centered sample onto the given
/// subspaces for all other modes (mode products against the rows of each
/// u_m). subspaces[n] is ignored.
ScatterPair mode_scatter(const LabeledTensorSet& data, const std::vector<Matrix>& subspaces,
                         Index n, double lambda);

struct MdaResult {
    std::vector<Matrix> subspaces;       ///< one I_n x r_n matrix per mode
    std::vector<double> objective_trace; ///< after every mode update
    std::vector<double> mode_lambdas;    ///< per-mode lambda (DGTDA only)
    int iterations = 0;
};

struct CmdaConfig {
    int max_iter = 20;
    double change_tol = 0.1;
};

/// Alternating per-mode eigensolves of S_W^(n) - lambda S_B^(n) with the other
/// subspaces fixed; stops when the normalized subspace change drops below
/// change_tol or max_iter sweeps complete.
MdaResult cmda(const LabeledTensorSet& data, const std::vector<Index>& ranks, double lambda,
               const CmdaConfig& cfg = {});

/// Single pass per mode on the raw unfolding scatters (identity projections);
/// per mode, lambda_n is the largest eigenvalue of the symmetric pseudo-ratio
/// S_W^{+1/2} S_B S_W^{+1/2}. Non-iterative.
MdaResult dgtda(const LabeledTensorSet& data, const std::vector<Index>& ranks);

/// Core tensor of y under per-mode projections: y x_n u_n^T for all n.
DenseTensor tucker_core(const DenseTensor& y, const std::vector<Matrix>& subspaces);

/// Sum of the r largest eigenvalues of S_B, computed exactly through the
/// C x C Gram matrix of the weighted mean differences (S_B has rank <= C-1).
double between_scatter_top_sum(const LabeledTensorSet& data, Index r);

}  // namespace ttda
