#pragma once

#include "ttda/dense_tensor.hpp"

#include <filesystem>
#include <vector>

namespace ttda {

/// One tensor-train factor: a 3-mode core of shape (R_{n-1}, I_n, R_n).
/// When left_orthogonal is set, L(core)^T L(core) = I_{R_n} to 1e-10.
struct TTFactor {
    DenseTensor core;
    bool left_orthogonal = false;

    TTFactor() = default;
    explicit TTFactor(DenseTensor c, bool ortho = false);

    Index rank_left() const { return core.dim(0); }
    Index mode_dim() const { return core.dim(1); }
    Index rank_right() const { return core.dim(2); }

    /// max |L(core)^T L(core) - I|
    double orthogonality_error() const;
};

/// Ordered chain of TT factors with compatible adjacent ranks. A chain with
/// leading rank 1 spans the subspace given by the columns of
/// L(core_0 x ... x core_{N-1}).
class TTChain {
public:
    TTChain() = default;
    explicit TTChain(std::vector<TTFactor> factors);

    Index length() const { return static_cast<Index>(factors_.size()); }
    const TTFactor& factor(Index n) const;
    TTFactor& factor(Index n);
    const std::vector<TTFactor>& factors() const { return factors_; }

    /// Mode sizes (I_0, ..., I_{N-1}).
    Shape mode_dims() const;
    /// Bond ranks (R_0, R_1, ..., R_N), length N+1.
    std::vector<Index> ranks() const;
    Index rank_left() const { return factors_.front().rank_left(); }
    Index rank_right() const { return factors_.back().rank_right(); }

private:
    std::vector<TTFactor> factors_;
};

/// Sequential-SVD decomposition sweeping left to right with explicit target
/// ranks (R_1, ..., R_N); every factor comes out left-orthogonal. A requested
/// rank above the step's data rank is honored with orthonormal-complement
/// columns up to the row bound R_{n-1}*I_n, and capped with a warning beyond
/// it. The chain spans a subspace; reconstruction is through projection.
TTChain tt_svd(const DenseTensor& t, const std::vector<Index>& ranks);

/// Threshold mode: at each step keep the singular values >= tau times the
/// step's largest one (at least one, so degenerate inputs still give a
/// well-formed rank-1 chain). tau must lie in (0, 1].
TTChain tt_svd(const DenseTensor& t, double tau);

/// Merge factors from..to (inclusive, 0-based) over their shared bonds.
/// Result shape: (R_{from-1}, I_from, ..., I_to, R_to).
DenseTensor chain_contract(const TTChain& chain, Index from, Index to);

/// Explicit subspace matrix U of shape (prod I_n, R_N) for a chain with
/// leading rank 1. Columns are orthonormal when all factors are.
Matrix subspace_matrix(const TTChain& chain);

/// x = U^T V(y).
Vector project(const Matrix& u, const DenseTensor& y);

/// Orthogonal projection of y onto the subspace, reshaped back: U U^T V(y).
DenseTensor reconstruct(const Matrix& u, const DenseTensor& y, const Shape& shape);

/// Directory layout: header.json (factor count, ranks, orthogonality flags)
/// plus one TTEN file per core.
void save_chain(const TTChain& chain, const std::filesystem::path& dir);
TTChain load_chain(const std::filesystem::path& dir);

}  // namespace ttda
