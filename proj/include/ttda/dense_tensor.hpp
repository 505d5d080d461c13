#pragma once

#include <Eigen/Core>

#include <vector>

namespace ttda {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Index shape_product(const Shape& shape);

/// Dense N-mode tensor over doubles.
///
/// Entries are stored first-mode-fastest: the linear index of (i_0,...,i_{N-1})
/// is sum_n i_n * prod_{m<n} I_m. With that layout every mode-grouping
/// unfolding, the vectorization, and the left/right unfoldings are plain
/// reinterpretations of one buffer (column-major matrices in Eigen terms).
/// Mode indices are 0-based throughout. A tensor with no modes holds a single
/// scalar. All operations on tensors are pure: inputs are never modified.
class DenseTensor {
public:
    /// 0-mode tensor holding the scalar 0.
    DenseTensor() : data_(Vector::Zero(1)) {}
    /// Zero-filled tensor of the given shape.
    explicit DenseTensor(Shape shape);
    /// Tensor wrapping existing data, which must have prod(shape) entries.
    DenseTensor(Shape shape, Vector data);

    static DenseTensor scalar(double value);

    Index order() const { return static_cast<Index>(shape_.size()); }
    const Shape& shape() const { return shape_; }
    Index dim(Index mode) const;
    Index size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    Vector& values() { return data_; }
    const Vector& values() const { return data_; }

    double at(const std::vector<Index>& idx) const { return data_[linear_index(idx)]; }
    double& at(const std::vector<Index>& idx) { return data_[linear_index(idx)]; }

    Index linear_index(const std::vector<Index>& idx) const;
    std::vector<Index> multi_index(Index linear) const;
    /// stride[n] = prod of dims before mode n (stride[0] = 1).
    std::vector<Index> strides() const;

private:
    Shape shape_;
    Vector data_;
};

/// Reinterpret the buffer under a new shape with the same element count.
DenseTensor reshape(const DenseTensor& t, Shape new_shape);

/// Matrix grouping the first `lead` modes as rows and the remaining modes as
/// columns. lead may be 0 (row vector) through order (column vector); the
/// left unfolding is lead = order-1 and the right unfolding is lead = 1.
DenseTensor unfold(const DenseTensor& t, Index lead);
/// Inverse of unfold: reinterpret a matrix (or any tensor) as `shape`.
DenseTensor fold(const DenseTensor& m, Shape shape);

/// Zero-copy matrix view of the first-`lead`-modes unfolding.
Eigen::Map<const Matrix> unfold_view(const DenseTensor& t, Index lead);
Eigen::Map<const Vector> vector_view(const DenseTensor& t);

/// New tensor with modes permuted; perm[k] is the source mode placed at k.
DenseTensor transpose(const DenseTensor& t, const std::vector<Index>& perm);

/// Sum the matrix slices of two equal-sized modes over their diagonal,
/// producing an (N-2)-mode tensor; remaining modes keep their input order.
/// A 2-mode input reduces to the classical matrix trace (0-mode result).
DenseTensor partial_trace(const DenseTensor& t, Index mode_a, Index mode_b);

/// Contraction of a and b over the paired mode lists (a_modes[k] pairs with
/// b_modes[k]). Surviving modes of a come first in input order, then the
/// surviving modes of b. Empty mode lists give the outer product. Other mode
/// orders are obtained with transpose().
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<Index>& a_modes, const std::vector<Index>& b_modes);

/// Contraction over the first order(a)-1 modes of both operands, realized as
/// the single matrix product L(a)^T * T_{N-1}(b). Result shape is
/// (I_N, J_N, ..., J_M). This is the hot path for scatter projections and is
/// equivalent to contract(a, b, [0..N-2], [0..N-2]).
DenseTensor contract_leading(const DenseTensor& a, const DenseTensor& b);

/// Contract mode `mode` of t (size u.rows()) against the rows of u; the mode
/// keeps its position and gets size u.cols().
DenseTensor mode_product(const DenseTensor& t, const Matrix& u, Index mode);

}  // namespace ttda
