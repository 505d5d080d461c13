#include "ttda/dense_tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ttda {

namespace {

void check_modes_valid(const Shape& shape) {
    for (Index d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor mode sizes must be positive");
    }
}

std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace

Index shape_product(const Shape& shape) {
    Index p = 1;
    for (Index d : shape) p *= d;
    return p;
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    check_modes_valid(shape_);
    data_ = Vector::Zero(shape_product(shape_));
}

DenseTensor::DenseTensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_modes_valid(shape_);
    if (data_.size() != shape_product(shape_))
        throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_string(shape_));
}

DenseTensor DenseTensor::scalar(double value) {
    DenseTensor t;
    t.data_[0] = value;
    return t;
}

Index DenseTensor::dim(Index mode) const {
    if (mode < 0 || mode >= order()) throw std::invalid_argument("mode index out of range");
    return shape_[static_cast<std::size_t>(mode)];
}

Index DenseTensor::linear_index(const std::vector<Index>& idx) const {
    if (static_cast<Index>(idx.size()) != order())
        throw std::invalid_argument("multi-index arity does not match tensor order");
    Index lin = 0;
    Index stride = 1;
    for (Index n = 0; n < order(); ++n) {
        const Index i = idx[static_cast<std::size_t>(n)];
        const Index d = shape_[static_cast<std::size_t>(n)];
        if (i < 0 || i >= d) throw std::out_of_range("tensor index out of range");
        lin += i * stride;
        stride *= d;
    }
    return lin;
}

std::vector<Index> DenseTensor::multi_index(Index linear) const {
    if (linear < 0 || linear >= size()) throw std::out_of_range("linear index out of range");
    std::vector<Index> idx(static_cast<std::size_t>(order()));
    for (Index n = 0; n < order(); ++n) {
        const Index d = shape_[static_cast<std::size_t>(n)];
        idx[static_cast<std::size_t>(n)] = linear % d;
        linear /= d;
    }
    return idx;
}

std::vector<Index> DenseTensor::strides() const {
    std::vector<Index> s(static_cast<std::size_t>(order()));
    Index stride = 1;
    for (Index n = 0; n < order(); ++n) {
        s[static_cast<std::size_t>(n)] = stride;
        stride *= shape_[static_cast<std::size_t>(n)];
    }
    return s;
}

DenseTensor reshape(const DenseTensor& t, Shape new_shape) {
    if (shape_product(new_shape) != t.size())
        throw std::invalid_argument("reshape target " + shape_string(new_shape) +
                                    " does not match element count " + std::to_string(t.size()));
    return DenseTensor(std::move(new_shape), t.values());
}

DenseTensor unfold(const DenseTensor& t, Index lead) {
    if (lead < 0 || lead > t.order()) throw std::invalid_argument("unfold split out of range");
    Index rows = 1;
    for (Index n = 0; n < lead; ++n) rows *= t.dim(n);
    return DenseTensor({rows, t.size() / rows}, t.values());
}

DenseTensor fold(const DenseTensor& m, Shape shape) { return reshape(m, std::move(shape)); }

Eigen::Map<const Matrix> unfold_view(const DenseTensor& t, Index lead) {
    if (lead < 0 || lead > t.order()) throw std::invalid_argument("unfold split out of range");
    Index rows = 1;
    for (Index n = 0; n < lead; ++n) rows *= t.dim(n);
    return {t.data(), rows, t.size() / rows};
}

Eigen::Map<const Vector> vector_view(const DenseTensor& t) { return {t.data(), t.size()}; }

DenseTensor transpose(const DenseTensor& t, const std::vector<Index>& perm) {
    const Index n = t.order();
    if (static_cast<Index>(perm.size()) != n) throw std::invalid_argument("permutation arity mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Index p : perm) {
        if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)])
            throw std::invalid_argument("invalid mode permutation");
        seen[static_cast<std::size_t>(p)] = true;
    }

    Shape out_shape(perm.size());
    const auto in_strides = t.strides();
    std::vector<Index> out_src_stride(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        out_shape[k] = t.dim(perm[k]);
        out_src_stride[k] = in_strides[static_cast<std::size_t>(perm[k])];
    }

    DenseTensor out(out_shape);
    // odometer over the output multi-index, tracking the source offset
    std::vector<Index> idx(perm.size(), 0);
    Index src = 0;
    for (Index lin = 0; lin < out.size(); ++lin) {
        out.data()[lin] = t.data()[src];
        for (std::size_t k = 0; k < perm.size(); ++k) {
            src += out_src_stride[k];
            if (++idx[k] < out_shape[k]) break;
            src -= out_shape[k] * out_src_stride[k];
            idx[k] = 0;
        }
    }
    return out;
}

DenseTensor partial_trace(const DenseTensor& t, Index mode_a, Index mode_b) {
    const Index n = t.order();
    if (mode_a < 0 || mode_a >= n || mode_b < 0 || mode_b >= n)
        throw std::invalid_argument("trace mode out of range");
    if (mode_a == mode_b) throw std::invalid_argument("trace modes must differ");
    if (t.dim(mode_a) != t.dim(mode_b))
        throw std::invalid_argument("traced modes must have equal sizes");

    const auto strides = t.strides();
    const Index diag_stride = strides[static_cast<std::size_t>(mode_a)] + strides[static_cast<std::size_t>(mode_b)];
    const Index diag_len = t.dim(mode_a);

    Shape out_shape;
    std::vector<Index> out_src_stride;
    for (Index m = 0; m < n; ++m) {
        if (m == mode_a || m == mode_b) continue;
        out_shape.push_back(t.dim(m));
        out_src_stride.push_back(strides[static_cast<std::size_t>(m)]);
    }

    DenseTensor out(out_shape);
    std::vector<Index> idx(out_shape.size(), 0);
    Index base = 0;
    for (Index lin = 0; lin < out.size(); ++lin) {
        double sum = 0.0;
        for (Index d = 0; d < diag_len; ++d) sum += t.data()[base + d * diag_stride];
        out.data()[lin] = sum;
        for (std::size_t k = 0; k < out_shape.size(); ++k) {
            base += out_src_stride[k];
            if (++idx[k] < out_shape[k]) break;
            base -= out_shape[k] * out_src_stride[k];
            idx[k] = 0;
        }
    }
    return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<Index>& a_modes, const std::vector<Index>& b_modes) {
    if (a_modes.size() != b_modes.size())
        throw std::invalid_argument("contraction mode lists must have equal length");
    auto check_list = [](const DenseTensor& t, const std::vector<Index>& modes) {
        std::vector<bool> seen(static_cast<std::size_t>(t.order()), false);
        for (Index m : modes) {
            if (m < 0 || m >= t.order()) throw std::invalid_argument("contraction mode out of range");
            if (seen[static_cast<std::size_t>(m)]) throw std::invalid_argument("duplicate contraction mode");
            seen[static_cast<std::size_t>(m)] = true;
        }
        return seen;
    };
    const auto a_used = check_list(a, a_modes);
    const auto b_used = check_list(b, b_modes);
    for (std::size_t k = 0; k < a_modes.size(); ++k) {
        if (a.dim(a_modes[k]) != b.dim(b_modes[k]))
            throw std::invalid_argument("contracted mode sizes do not match");
    }

    std::vector<Index> a_perm, b_perm;
    Shape out_shape;
    for (Index m = 0; m < a.order(); ++m) {
        if (!a_used[static_cast<std::size_t>(m)]) {
            a_perm.push_back(m);
            out_shape.push_back(a.dim(m));
        }
    }
    const Index a_rows = shape_product(out_shape);
    a_perm.insert(a_perm.end(), a_modes.begin(), a_modes.end());
    b_perm = b_modes;
    Shape b_surv_shape;
    for (Index m = 0; m < b.order(); ++m) {
        if (!b_used[static_cast<std::size_t>(m)]) {
            b_perm.push_back(m);
            b_surv_shape.push_back(b.dim(m));
        }
    }
    out_shape.insert(out_shape.end(), b_surv_shape.begin(), b_surv_shape.end());

    const DenseTensor ap = transpose(a, a_perm);
    const DenseTensor bp = transpose(b, b_perm);
    const Index inner = a.size() / a_rows;

    Eigen::Map<const Matrix> am(ap.data(), a_rows, inner);
    Eigen::Map<const Matrix> bm(bp.data(), inner, b.size() / inner);

    DenseTensor out(out_shape);
    Eigen::Map<Matrix>(out.data(), am.rows(), bm.cols()) = am * bm;
    return out;
}

DenseTensor contract_leading(const DenseTensor& a, const DenseTensor& b) {
    const Index n = a.order();
    if (b.order() < n) throw std::invalid_argument("contract_leading: second operand has too few modes");
    for (Index m = 0; m + 1 < n; ++m) {
        if (a.dim(m) != b.dim(m))
            throw std::invalid_argument("contract_leading: leading mode sizes do not match");
    }
    const auto la = unfold_view(a, n - 1);
    const auto tb = unfold_view(b, n - 1);

    Shape out_shape{a.dim(n - 1)};
    for (Index m = n - 1; m < b.order(); ++m) out_shape.push_back(b.dim(m));

    DenseTensor out(out_shape);
    Eigen::Map<Matrix>(out.data(), la.cols(), tb.cols()) = la.transpose() * tb;
    return out;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& u, Index mode) {
    if (mode < 0 || mode >= t.order()) throw std::invalid_argument("mode_product: mode out of range");
    if (t.dim(mode) != u.rows()) throw std::invalid_argument("mode_product: mode size does not match rows");

    Index left = 1, right = 1;
    for (Index m = 0; m < mode; ++m) left *= t.dim(m);
    for (Index m = mode + 1; m < t.order(); ++m) right *= t.dim(m);
    const Index d = t.dim(mode);
    const Index r = u.cols();

    Shape out_shape = t.shape();
    out_shape[static_cast<std::size_t>(mode)] = r;
    DenseTensor out(out_shape);

    // one (left x d) * (d x r) product per trailing slice
    for (Index k = 0; k < right; ++k) {
        Eigen::Map<const Matrix> slice(t.data() + k * left * d, left, d);
        Eigen::Map<Matrix>(out.data() + k * left * r, left, r) = slice * u;
    }
    return out;
}

}  // namespace ttda
