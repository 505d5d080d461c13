// Brute-force reference implementations for the operator tests. Everything
// here walks plain nested loops over multi-indices, independent of the
// library's contraction machinery.
#pragma once

#include "ttda/dense_tensor.hpp"
#include "ttda/tt_chain.hpp"

#include <random>
#include <vector>

namespace oracle {

using ttda::DenseTensor;
using ttda::Index;
using ttda::Shape;

inline bool advance(std::vector<Index>& idx, const Shape& shape) {
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (++idx[k] < shape[k]) return true;
        idx[k] = 0;
    }
    return false;
}

inline DenseTensor random_tensor(const Shape& shape, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseTensor t(shape);
    for (Index i = 0; i < t.size(); ++i) t.data()[i] = gauss(rng);
    return t;
}

inline Shape random_shape(std::mt19937_64& rng, int max_modes, Index max_dim, int min_modes = 1) {
    std::uniform_int_distribution<int> modes(min_modes, max_modes);
    std::uniform_int_distribution<Index> dims(1, max_dim);
    Shape shape(static_cast<std::size_t>(modes(rng)));
    for (auto& d : shape) d = dims(rng);
    return shape;
}

// Nested-loop contraction with the library's output-order convention:
// a-survivors in order, then b-survivors in order.
inline DenseTensor naive_contract(const DenseTensor& a, const DenseTensor& b,
                                  const std::vector<Index>& a_modes, const std::vector<Index>& b_modes) {
    std::vector<bool> a_used(static_cast<std::size_t>(a.order()), false);
    std::vector<bool> b_used(static_cast<std::size_t>(b.order()), false);
    for (Index m : a_modes) a_used[static_cast<std::size_t>(m)] = true;
    for (Index m : b_modes) b_used[static_cast<std::size_t>(m)] = true;

    std::vector<Index> a_surv, b_surv;
    Shape out_shape, contracted;
    for (Index m = 0; m < a.order(); ++m) {
        if (!a_used[static_cast<std::size_t>(m)]) {
            a_surv.push_back(m);
            out_shape.push_back(a.dim(m));
        }
    }
    for (Index m = 0; m < b.order(); ++m) {
        if (!b_used[static_cast<std::size_t>(m)]) {
            b_surv.push_back(m);
            out_shape.push_back(b.dim(m));
        }
    }
    for (Index m : a_modes) contracted.push_back(a.dim(m));

    DenseTensor out(out_shape);
    std::vector<Index> out_idx(out_shape.size(), 0);
    do {
        std::vector<Index> ai(static_cast<std::size_t>(a.order()), 0);
        std::vector<Index> bi(static_cast<std::size_t>(b.order()), 0);
        for (std::size_t k = 0; k < a_surv.size(); ++k) ai[static_cast<std::size_t>(a_surv[k])] = out_idx[k];
        for (std::size_t k = 0; k < b_surv.size(); ++k)
            bi[static_cast<std::size_t>(b_surv[k])] = out_idx[a_surv.size() + k];

        double sum = 0.0;
        std::vector<Index> ci(contracted.size(), 0);
        do {
            for (std::size_t k = 0; k < contracted.size(); ++k) {
                ai[static_cast<std::size_t>(a_modes[k])] = ci[k];
                bi[static_cast<std::size_t>(b_modes[k])] = ci[k];
            }
            sum += a.at(ai) * b.at(bi);
        } while (!contracted.empty() && advance(ci, contracted));
        out.at(out_idx) = sum;
    } while (!out_shape.empty() && advance(out_idx, out_shape));
    return out;
}

inline DenseTensor naive_partial_trace(const DenseTensor& t, Index mode_a, Index mode_b) {
    Shape out_shape;
    std::vector<Index> keep;
    for (Index m = 0; m < t.order(); ++m) {
        if (m != mode_a && m != mode_b) {
            keep.push_back(m);
            out_shape.push_back(t.dim(m));
        }
    }
    DenseTensor out(out_shape);
    std::vector<Index> out_idx(out_shape.size(), 0);
    do {
        std::vector<Index> src(static_cast<std::size_t>(t.order()), 0);
        for (std::size_t k = 0; k < keep.size(); ++k) src[static_cast<std::size_t>(keep[k])] = out_idx[k];
        double sum = 0.0;
        for (Index d = 0; d < t.dim(mode_a); ++d) {
            src[static_cast<std::size_t>(mode_a)] = d;
            src[static_cast<std::size_t>(mode_b)] = d;
            sum += t.at(src);
        }
        out.at(out_idx) = sum;
    } while (!out_shape.empty() && advance(out_idx, out_shape));
    return out;
}

// Chain entry through explicit factor matrix products, one multi-index at a time.
inline ttda::Vector chain_entry(const ttda::TTChain& chain, const std::vector<Index>& modes) {
    ttda::Matrix acc = ttda::Matrix::Identity(1, 1);
    for (Index n = 0; n < chain.length(); ++n) {
        const auto& core = chain.factor(n).core;
        ttda::Matrix slice(core.dim(0), core.dim(2));
        for (Index r = 0; r < core.dim(0); ++r) {
            for (Index s = 0; s < core.dim(2); ++s) {
                slice(r, s) = core.at({r, modes[static_cast<std::size_t>(n)], s});
            }
        }
        acc = acc * slice;
    }
    return acc.row(0);
}

inline double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

}  // namespace oracle
