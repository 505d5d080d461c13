#pragma once

#include "ttda/labeled_set.hpp"

#include <cstdint>

namespace ttda {

/// Seeded generator for separable labeled tensors: every class mean is the
/// contraction of a random TT chain with the given bond ranks, normalized to
/// unit Frobenius norm and scaled by `separation`; samples add independent
/// per-entry Gaussian noise of standard deviation `noise_sigma`.
struct SyntheticSpec {
    Shape shape{4, 4, 4, 4};
    Index classes = 3;
    Index samples_per_class = 20;
    std::vector<Index> generator_ranks{1, 2, 2, 2, 1};  ///< bonds R_0..R_N, boundary ranks 1
    double separation = 1.0;
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;
};

struct SyntheticInfo {
    double min_mean_distance = 0.0;  ///< smallest pairwise class-mean distance
};

LabeledTensorSet generate_synthetic(const SyntheticSpec& spec, SyntheticInfo* info = nullptr);

}  // namespace ttda
