#pragma once

#include "ttda/labeled_set.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ttda {

/// Flattened feature vectors with labels; all features share one length.
struct FeatureSet {
    std::vector<Vector> features;
    std::vector<int> labels;

    void add(Vector f, int label);
    Index size() const { return static_cast<Index>(features.size()); }
};

/// 1-NN under Euclidean distance; equidistant neighbors resolve to the lowest
/// training index.
std::vector<int> nn1_classify(const FeatureSet& train, const std::vector<Vector>& test);

/// Fraction of matching entries, in [0, 1].
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Nine log-spaced points with endpoints 0.1 and 1000.
std::vector<double> default_lambda_grid();

using FeatureExtractor = std::function<Vector(const DenseTensor&)>;
/// Fits a model at the given lambda and returns its feature map.
using Trainer = std::function<FeatureExtractor(const LabeledTensorSet&, double)>;

struct LambdaSelection {
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_accuracy;  ///< one entry per grid point
};

/// For each candidate, run `trials` seeded splits holding `holdout_per_class`
/// samples per class out as validation, train on the remainder, and score by
/// 1-NN accuracy on the held-out subset. Highest mean accuracy wins; ties go
/// to the smallest lambda.
LambdaSelection select_lambda(const LabeledTensorSet& data, std::vector<double> grid,
                              const Trainer& trainer, Index holdout_per_class = 1,
                              int trials = 5, std::uint64_t seed = 0);

}  // namespace ttda
