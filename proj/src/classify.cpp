#include "ttda/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ttda {

void FeatureSet::add(Vector f, int label) {
    if (!features.empty() && f.size() != features.front().size())
        throw std::invalid_argument("feature lengths must agree");
    features.push_back(std::move(f));
    labels.push_back(label);
}

std::vector<int> nn1_classify(const FeatureSet& train, const std::vector<Vector>& test) {
    if (train.features.empty()) throw std::invalid_argument("empty training set");
    std::vector<int> predicted;
    predicted.reserve(test.size());
    for (const auto& x : test) {
        if (x.size() != train.features.front().size())
            throw std::invalid_argument("feature lengths must agree");
        Index best = 0;
        double best_d = (x - train.features.front()).squaredNorm();
        for (Index i = 1; i < train.size(); ++i) {
            const double d = (x - train.features[static_cast<std::size_t>(i)]).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        predicted.push_back(train.labels[static_cast<std::size_t>(best)]);
    }
    return predicted;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("prediction/truth length mismatch");
    if (predicted.empty()) throw std::invalid_argument("empty test set");
    Index correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid(9);
    for (int k = 0; k < 9; ++k) grid[static_cast<std::size_t>(k)] = std::pow(10.0, -1.0 + 0.5 * k);
    grid.front() = 0.1;
    grid.back() = 1000.0;
    return grid;
}

LambdaSelection select_lambda(const LabeledTensorSet& data, std::vector<double> grid,
                              const Trainer& trainer, Index holdout_per_class, int trials,
                              std::uint64_t seed) {
    data.validate();
    if (grid.empty()) throw std::invalid_argument("empty lambda grid");
    if (holdout_per_class < 1) throw std::invalid_argument("holdout size must be positive");
    if (trials < 1) throw std::invalid_argument("needs at least one trial");
    for (Index c = 0; c < data.num_classes(); ++c) {
        if (data.class_size(c) <= holdout_per_class)
            throw std::invalid_argument("insufficient samples for the requested holdout");
    }
    std::sort(grid.begin(), grid.end());

    LambdaSelection out;
    out.grid = grid;
    out.mean_accuracy.assign(grid.size(), 0.0);

    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(trial) + 1);
        LabeledTensorSet train_set(data.sample_shape());
        std::vector<DenseTensor> held;
        std::vector<int> held_labels;
        for (Index c = 0; c < data.num_classes(); ++c) {
            std::vector<Index> order(static_cast<std::size_t>(data.class_size(c)));
            std::iota(order.begin(), order.end(), Index{0});
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (static_cast<Index>(i) < holdout_per_class) {
                    held.push_back(data.sample(c, order[i]));
                    held_labels.push_back(static_cast<int>(c));
                } else {
                    train_set.add_sample(c, data.sample(c, order[i]));
                }
            }
        }

        for (std::size_t g = 0; g < grid.size(); ++g) {
            const FeatureExtractor extract = trainer(train_set, grid[g]);
            FeatureSet train_features;
            for (Index c = 0; c < train_set.num_classes(); ++c) {
                for (Index k = 0; k < train_set.class_size(c); ++k) {
                    train_features.add(extract(train_set.sample(c, k)), static_cast<int>(c));
                }
            }
            std::vector<Vector> held_features;
            for (const auto& h : held) held_features.push_back(extract(h));
            out.mean_accuracy[g] += accuracy(nn1_classify(train_features, held_features), held_labels);
        }
    }

    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out.mean_accuracy[g] /= trials;
        if (out.mean_accuracy[g] > out.mean_accuracy[best]) best = g;  // ties keep the smaller lambda
    }
    out.lambda = grid[best];
    return out;
}

}  // namespace ttda
