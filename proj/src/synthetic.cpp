#include "ttda/synthetic.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>

namespace ttda {

LabeledTensorSet generate_synthetic(const SyntheticSpec& spec, SyntheticInfo* info) {
    const Index n_modes = static_cast<Index>(spec.shape.size());
    if (n_modes < 1) throw std::invalid_argument("synthetic shape needs at least one mode");
    if (spec.classes < 2 || spec.samples_per_class < 1)
        throw std::invalid_argument("need at least two classes and one sample per class");
    if (spec.noise_sigma <= 0.0 || spec.separation <= 0.0)
        throw std::invalid_argument("noise sigma and separation must be positive");
    if (static_cast<Index>(spec.generator_ranks.size()) != n_modes + 1 ||
        spec.generator_ranks.front() != 1 || spec.generator_ranks.back() != 1)
        throw std::invalid_argument("generator ranks must list N+1 bonds with boundary ranks 1");
    for (Index r : spec.generator_ranks) {
        if (r < 1) throw std::invalid_argument("generator ranks must be positive");
    }

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<DenseTensor> means;
    for (Index c = 0; c < spec.classes; ++c) {
        DenseTensor acc({spec.generator_ranks[0], spec.shape[0], spec.generator_ranks[1]});
        for (Index i = 0; i < acc.size(); ++i) acc.data()[i] = gauss(rng);
        for (Index n = 1; n < n_modes; ++n) {
            DenseTensor factor({spec.generator_ranks[static_cast<std::size_t>(n)],
                                spec.shape[static_cast<std::size_t>(n)],
                                spec.generator_ranks[static_cast<std::size_t>(n) + 1]});
            for (Index i = 0; i < factor.size(); ++i) factor.data()[i] = gauss(rng);
            acc = contract(acc, factor, {acc.order() - 1}, {0});
        }
        DenseTensor mean = reshape(acc, spec.shape);
        const double norm = mean.values().norm();
        if (norm == 0.0) throw std::runtime_error("degenerate zero class mean");
        mean.values() *= spec.separation / norm;
        means.push_back(std::move(mean));
    }

    double min_dist = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < spec.classes; ++a) {
        for (Index b = a + 1; b < spec.classes; ++b) {
            min_dist = std::min(min_dist, (means[static_cast<std::size_t>(a)].values() -
                                           means[static_cast<std::size_t>(b)].values()).norm());
        }
    }
    // noise along any direction differs between two samples with std sigma*sqrt(2)
    if (min_dist < 6.0 * spec.noise_sigma * std::sqrt(2.0)) {
        std::cerr << "generate_synthetic: class means are closer (" << min_dist
                  << ") than the 6-sigma noise margin; classes may overlap\n";
    }
    if (info) info->min_mean_distance = min_dist;

    LabeledTensorSet data(spec.shape);
    for (Index c = 0; c < spec.classes; ++c) {
        for (Index k = 0; k < spec.samples_per_class; ++k) {
            Vector noise(means[static_cast<std::size_t>(c)].size());
            for (Index i = 0; i < noise.size(); ++i) noise[i] = gauss(rng);
            data.add_sample(c, DenseTensor(spec.shape,
                                           means[static_cast<std::size_t>(c)].values() +
                                               spec.noise_sigma * noise));
        }
    }
    return data;
}

}  // namespace ttda
