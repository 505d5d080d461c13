#pragma once

#include "ttda/dense_tensor.hpp"

#include <vector>

namespace ttda {

/// Training collection: samples grouped by class, all sharing one shape.
/// Classes are 0-based contiguous indices; every class must be nonempty and
/// discriminant training additionally requires at least two classes.
class LabeledTensorSet {
public:
    LabeledTensorSet() = default;
    explicit LabeledTensorSet(Shape sample_shape) : shape_(std::move(sample_shape)) {}

    void add_sample(Index class_index, DenseTensor sample);

    Index num_classes() const { return static_cast<Index>(classes_.size()); }
    Index class_size(Index c) const;
    Index total_samples() const;
    const Shape& sample_shape() const { return shape_; }
    Index sample_size() const { return shape_product(shape_); }

    const DenseTensor& sample(Index c, Index k) const;
    const std::vector<DenseTensor>& class_samples(Index c) const;

    DenseTensor class_mean(Index c) const;
    DenseTensor total_mean() const;

    /// Throws unless every class is nonempty and there are >= min_classes.
    void validate(Index min_classes = 2) const;

private:
    Shape shape_;
    std::vector<std::vector<DenseTensor>> classes_;
};

}  // namespace ttda
