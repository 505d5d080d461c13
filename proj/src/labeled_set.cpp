#include "ttda/labeled_set.hpp"

#include <stdexcept>

namespace ttda {

void LabeledTensorSet::add_sample(Index class_index, DenseTensor sample) {
    if (class_index < 0) throw std::invalid_argument("class index must be nonnegative");
    if (classes_.empty() && shape_.empty()) shape_ = sample.shape();
    if (sample.shape() != shape_) throw std::invalid_argument("sample shape does not match the set");
    if (class_index >= num_classes()) classes_.resize(static_cast<std::size_t>(class_index) + 1);
    classes_[static_cast<std::size_t>(class_index)].push_back(std::move(sample));
}

Index LabeledTensorSet::class_size(Index c) const {
    return static_cast<Index>(class_samples(c).size());
}

Index LabeledTensorSet::total_samples() const {
    Index n = 0;
    for (const auto& cls : classes_) n += static_cast<Index>(cls.size());
    return n;
}

const DenseTensor& LabeledTensorSet::sample(Index c, Index k) const {
    const auto& cls = class_samples(c);
    if (k < 0 || k >= static_cast<Index>(cls.size())) throw std::invalid_argument("sample index out of range");
    return cls[static_cast<std::size_t>(k)];
}

const std::vector<DenseTensor>& LabeledTensorSet::class_samples(Index c) const {
    if (c < 0 || c >= num_classes()) throw std::invalid_argument("class index out of range");
    return classes_[static_cast<std::size_t>(c)];
}

DenseTensor LabeledTensorSet::class_mean(Index c) const {
    const auto& cls = class_samples(c);
    if (cls.empty()) throw std::invalid_argument("empty class has no mean");
    Vector acc = Vector::Zero(sample_size());
    for (const auto& s : cls) acc += s.values();
    acc /= static_cast<double>(cls.size());
    return DenseTensor(shape_, std::move(acc));
}

DenseTensor LabeledTensorSet::total_mean() const {
    const Index total = total_samples();
    if (total == 0) throw std::invalid_argument("empty set has no mean");
    Vector acc = Vector::Zero(sample_size());
    for (const auto& cls : classes_) {
        for (const auto& s : cls) acc += s.values();
    }
    acc /= static_cast<double>(total);
    return DenseTensor(shape_, std::move(acc));
}

void LabeledTensorSet::validate(Index min_classes) const {
    if (num_classes() < min_classes) throw std::invalid_argument("too few classes");
    for (const auto& cls : classes_) {
        if (cls.empty()) throw std::invalid_argument("every class must be nonempty");
    }
}

}  // namespace ttda
