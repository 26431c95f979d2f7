#pragma once

#include <vector>

#include "ldahash/matrix.hpp"

namespace ldahash {

/// Feature matrix plus one class label per column. Features are d x n with
/// one item per column; labels take values in {0 .. class_count-1} and every
/// class must be occupied.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    int class_count = 0;

    std::size_t dim() const { return features.rows(); }
    std::size_t item_count() const { return features.cols(); }

    /// Throws ValidationError when any dataset invariant is broken.
    void validate() const;

    /// Item count per class, length class_count.
    std::vector<std::size_t> class_sizes() const;
};

/// n x c indicator matrix, one 1 per row marking the item's class.
Matrix one_hot(const std::vector<int>& labels, int class_count);

}  // namespace ldahash
