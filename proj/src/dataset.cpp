#include "ldahash/dataset.hpp"

#include <string>

#include "ldahash/errors.hpp"

namespace ldahash {

void LabeledDataset::validate() const {
    if (class_count < 1) {
        throw ValidationError("dataset: class_count must be at least 1");
    }
    if (item_count() < 2) {
        throw ValidationError("dataset: at least 2 items required");
    }
    if (labels.size() != item_count()) {
        throw ValidationError("dataset: label count " + std::to_string(labels.size()) +
                              " does not match item count " + std::to_string(item_count()));
    }
    std::vector<std::size_t> sizes(static_cast<std::size_t>(class_count), 0);
    for (int label : labels) {
        if (label < 0 || label >= class_count) {
            throw ValidationError("dataset: label " + std::to_string(label) +
                                  " outside {0.." + std::to_string(class_count - 1) + "}");
        }
        ++sizes[static_cast<std::size_t>(label)];
    }
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) {
            throw ValidationError("dataset: class " + std::to_string(c) + " has no items");
        }
    }
    features.require_finite("dataset features");
}

std::vector<std::size_t> LabeledDataset::class_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(class_count), 0);
    for (int label : labels) ++sizes[static_cast<std::size_t>(label)];
    return sizes;
}

Matrix one_hot(const std::vector<int>& labels, int class_count) {
    if (class_count < 1) throw ValidationError("one_hot: class_count must be at least 1");
    Matrix y(labels.size(), static_cast<std::size_t>(class_count));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || label >= class_count) {
            throw ValidationError("one_hot: label " + std::to_string(label) + " out of range");
        }
        y(i, static_cast<std::size_t>(label)) = 1.0;
    }
    return y;
}

}  // namespace ldahash
