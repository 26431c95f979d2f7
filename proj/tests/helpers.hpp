#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ldahash/dataset.hpp"
#include "ldahash/matrix.hpp"
#include "ldahash/rng.hpp"

namespace test_support {

inline ldahash::Matrix random_matrix(ldahash::Rng& rng, std::size_t rows, std::size_t cols) {
    ldahash::Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

inline ldahash::Matrix random_symmetric(ldahash::Rng& rng, std::size_t n) {
    ldahash::Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = rng.normal();
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

// SPD with eigenvalues in roughly [1, 101]: M M^T + I.
inline ldahash::Matrix random_spd(ldahash::Rng& rng, std::size_t n) {
    const ldahash::Matrix m = random_matrix(rng, n, n);
    ldahash::Matrix a = ldahash::matmul_a_bt(m, m);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
    return a;
}

inline double rel_diff(const ldahash::Matrix& a, const ldahash::Matrix& b) {
    const double denom = std::max({ldahash::max_abs(a), ldahash::max_abs(b), 1e-300});
    return ldahash::max_abs_diff(a, b) / denom;
}

inline double rel_scalar_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

inline bool bitwise_equal(const ldahash::Matrix& a, const ldahash::Matrix& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

// Random labeled dataset with every class occupied.
inline ldahash::LabeledDataset random_dataset(ldahash::Rng& rng, int max_dim, int max_classes,
                                              int max_per_class) {
    ldahash::LabeledDataset data;
    data.class_count = 2 + static_cast<int>(rng.bounded(std::max(1, max_classes - 1)));
    const std::size_t dim = 2 + rng.bounded(std::max(1, max_dim - 1));
    std::size_t n = 0;
    std::vector<int> sizes(static_cast<std::size_t>(data.class_count));
    for (int& s : sizes) {
        s = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_per_class)));
        n += static_cast<std::size_t>(s);
    }
    data.features = random_matrix(rng, dim, n);
    data.labels.reserve(n);
    for (int cls = 0; cls < data.class_count; ++cls) {
        for (int k = 0; k < sizes[static_cast<std::size_t>(cls)]; ++k) {
            data.labels.push_back(cls);
        }
    }
    return data;
}

}  // namespace test_support
