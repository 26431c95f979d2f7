#pragma once

#include <cstdint>

#include "ldahash/codes.hpp"
#include "ldahash/matrix.hpp"

namespace ldahash {

/// Signed random projections: a data-independent baseline. The projection is
/// standard normal, fully determined by (seed, d, r).
struct LshModel {
    Matrix projection;  // d x r
    std::uint64_t seed = 0;
};

LshModel fit_lsh(int dim, int code_bits, std::uint64_t seed);

/// sign_quantize(projection^T X); zero projects to +1.
BinaryCodes encode_lsh(const LshModel& model, const Matrix& x);
BinaryCodes encode_lsh(const LshModel& model, const Matrix& x,
                       std::vector<std::int64_t> item_ids);

}  // namespace ldahash
