#include "ldahash/lsh.hpp"

#include <numeric>

#include "ldahash/errors.hpp"
#include "ldahash/rng.hpp"

namespace ldahash {

LshModel fit_lsh(int dim, int code_bits, std::uint64_t seed) {
    if (dim < 1 || code_bits < 1) {
        throw ValidationError("fit_lsh: dim and code_bits must be >= 1");
    }
    LshModel model;
    model.seed = seed;
    model.projection = Matrix(static_cast<std::size_t>(dim), static_cast<std::size_t>(code_bits));
    Rng rng(seed);
    for (double& v : model.projection.data()) v = rng.normal();
    return model;
}

BinaryCodes encode_lsh(const LshModel& model, const Matrix& x) {
    std::vector<std::int64_t> ids(x.cols());
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    return encode_lsh(model, x, std::move(ids));
}

BinaryCodes encode_lsh(const LshModel& model, const Matrix& x,
                       std::vector<std::int64_t> item_ids) {
    if (x.rows() != model.projection.rows()) {
        throw DimensionError("encode_lsh: expected feature dim " +
                             std::to_string(model.projection.rows()) + ", got " +
                             std::to_string(x.rows()));
    }
    return sign_quantize(matmul_at_b(model.projection, x), std::move(item_ids));
}

}  // namespace ldahash
