#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ldahash/ldah.hpp"
#include "ldahash/lsh.hpp"
#include "ldahash/network.hpp"

namespace ldahash {

using AnyModel = std::variant<LinearHashModel, DeepHashModel, LshModel>;

/// Model files are versioned JSON trees; matrices are nested arrays of
/// decimal floats emitted losslessly for 64-bit values.
void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

std::size_t model_input_dim(const AnyModel& model);
int model_code_bits(const AnyModel& model);
const char* model_type_name(const AnyModel& model);

BinaryCodes encode_with_model(const AnyModel& model, const Matrix& x,
                              std::vector<std::int64_t> item_ids);

}  // namespace ldahash
