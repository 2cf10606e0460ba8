#pragma once

#include "impgraph/params.hpp"

#include <string>

namespace impgraph {

inline constexpr char kWeightsMagic[4] = {'I', 'G', 'W', 'T'};
inline constexpr std::uint32_t kWeightsVersion = 1;

/// Model-shape keys as flat "key = value" text, and back.
std::string model_config_text(const ModelConfig& config);
ModelConfig model_config_from_text(const std::string& text);

/// Layout (little-endian): magic "IGWT", u32 version, u64 config hash,
/// u32-prefixed model config text, u32 record count, then per record a
/// u32-prefixed name, u32 rank, u32 dims, and raw f64 values.
void write_weights(const std::string& path, const ModelParams& params);
ModelParams read_weights(const std::string& path);

}  // namespace impgraph
