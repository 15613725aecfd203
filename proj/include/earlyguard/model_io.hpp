#pragma once

#include <filesystem>

#include "earlyguard/gru.hpp"

namespace earlyguard {

// Model container, format version 1.
//
//   bytes 0..3    magic "EGM1"
//   bytes 4..7    format version, uint32 little-endian
//   bytes 8..11   header length H, uint32 little-endian
//   bytes 12..    header: UTF-8 JSON with config, input_dim, normalizer
//                 (mu/sigma/fitted_on), seeds, trained flag and the tensor
//                 list (name/rows/cols in declared order)
//   then          the flat parameter vector as float64 little-endian,
//                 column-major within each tensor, tensors in declared order
//
// The layout is self-describing, so any implementation that can read JSON
// and IEEE-754 doubles can interoperate. Round trips are bit-exact.

inline constexpr char kModelMagic[4] = {'E', 'G', 'M', '1'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const GruNetwork& net, const std::filesystem::path& path);
GruNetwork load_model(const std::filesystem::path& path);

}  // namespace earlyguard
