#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "saog/model.hpp"

namespace saog {

inline constexpr std::size_t kCompactHeaderBytes = 7;
inline constexpr std::size_t kCompactObjectBytes = 16;
inline constexpr std::size_t kCompactRelationBytes = 3;

constexpr std::size_t compact_size(std::size_t objects, std::size_t relations) {
    return kCompactHeaderBytes + kCompactObjectBytes * objects + kCompactRelationBytes * relations;
}

/// "SPG1" compact codec. Sizes are stored as indices into `spec.sizes`, so the
/// same spec is needed to decode. Locations are stored as 32-bit floats and
/// rotation as 16-bit centidegrees.
std::vector<std::uint8_t> encode_parse_graph_compact(const ParseGraph& g, const GrammarSpec& spec);
ParseGraph decode_parse_graph_compact(std::span<const std::uint8_t> bytes, const GrammarSpec& spec);

} // namespace saog
