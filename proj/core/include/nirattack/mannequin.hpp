#pragma once

#include <cstdint>

#include "nirattack/mesh.hpp"
#include "nirattack/scheme.hpp"

namespace nirattack {

/// Segment ids of the built-in 31-part mannequin layout.
namespace mannequin {
inline constexpr SegmentId kHead = 0;
inline constexpr SegmentId kHandLeft = 16;
inline constexpr SegmentId kHandRight = 17;
inline constexpr SegmentId kFootLeft = 26;
inline constexpr SegmentId kFootRight = 27;
inline constexpr int kSegments = 31;
}  // namespace mannequin

/// 31-part scheme matching make_mannequin(). `five_black` freezes head,
/// hands and feet; otherwise only the head is frozen.
SegmentScheme mannequin_scheme(bool five_black);

/// Box-built humanoid (about 1.6 to 1.9 m tall, y up, facing +z, centered
/// near the origin) with a seeded random pose. Every box carries one
/// segment label of the 31-part layout.
LabeledMesh make_mannequin(std::uint64_t seed, const SegmentScheme& scheme);

}  // namespace nirattack
