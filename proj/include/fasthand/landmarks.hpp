#pragma once

namespace fasthand {

// 21 hand landmarks: index 0 is the wrist (root), then four joints per finger
// in thumb, index, middle, ring, pinky order.
inline constexpr int kNumLandmarks = 21;

}  // namespace fasthand
