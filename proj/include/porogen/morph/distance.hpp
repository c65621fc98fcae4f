#pragma once

#include <vector>

#include "porogen/core/types.hpp"

namespace porogen::morph {

/// Euclidean distance (in pixels) from each pore pixel to the nearest solid
/// pixel. Solid pixels carry 0. The image boundary counts as solid so
/// inscribed radii stay bounded on open boundaries.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

enum class Exec { Serial, Parallel };

/// Exact squared-parabola EDT (two 1D passes). The serial path is the
/// reference the parallel path is tested against.
DistanceField distance_transform(const BinaryMask& mask, Exec exec = Exec::Parallel);

}  // namespace porogen::morph
