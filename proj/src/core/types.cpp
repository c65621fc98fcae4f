#include "porogen/core/types.hpp"

#include <algorithm>
#include <cmath>

namespace porogen {

double porosity_of_mask(const BinaryMask& mask) {
    if (mask.empty()) throw ValidationError("porosity_of_mask: empty mask");
    std::size_t pore = 0;
    for (std::uint8_t v : mask.data) pore += (v != 0);
    return static_cast<double>(pore) / static_cast<double>(mask.data.size());
}

std::vector<float> one_hot_depth(const DepthLabel& label) {
    if (label.index < 0 || label.index >= label.n_depths)
        throw ValidationError("one_hot_depth: index out of range");
    std::vector<float> v(label.n_depths, 0.0f);
    v[label.index] = 1.0f;
    return v;
}

int argmax_one_hot(const std::vector<float>& one_hot) {
    if (one_hot.empty()) throw ValidationError("argmax_one_hot: empty vector");
    auto it = std::max_element(one_hot.begin(), one_hot.end());
    return static_cast<int>(it - one_hot.begin());
}

ConditionVector make_condition(double porosity, const DepthLabel& depth) {
    if (porosity < 0.0 || porosity > 1.0)
        throw ValidationError("condition porosity must lie in [0,1]");
    return ConditionVector{porosity, one_hot_depth(depth)};
}

RgbImage to_network_domain(const RgbImage& image) {
    if (image.domain != Domain::Storage)
        throw ValidationError("to_network_domain: image already in network domain");
    RgbImage out = image;
    out.domain = Domain::Network;
    for (float& v : out.data) {
        if (v < 0.0f || v > 255.0f) throw ValidationError("to_network_domain: value outside [0,255]");
        v = v / 127.5f - 1.0f;
    }
    return out;
}

RgbImage from_network_domain(const RgbImage& image) {
    if (image.domain != Domain::Network)
        throw ValidationError("from_network_domain: image not in network domain");
    RgbImage out = image;
    out.domain = Domain::Storage;
    for (float& v : out.data) {
        if (v < -1.0f - 1e-4f || v > 1.0f + 1e-4f)
            throw ValidationError("from_network_domain: value outside [-1,1]");
        v = std::clamp((v + 1.0f) * 127.5f, 0.0f, 255.0f);
    }
    return out;
}

}  // namespace porogen
