#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "porogen/core/errors.hpp"

namespace porogen {

/// Value domain of an RgbImage: 8-bit storage range or the tanh range used by
/// the networks.
enum class Domain { Storage, Network };

/// Color patch, interleaved RGB (HWC). Storage domain holds values in
/// [0,255], network domain in [-1,1]. pixel_size is micrometers per pixel and
/// only affects length-valued morphology outputs.
struct RgbImage {
    int width = 0;
    int height = 0;
    Domain domain = Domain::Storage;
    double pixel_size = 1.0;
    std::vector<float> data;  // height*width*3

    static constexpr int channels = 3;

    float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    bool empty() const { return width <= 0 || height <= 0; }

    static RgbImage zeros(int width, int height, Domain domain = Domain::Storage) {
        RgbImage img;
        img.width = width;
        img.height = height;
        img.domain = domain;
        img.data.assign(static_cast<std::size_t>(width) * height * 3, 0.0f);
        return img;
    }
};

/// Pore/solid mask: 1 = pore, 0 = solid.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // height*width

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool empty() const { return width <= 0 || height <= 0; }

    static BinaryMask filled(int width, int height, std::uint8_t value) {
        BinaryMask m;
        m.width = width;
        m.height = height;
        m.data.assign(static_cast<std::size_t>(width) * height, value);
        return m;
    }
};

/// Categorical depth condition, index into the formation's depth table.
struct DepthLabel {
    int index = 0;
    int n_depths = 4;

    DepthLabel() = default;
    DepthLabel(int index_, int n_depths_) : index(index_), n_depths(n_depths_) {
        if (n_depths <= 0 || index < 0 || index >= n_depths)
            throw ValidationError("depth index " + std::to_string(index_) + " out of range [0," +
                                  std::to_string(n_depths_) + ")");
    }
};

/// The (porosity, depth one-hot) pair fed to generator and discriminator.
struct ConditionVector {
    double porosity = 0.0;
    std::vector<float> depth_one_hot;
};

/// One training patch plus its labels and provenance.
struct PatchRecord {
    RgbImage image;
    double porosity = 0.0;
    DepthLabel depth;
    int porosity_class = -1;  // -1 means unassigned or excluded
    bool excluded = false;
    bool augmented = false;
    std::string source_id;
};

/// Pore pixel fraction of a mask.
double porosity_of_mask(const BinaryMask& mask);

/// One-hot encode a depth label.
std::vector<float> one_hot_depth(const DepthLabel& label);

/// Index of the single 1 in a valid one-hot vector.
int argmax_one_hot(const std::vector<float>& one_hot);

ConditionVector make_condition(double porosity, const DepthLabel& depth);

/// Affine map [0,255] -> [-1,1].
RgbImage to_network_domain(const RgbImage& image);

/// Inverse map, clipped to [0,255].
RgbImage from_network_domain(const RgbImage& image);

}  // namespace porogen
