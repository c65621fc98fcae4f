#pragma once

#include <torch/torch.h>

#include "porogen/core/types.hpp"

namespace porogen::nn {

/// RgbImage -> CHW float tensor in the tanh range [-1,1].
torch::Tensor to_tensor(const RgbImage& image);

/// CHW tensor in [-1,1] -> storage-domain image.
RgbImage to_image(const torch::Tensor& chw, double pixel_size = 1.0);

/// BinaryMask -> 1xHxW float tensor of {0,1}.
torch::Tensor to_tensor(const BinaryMask& mask);

/// 1xHxW (or HxW) probability/binary tensor -> mask, thresholded at 0.5.
BinaryMask to_mask(const torch::Tensor& t);

}  // namespace porogen::nn
