#include "porogen/nn/convert.hpp"

namespace porogen::nn {

torch::Tensor to_tensor(const RgbImage& image) {
    if (image.empty()) throw ValidationError("to_tensor: empty image");
    torch::Tensor t = torch::from_blob(const_cast<float*>(image.data.data()),
                                       {image.height, image.width, 3}, torch::kFloat32)
                          .permute({2, 0, 1})
                          .clone();
    if (image.domain == Domain::Storage) t = t / 127.5f - 1.0f;
    return t;
}

RgbImage to_image(const torch::Tensor& chw, double pixel_size) {
    TORCH_CHECK(chw.dim() == 3 && chw.size(0) == 3, "expected 3xHxW tensor");
    torch::Tensor hwc = chw.detach().to(torch::kFloat32).clamp(-1.0, 1.0).permute({1, 2, 0}).contiguous();
    RgbImage img;
    img.width = static_cast<int>(hwc.size(1));
    img.height = static_cast<int>(hwc.size(0));
    img.domain = Domain::Network;
    img.pixel_size = pixel_size;
    const float* p = hwc.data_ptr<float>();
    img.data.assign(p, p + hwc.numel());
    return img;
}

torch::Tensor to_tensor(const BinaryMask& mask) {
    if (mask.empty()) throw ValidationError("to_tensor: empty mask");
    torch::Tensor t = torch::empty({1, mask.height, mask.width}, torch::kFloat32);
    float* p = t.data_ptr<float>();
    for (std::size_t i = 0; i < mask.data.size(); ++i) p[i] = mask.data[i] ? 1.0f : 0.0f;
    return t;
}

BinaryMask to_mask(const torch::Tensor& t) {
    torch::Tensor m = t.detach().squeeze().to(torch::kFloat32).contiguous();
    TORCH_CHECK(m.dim() == 2, "expected HxW tensor after squeeze");
    BinaryMask mask = BinaryMask::filled(static_cast<int>(m.size(1)), static_cast<int>(m.size(0)), 0);
    const float* p = m.data_ptr<float>();
    for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = p[i] > 0.5f ? 1 : 0;
    return mask;
}

}  // namespace porogen::nn
