#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include <torch/torch.h>

#include "porogen/core/types.hpp"

namespace porogen::seg {

/// Architecture knobs of the pore/solid U-Net.
struct SegNetSpec {
    int encoder_depth = 4;   // downsampling stages; each halves the extent
    int base_filters = 32;   // doubled per stage
    bool attention_gates = true;
    bool deep_supervision = true;
    std::vector<double> supervision_weights = {1.0, 0.3, 0.2};  // main head first
};

struct SegTrainConfig {
    double dice_weight = 0.5;
    double bce_weight = 0.5;
    int epochs = 20;
    int batch_size = 8;
    double learning_rate = 1e-3;
    double train_fraction = 0.7;
    double val_fraction = 0.15;  // remainder is the test split
    std::uint64_t seed = 0;
};

struct SegMetrics {
    double dice = 0.0;
    double iou = 0.0;
    double accuracy = 0.0;
    double porosity_mae = 0.0;
};

/// 2 * sum(p*t) / (sum(p) + sum(t) + eps), eps = 1e-6.
torch::Tensor dice_coefficient(const torch::Tensor& pred, const torch::Tensor& truth);

/// 0.5 * (1 - dice) + 0.5 * mean BCE, probabilities clamped to [1e-7, 1-1e-7].
torch::Tensor hybrid_loss(const torch::Tensor& pred, const torch::Tensor& truth,
                          double dice_weight = 0.5, double bce_weight = 0.5);

class AttentionUNetImpl;

/// Trained (or loaded) pore/solid segmenter. Inference is stateless and
/// thread-safe; inputs whose extent is not a multiple of the downsampling
/// factor are reflect-padded, never warped.
class Segmenter {
public:
    Segmenter();
    explicit Segmenter(const SegNetSpec& spec);

    bool trained() const { return trained_; }
    const SegNetSpec& spec() const { return spec_; }

    BinaryMask segment(const RgbImage& image) const;
    /// Soft probabilities for loss computation and evaluation.
    torch::Tensor predict(const torch::Tensor& batch_chw) const;

    SegMetrics evaluate(const std::vector<RgbImage>& images,
                        const std::vector<BinaryMask>& masks) const;

    void save(const std::filesystem::path& path) const;
    static Segmenter load(const std::filesystem::path& path);

    std::shared_ptr<AttentionUNetImpl> net() const { return net_; }
    void mark_trained() { trained_ = true; }

private:
    SegNetSpec spec_;
    std::shared_ptr<AttentionUNetImpl> net_;
    bool trained_ = false;
};

struct SegTrainResult {
    Segmenter segmenter;
    SegMetrics test_metrics;
    std::vector<double> train_loss_per_epoch;
    std::vector<double> val_loss_per_epoch;
};

SegTrainResult train_segmenter(const std::vector<RgbImage>& images,
                               const std::vector<BinaryMask>& masks, const SegTrainConfig& config,
                               const SegNetSpec& spec = {});

}  // namespace porogen::seg
