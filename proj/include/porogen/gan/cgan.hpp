#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include <torch/torch.h>

#include "porogen/core/types.hpp"

namespace porogen::gan {

enum class Preset { Original, ModelA, ModelB };

Preset preset_from_string(const std::string& name);
std::string to_string(Preset preset);

/// Declarative generator layer stack. The first block(s) run at the base
/// resolution (stride 1), stride-2 blocks double the extent up to the output.
struct GeneratorSpec {
    Preset preset = Preset::Original;
    int latent_dim = 100;
    int dense_channels = 512;
    int base_size = 30;
    int n_depths = 4;
    std::vector<int> block_channels;  // last entry is 3 (RGB)
    std::vector<int> block_strides;
    std::vector<int> block_kernels;

    int input_channels() const { return dense_channels + n_depths + 1; }
    int output_size() const {
        int s = base_size;
        for (int st : block_strides) s *= st;
        return s;
    }
};

struct DiscriminatorSpec {
    Preset preset = Preset::Original;
    int image_size = 480;
    int n_depths = 4;
    std::vector<int> filters;
    std::vector<int> kernels = {5, 5, 3, 3, 3};
    double dropout = 0.3;

    int input_channels() const { return 3 + n_depths + 1; }
};

/// Presets: Original (dense 512, blocks 256/128/64/32/3), Model A (dense 384,
/// extra stride-1 refinement block), Model B (dense 256, proportional
/// reduction). The toy flag divides channel widths by 4 and shrinks the base
/// grid to 6x6 (96x96 output) for desk-scale runs.
GeneratorSpec make_generator_spec(Preset preset, int n_depths = 4, bool toy = false);
DiscriminatorSpec make_discriminator_spec(Preset preset, int n_depths = 4, bool toy = false);

/// Replicates the condition (one-hot depth + porosity scalar) as constant
/// planes and concatenates them onto a BxCxHxW feature map.
torch::Tensor concat_condition_planes(const torch::Tensor& features,
                                      const torch::Tensor& porosity,
                                      const torch::Tensor& depth_one_hot);

/// Image (network domain, Bx3xHxW) + condition planes -> Bx(3+n_depths+1)xHxW.
torch::Tensor assemble_discriminator_input(const torch::Tensor& images,
                                           const torch::Tensor& porosity,
                                           const torch::Tensor& depth_one_hot);

class GeneratorImpl : public torch::nn::Module {
public:
    explicit GeneratorImpl(const GeneratorSpec& spec);

    /// Dense-transformed noise reshaped to the base grid with condition
    /// channels appended: Bx(dense+n_depths+1)xSxS.
    torch::Tensor assemble_input(const torch::Tensor& z, const torch::Tensor& porosity,
                                 const torch::Tensor& depth_one_hot);

    torch::Tensor forward(const torch::Tensor& z, const torch::Tensor& porosity,
                          const torch::Tensor& depth_one_hot);

    const GeneratorSpec& spec() const { return spec_; }

private:
    GeneratorSpec spec_;
    torch::nn::Linear dense_{nullptr};
    torch::nn::ModuleList convs_;
    torch::nn::ModuleList norms_;  // one fewer than convs_: no norm after the output block
};
TORCH_MODULE(Generator);

class DiscriminatorImpl : public torch::nn::Module {
public:
    explicit DiscriminatorImpl(const DiscriminatorSpec& spec);

    /// Scalar authenticity score in (0,1) per batch element.
    torch::Tensor forward(const torch::Tensor& images, const torch::Tensor& porosity,
                          const torch::Tensor& depth_one_hot);

    const DiscriminatorSpec& spec() const { return spec_; }

private:
    DiscriminatorSpec spec_;
    torch::nn::ModuleList convs_;
    torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(Discriminator);

/// -mean log D(x) - mean log(1 - D(x~)), scores clamped away from {0,1}.
torch::Tensor discriminator_loss(const torch::Tensor& real_scores,
                                 const torch::Tensor& fake_scores);

/// Non-saturating -mean log D(G(z)).
torch::Tensor generator_loss(const torch::Tensor& fake_scores);

struct GanTrainConfig {
    int epochs = 200;
    int batch_size = 16;  // must be even, split m/2 real + m/2 fake
    double beta1 = 0.5;
    double beta2 = 0.999;
    double lr_start = 2.0e-4;
    double lr_end = 2.0e-6;
    int checkpoint_every = 10;
    std::uint64_t seed = 0;
};

/// Power-1 polynomial decay between the endpoint rates.
double lr_schedule(int epoch, const GanTrainConfig& config);

struct TrainLogRow {
    int epoch = 0;
    double loss_g = 0.0;
    double loss_d = 0.0;
    std::vector<double> probe_porosity;  // per depth, at a fixed probe target
    double wall_seconds = 0.0;
};

struct TrainingLog {
    std::vector<TrainLogRow> rows;
    std::vector<double> probe_targets;  // per depth
};

struct GenerateResult {
    std::vector<RgbImage> images;
    bool out_of_range = false;  // requested porosity outside the trained span
};

struct LoadedCGan;

/// One record of the unified training set.
struct GanSample {
    torch::Tensor image;  // 3xHxW in [-1,1]
    double porosity = 0.0;
    int depth = 0;
};

class CGan {
public:
    CGan(const GeneratorSpec& gspec, const DiscriminatorSpec& dspec);

    Generator& generator() { return gen_; }
    Discriminator& discriminator() { return disc_; }
    const GeneratorSpec& generator_spec() const { return gen_->spec(); }

    bool trained() const { return trained_; }
    void mark_trained() { trained_ = true; }

    /// Per-depth porosity span seen in training; drives the out-of-range flag.
    std::vector<std::pair<double, double>> phi_ranges;

    GenerateResult generate(double porosity, const DepthLabel& depth, int count,
                            std::uint64_t seed) const;

    void save(const std::filesystem::path& path, const GanTrainConfig& config, int epoch,
              const std::string& extra_blob = {}) const;
    static LoadedCGan load(const std::filesystem::path& path);

private:
    Generator gen_{nullptr};
    Discriminator disc_{nullptr};
    bool trained_ = false;
};

struct LoadedCGan {
    CGan model;
    GanTrainConfig config;
    int epoch = 0;
    bool toy = false;
    std::string extra_blob;
};

/// Probe hook used for the per-epoch porosity tracking column; maps a batch
/// of generated images to their measured porosities.
using ProbeFn = std::function<double(const std::vector<RgbImage>&)>;

class GanTrainer {
public:
    GanTrainer(const GeneratorSpec& gspec, const DiscriminatorSpec& dspec,
               const GanTrainConfig& config);

    /// One discriminator update on m/2 real + m/2 generated samples with the
    /// real samples' conditions, then one generator update on m fresh
    /// noise/condition draws from the empirical pool.
    std::pair<double, double> train_step(const std::vector<const GanSample*>& real_half_batch);

    /// Full loop over the unified dataset; optional probe measures per-depth
    /// porosity each epoch; checkpoints land under checkpoint_dir when set.
    TrainingLog train(const std::vector<GanSample>& dataset,
                      const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt,
                      const ProbeFn& probe = nullptr, int probe_batch = 4,
                      const std::optional<std::filesystem::path>& resume_from = std::nullopt);

    CGan& model() { return model_; }
    void set_epoch_lr(int epoch);

private:
    void set_condition_pool(const std::vector<GanSample>& dataset);
    torch::Tensor sample_latent(int count);
    std::pair<torch::Tensor, torch::Tensor> sample_conditions(int count);

    CGan model_;
    GanTrainConfig config_;
    std::unique_ptr<torch::optim::Adam> opt_g_, opt_d_;
    std::vector<std::pair<double, int>> condition_pool_;
    std::mt19937_64 rng_;
    int start_epoch_ = 0;
};

/// Total trainable parameter count of the generator/discriminator pair.
std::int64_t parameter_count(Preset preset, int n_depths = 4, bool toy = false);

}  // namespace porogen::gan
