#include "porogen/gan/cgan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "porogen/core/errors.hpp"
#include "porogen/nn/checkpoint.hpp"
#include "porogen/nn/convert.hpp"

namespace porogen::gan {

namespace {

constexpr double kScoreEps = 1e-7;

int scaled(int channels, bool toy) { return toy ? std::max(1, channels / 4) : channels; }

std::string pack_blobs(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        std::uint64_t n = p.size();
        out.append(reinterpret_cast<const char*>(&n), sizeof(n));
        out.append(p);
    }
    return out;
}

std::vector<std::string> unpack_blobs(const std::string& blob) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos < blob.size()) {
        if (pos + sizeof(std::uint64_t) > blob.size())
            throw ValidationError("corrupt checkpoint blob");
        std::uint64_t n = 0;
        std::memcpy(&n, blob.data() + pos, sizeof(n));
        pos += sizeof(n);
        if (pos + n > blob.size()) throw ValidationError("corrupt checkpoint blob");
        parts.emplace_back(blob.substr(pos, n));
        pos += n;
    }
    return parts;
}

template <typename M>
std::string module_to_string(const M& module) {
    std::ostringstream ss;
    torch::save(module, ss);
    return ss.str();
}

template <typename M>
void module_from_string(M& module, const std::string& s) {
    std::istringstream ss(s);
    torch::load(module, ss);
}

}  // namespace

Preset preset_from_string(const std::string& name) {
    if (name == "original") return Preset::Original;
    if (name == "model-a" || name == "a") return Preset::ModelA;
    if (name == "model-b" || name == "b") return Preset::ModelB;
    throw ValidationError("unknown architecture preset: " + name);
}

std::string to_string(Preset preset) {
    switch (preset) {
        case Preset::Original: return "original";
        case Preset::ModelA: return "model-a";
        case Preset::ModelB: return "model-b";
    }
    throw ValidationError("invalid preset value");
}

GeneratorSpec make_generator_spec(Preset preset, int n_depths, bool toy) {
    if (n_depths < 1) throw ValidationError("n_depths must be >= 1");
    GeneratorSpec spec;
    spec.preset = preset;
    spec.n_depths = n_depths;
    spec.base_size = toy ? 6 : 30;
    switch (preset) {
        case Preset::Original:
            spec.dense_channels = 512;
            spec.block_channels = {256, 128, 64, 32, 3};
            spec.block_strides = {1, 2, 2, 2, 2};
            spec.block_kernels = {3, 3, 3, 5, 5};
            break;
        case Preset::ModelA:
            // Extra stride-1 refinement block at the base resolution.
            spec.dense_channels = 384;
            spec.block_channels = {256, 128, 96, 64, 32, 3};
            spec.block_strides = {1, 1, 2, 2, 2, 2};
            spec.block_kernels = {3, 3, 3, 3, 5, 5};
            break;
        case Preset::ModelB:
            spec.dense_channels = 256;
            spec.block_channels = {192, 96, 48, 24, 3};
            spec.block_strides = {1, 2, 2, 2, 2};
            spec.block_kernels = {3, 3, 3, 5, 5};
            break;
    }
    if (toy) {
        spec.dense_channels = scaled(spec.dense_channels, true);
        for (std::size_t i = 0; i + 1 < spec.block_channels.size(); ++i)
            spec.block_channels[i] = scaled(spec.block_channels[i], true);
    }
    return spec;
}

DiscriminatorSpec make_discriminator_spec(Preset preset, int n_depths, bool toy) {
    if (n_depths < 1) throw ValidationError("n_depths must be >= 1");
    DiscriminatorSpec spec;
    spec.preset = preset;
    spec.n_depths = n_depths;
    spec.image_size = toy ? 96 : 480;
    switch (preset) {
        case Preset::Original: spec.filters = {64, 128, 256, 256, 256}; break;
        case Preset::ModelA: spec.filters = {56, 112, 224, 224, 224}; break;
        case Preset::ModelB: spec.filters = {48, 96, 192, 192, 192}; break;
    }
    if (toy)
        for (auto& f : spec.filters) f = scaled(f, true);
    return spec;
}

torch::Tensor concat_condition_planes(const torch::Tensor& features,
                                      const torch::Tensor& porosity,
                                      const torch::Tensor& depth_one_hot) {
    if (features.dim() != 4) throw ValidationError("condition concat expects BxCxHxW features");
    auto b = features.size(0);
    auto h = features.size(2);
    auto w = features.size(3);
    if (porosity.size(0) != b || depth_one_hot.size(0) != b)
        throw ValidationError("condition batch size mismatch");
    auto opts = features.options();
    auto depth_planes =
        depth_one_hot.to(opts).view({b, depth_one_hot.size(1), 1, 1}).expand({b, depth_one_hot.size(1), h, w});
    auto phi_plane = porosity.to(opts).view({b, 1, 1, 1}).expand({b, 1, h, w});
    return torch::cat({features, depth_planes, phi_plane}, 1);
}

torch::Tensor assemble_discriminator_input(const torch::Tensor& images,
                                           const torch::Tensor& porosity,
                                           const torch::Tensor& depth_one_hot) {
    if (images.dim() != 4 || images.size(1) != 3)
        throw ValidationError("discriminator input expects Bx3xHxW images");
    return concat_condition_planes(images, porosity, depth_one_hot);
}

GeneratorImpl::GeneratorImpl(const GeneratorSpec& spec) : spec_(spec) {
    if (spec_.block_channels.size() != spec_.block_strides.size() ||
        spec_.block_channels.size() != spec_.block_kernels.size())
        throw ValidationError("generator block lists must have equal length");
    if (spec_.block_channels.empty() || spec_.block_channels.back() != 3)
        throw ValidationError("generator must end in a 3-channel block");
    dense_ = register_module(
        "dense", torch::nn::Linear(spec_.latent_dim,
                                   spec_.dense_channels * spec_.base_size * spec_.base_size));
    int in = spec_.input_channels();
    for (std::size_t i = 0; i < spec_.block_channels.size(); ++i) {
        int out = spec_.block_channels[i];
        int k = spec_.block_kernels[i];
        int stride = spec_.block_strides[i];
        auto conv = torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(in, out, k)
                                                   .stride(stride)
                                                   .padding(k / 2)
                                                   .output_padding(stride - 1));
        convs_->push_back(register_module("conv" + std::to_string(i), conv));
        if (i + 1 != spec_.block_channels.size())
            norms_->push_back(
                register_module("norm" + std::to_string(i), torch::nn::BatchNorm2d(out)));
        in = out;
    }
}

torch::Tensor GeneratorImpl::assemble_input(const torch::Tensor& z, const torch::Tensor& porosity,
                                            const torch::Tensor& depth_one_hot) {
    if (z.dim() != 2 || z.size(1) != spec_.latent_dim)
        throw ValidationError("latent length mismatch: expected " +
                              std::to_string(spec_.latent_dim));
    if (depth_one_hot.size(1) != spec_.n_depths)
        throw ValidationError("depth one-hot width mismatch");
    auto b = z.size(0);
    auto x = torch::leaky_relu(dense_->forward(z), 0.2)
                 .view({b, spec_.dense_channels, spec_.base_size, spec_.base_size});
    return concat_condition_planes(x, porosity, depth_one_hot);
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& z, const torch::Tensor& porosity,
                                     const torch::Tensor& depth_one_hot) {
    auto x = assemble_input(z, porosity, depth_one_hot);
    for (std::size_t i = 0; i < convs_->size(); ++i) {
        x = convs_[i]->as<torch::nn::ConvTranspose2d>()->forward(x);
        if (i + 1 != convs_->size()) {
            x = norms_[i]->as<torch::nn::BatchNorm2d>()->forward(x);
            x = torch::leaky_relu(x, 0.2);
        } else {
            x = torch::tanh(x);
        }
    }
    return x;
}

DiscriminatorImpl::DiscriminatorImpl(const DiscriminatorSpec& spec) : spec_(spec) {
    if (spec_.filters.size() != spec_.kernels.size())
        throw ValidationError("discriminator filter/kernel lists must have equal length");
    int in = spec_.input_channels();
    int size = spec_.image_size;
    for (std::size_t i = 0; i < spec_.filters.size(); ++i) {
        int out = spec_.filters[i];
        int k = spec_.kernels[i];
        convs_->push_back(register_module(
            "conv" + std::to_string(i),
            torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, k).stride(2).padding(k / 2))));
        in = out;
        size = (size + 1) / 2;
    }
    head_ = register_module("head", torch::nn::Linear(in * size * size, 1));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& images, const torch::Tensor& porosity,
                                         const torch::Tensor& depth_one_hot) {
    if (images.size(2) != spec_.image_size || images.size(3) != spec_.image_size)
        throw ValidationError("discriminator image size mismatch: expected " +
                              std::to_string(spec_.image_size));
    auto x = assemble_discriminator_input(images, porosity, depth_one_hot);
    for (const auto& conv : *convs_) {
        x = conv->as<torch::nn::Conv2d>()->forward(x);
        x = torch::leaky_relu(x, 0.2);
        x = torch::dropout(x, spec_.dropout, is_training());
    }
    x = x.flatten(1);
    return torch::sigmoid(head_->forward(x)).squeeze(1);
}

torch::Tensor discriminator_loss(const torch::Tensor& real_scores,
                                 const torch::Tensor& fake_scores) {
    if (real_scores.numel() == 0 || fake_scores.numel() == 0)
        throw ValidationError("discriminator loss needs non-empty score batches");
    auto r = real_scores.clamp(kScoreEps, 1.0 - kScoreEps);
    auto f = fake_scores.clamp(kScoreEps, 1.0 - kScoreEps);
    return -r.log().mean() - (1.0 - f).log().mean();
}

torch::Tensor generator_loss(const torch::Tensor& fake_scores) {
    if (fake_scores.numel() == 0) throw ValidationError("generator loss needs non-empty scores");
    auto f = fake_scores.clamp(kScoreEps, 1.0 - kScoreEps);
    return -f.log().mean();
}

double lr_schedule(int epoch, const GanTrainConfig& config) {
    if (epoch < 0 || epoch > config.epochs)
        throw ValidationError("epoch out of schedule range: " + std::to_string(epoch));
    double t = config.epochs > 0 ? static_cast<double>(epoch) / config.epochs : 1.0;
    return config.lr_start + (config.lr_end - config.lr_start) * t;
}

CGan::CGan(const GeneratorSpec& gspec, const DiscriminatorSpec& dspec)
    : gen_(gspec), disc_(dspec) {
    if (gspec.output_size() != dspec.image_size)
        throw ValidationError("generator output size does not match discriminator input");
    if (gspec.n_depths != dspec.n_depths)
        throw ValidationError("generator/discriminator depth-count mismatch");
    phi_ranges.assign(static_cast<std::size_t>(gspec.n_depths), {0.0, 0.0});
}

GenerateResult CGan::generate(double porosity, const DepthLabel& depth, int count,
                              std::uint64_t seed) const {
    if (!trained_) throw StateError("generate requires a trained model");
    if (depth.n_depths != gen_->spec().n_depths)
        throw ValidationError("depth label does not match model depth count");
    if (count < 1) throw ValidationError("generation count must be >= 1");

    GenerateResult result;
    const auto& range = phi_ranges[static_cast<std::size_t>(depth.index)];
    result.out_of_range = range.second > range.first &&
                          (porosity < range.first || porosity > range.second);

    auto& gen = const_cast<Generator&>(gen_);
    bool was_training = gen->is_training();
    gen->eval();
    torch::NoGradGuard guard;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> uni(0.0f, 1.0f);
    int latent = gen->spec().latent_dim;
    auto phi = torch::full({count}, porosity, torch::kFloat32);
    auto one_hot = torch::zeros({count, gen->spec().n_depths}, torch::kFloat32);
    one_hot.index_put_({torch::indexing::Slice(), depth.index}, 1.0f);
    auto z = torch::empty({count, latent}, torch::kFloat32);
    auto* zp = z.data_ptr<float>();
    for (std::int64_t i = 0; i < z.numel(); ++i) zp[i] = uni(rng);

    auto images = gen->forward(z, phi, one_hot);
    for (int i = 0; i < count; ++i) result.images.push_back(nn::to_image(images[i]));
    if (was_training) gen->train();
    return result;
}

void CGan::save(const std::filesystem::path& path, const GanTrainConfig& config, int epoch,
                const std::string& extra_blob) const {
    nlohmann::json header;
    header["kind"] = "cgan";
    header["preset"] = to_string(gen_->spec().preset);
    header["n_depths"] = gen_->spec().n_depths;
    header["toy"] = gen_->spec().base_size == 6;
    header["epoch"] = epoch;
    header["trained"] = trained_;
    const auto& gs = gen_->spec();
    header["generator_spec"] = {{"latent_dim", gs.latent_dim},
                                {"dense_channels", gs.dense_channels},
                                {"base_size", gs.base_size},
                                {"block_channels", gs.block_channels},
                                {"block_strides", gs.block_strides},
                                {"block_kernels", gs.block_kernels}};
    const auto& ds = disc_->spec();
    header["discriminator_spec"] = {{"image_size", ds.image_size},
                                    {"filters", ds.filters},
                                    {"kernels", ds.kernels},
                                    {"dropout", ds.dropout}};
    header["config"] = {{"epochs", config.epochs},       {"batch_size", config.batch_size},
                        {"beta1", config.beta1},         {"beta2", config.beta2},
                        {"lr_start", config.lr_start},   {"lr_end", config.lr_end},
                        {"checkpoint_every", config.checkpoint_every},
                        {"seed", config.seed}};
    auto& ranges = header["phi_ranges"] = nlohmann::json::array();
    for (const auto& [lo, hi] : phi_ranges) ranges.push_back({lo, hi});
    nn::write_checkpoint(path, header,
                         pack_blobs({module_to_string(gen_), module_to_string(disc_), extra_blob}));
}

LoadedCGan CGan::load(const std::filesystem::path& path) {
    std::string blob;
    auto header = nn::read_checkpoint(path, blob);
    if (header.value("kind", "") != "cgan")
        throw ValidationError("checkpoint is not a generator model: " + path.string());
    auto preset = preset_from_string(header.at("preset").get<std::string>());
    int n_depths = header.at("n_depths").get<int>();
    bool toy = header.at("toy").get<bool>();

    GeneratorSpec gspec;
    gspec.preset = preset;
    gspec.n_depths = n_depths;
    const auto& gj = header.at("generator_spec");
    gspec.latent_dim = gj.at("latent_dim").get<int>();
    gspec.dense_channels = gj.at("dense_channels").get<int>();
    gspec.base_size = gj.at("base_size").get<int>();
    gspec.block_channels = gj.at("block_channels").get<std::vector<int>>();
    gspec.block_strides = gj.at("block_strides").get<std::vector<int>>();
    gspec.block_kernels = gj.at("block_kernels").get<std::vector<int>>();

    DiscriminatorSpec dspec;
    dspec.preset = preset;
    dspec.n_depths = n_depths;
    const auto& dj = header.at("discriminator_spec");
    dspec.image_size = dj.at("image_size").get<int>();
    dspec.filters = dj.at("filters").get<std::vector<int>>();
    dspec.kernels = dj.at("kernels").get<std::vector<int>>();
    dspec.dropout = dj.at("dropout").get<double>();

    CGan model(gspec, dspec);
    auto parts = unpack_blobs(blob);
    if (parts.size() != 3) throw ValidationError("unexpected checkpoint layout: " + path.string());
    module_from_string(model.gen_, parts[0]);
    module_from_string(model.disc_, parts[1]);
    model.trained_ = header.value("trained", false);
    model.phi_ranges.clear();
    for (const auto& r : header.at("phi_ranges"))
        model.phi_ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());

    LoadedCGan loaded{std::move(model), {}, header.at("epoch").get<int>(), toy, parts[2]};
    const auto& c = header.at("config");
    loaded.config.epochs = c.at("epochs").get<int>();
    loaded.config.batch_size = c.at("batch_size").get<int>();
    loaded.config.beta1 = c.at("beta1").get<double>();
    loaded.config.beta2 = c.at("beta2").get<double>();
    loaded.config.lr_start = c.at("lr_start").get<double>();
    loaded.config.lr_end = c.at("lr_end").get<double>();
    loaded.config.checkpoint_every = c.at("checkpoint_every").get<int>();
    loaded.config.seed = c.at("seed").get<std::uint64_t>();
    return loaded;
}

namespace {

// Seeds the global RNG before member initializers run so weight init is a
// pure function of the config seed.
const GeneratorSpec& seed_torch_rng(const GeneratorSpec& gspec, std::uint64_t seed) {
    torch::manual_seed(static_cast<std::int64_t>(seed));
    return gspec;
}

}  // namespace

GanTrainer::GanTrainer(const GeneratorSpec& gspec, const DiscriminatorSpec& dspec,
                       const GanTrainConfig& config)
    : model_(seed_torch_rng(gspec, config.seed), dspec), config_(config), rng_(config.seed) {
    if (config_.batch_size < 2 || config_.batch_size % 2 != 0)
        throw ValidationError("batch size must be even and >= 2");
    if (config_.epochs < 1) throw ValidationError("epochs must be >= 1");
    torch::manual_seed(static_cast<std::int64_t>(config_.seed));
    auto opts = torch::optim::AdamOptions(config_.lr_start).betas({config_.beta1, config_.beta2});
    opt_g_ = std::make_unique<torch::optim::Adam>(model_.generator()->parameters(), opts);
    opt_d_ = std::make_unique<torch::optim::Adam>(model_.discriminator()->parameters(), opts);
}

void GanTrainer::set_epoch_lr(int epoch) {
    double lr = lr_schedule(epoch, config_);
    for (auto* opt : {opt_g_.get(), opt_d_.get()})
        for (auto& group : opt->param_groups())
            static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

void GanTrainer::set_condition_pool(const std::vector<GanSample>& dataset) {
    condition_pool_.clear();
    int n_depths = model_.generator_spec().n_depths;
    std::vector<std::pair<double, double>> ranges(
        static_cast<std::size_t>(n_depths),
        {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (const auto& s : dataset) {
        if (s.depth < 0 || s.depth >= n_depths)
            throw ValidationError("sample depth outside model depth count");
        condition_pool_.emplace_back(s.porosity, s.depth);
        auto& [lo, hi] = ranges[static_cast<std::size_t>(s.depth)];
        lo = std::min(lo, s.porosity);
        hi = std::max(hi, s.porosity);
    }
    for (auto& [lo, hi] : ranges)
        if (lo > hi) lo = hi = 0.0;
    model_.phi_ranges = ranges;
}

torch::Tensor GanTrainer::sample_latent(int count) {
    std::uniform_real_distribution<float> uni(0.0f, 1.0f);
    auto z = torch::empty({count, model_.generator_spec().latent_dim}, torch::kFloat32);
    auto* p = z.data_ptr<float>();
    for (std::int64_t i = 0; i < z.numel(); ++i) p[i] = uni(rng_);
    return z;
}

std::pair<torch::Tensor, torch::Tensor> GanTrainer::sample_conditions(int count) {
    if (condition_pool_.empty()) throw StateError("condition pool not initialized");
    std::uniform_int_distribution<std::size_t> pick(0, condition_pool_.size() - 1);
    int n_depths = model_.generator_spec().n_depths;
    auto phi = torch::empty({count}, torch::kFloat32);
    auto one_hot = torch::zeros({count, n_depths}, torch::kFloat32);
    for (int i = 0; i < count; ++i) {
        const auto& [p, d] = condition_pool_[pick(rng_)];
        phi[i] = static_cast<float>(p);
        one_hot[i][d] = 1.0f;
    }
    return {phi, one_hot};
}

std::pair<double, double> GanTrainer::train_step(
    const std::vector<const GanSample*>& real_half_batch) {
    const int half = config_.batch_size / 2;
    if (static_cast<int>(real_half_batch.size()) != half)
        throw ValidationError("train_step expects exactly m/2 real samples");

    auto& gen = model_.generator();
    auto& disc = model_.discriminator();
    gen->train();
    disc->train();
    int n_depths = model_.generator_spec().n_depths;

    // Discriminator: m/2 real and m/2 fake drawn under the reals' conditions.
    std::vector<torch::Tensor> imgs;
    auto phi = torch::empty({half}, torch::kFloat32);
    auto one_hot = torch::zeros({half, n_depths}, torch::kFloat32);
    for (int i = 0; i < half; ++i) {
        imgs.push_back(real_half_batch[static_cast<std::size_t>(i)]->image);
        phi[i] = static_cast<float>(real_half_batch[static_cast<std::size_t>(i)]->porosity);
        one_hot[i][real_half_batch[static_cast<std::size_t>(i)]->depth] = 1.0f;
    }
    auto real = torch::stack(imgs);
    torch::Tensor fake;
    {
        torch::NoGradGuard guard;
        fake = gen->forward(sample_latent(half), phi, one_hot);
    }
    opt_d_->zero_grad();
    auto loss_d = discriminator_loss(disc->forward(real, phi, one_hot),
                                     disc->forward(fake, phi, one_hot));
    loss_d.backward();
    opt_d_->step();

    // Generator: m fresh noise/condition draws from the empirical pool.
    auto [gphi, gone_hot] = sample_conditions(config_.batch_size);
    opt_g_->zero_grad();
    auto generated = gen->forward(sample_latent(config_.batch_size), gphi, gone_hot);
    auto loss_g = generator_loss(disc->forward(generated, gphi, gone_hot));
    loss_g.backward();
    opt_g_->step();

    double ld = loss_d.item<double>();
    double lg = loss_g.item<double>();
    if (!std::isfinite(ld) || !std::isfinite(lg))
        throw DivergenceError("non-finite adversarial loss", 0);
    return {ld, lg};
}

TrainingLog GanTrainer::train(const std::vector<GanSample>& dataset,
                              const std::optional<std::filesystem::path>& checkpoint_dir,
                              const ProbeFn& probe, int probe_batch,
                              const std::optional<std::filesystem::path>& resume_from) {
    const int half = config_.batch_size / 2;
    if (static_cast<int>(dataset.size()) < half)
        throw ValidationError("dataset smaller than half a batch");
    set_condition_pool(dataset);
    int n_depths = model_.generator_spec().n_depths;

    if (resume_from) {
        auto loaded = CGan::load(*resume_from);
        auto parts = unpack_blobs(loaded.extra_blob);
        if (parts.size() != 4) throw ValidationError("checkpoint lacks optimizer state");
        model_.phi_ranges = loaded.model.phi_ranges;
        module_from_string(model_.generator(), module_to_string(loaded.model.generator()));
        module_from_string(model_.discriminator(), module_to_string(loaded.model.discriminator()));
        module_from_string(*opt_g_, parts[0]);
        module_from_string(*opt_d_, parts[1]);
        std::istringstream rs(parts[2]);
        rs >> rng_;
        {
            torch::Tensor torch_state;
            std::istringstream ts(parts[3]);
            torch::load(torch_state, ts);
            auto generator = at::detail::getDefaultCPUGenerator();
            generator.set_state(torch_state);
        }
        start_epoch_ = loaded.epoch + 1;
        if (loaded.model.trained()) model_.mark_trained();
    }

    // Probe targets: per-depth midpoints of the trained porosity spans.
    TrainingLog log;
    for (const auto& [lo, hi] : model_.phi_ranges) log.probe_targets.push_back(0.5 * (lo + hi));

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double best_probe_err = std::numeric_limits<double>::infinity();

    for (int epoch = start_epoch_; epoch < config_.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        set_epoch_lr(epoch);
        // Re-derive the permutation from identity so each epoch's order is a
        // pure function of the rng_ state; a resumed run then reproduces it.
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng_);

        double sum_d = 0.0, sum_g = 0.0;
        int steps = 0;
        for (std::size_t start = 0; start + static_cast<std::size_t>(half) <= order.size();
             start += static_cast<std::size_t>(half)) {
            std::vector<const GanSample*> batch;
            for (int i = 0; i < half; ++i) batch.push_back(&dataset[order[start + i]]);
            try {
                auto [ld, lg] = train_step(batch);
                sum_d += ld;
                sum_g += lg;
            } catch (const DivergenceError& e) {
                throw DivergenceError(e.what(), epoch);
            }
            ++steps;
        }

        TrainLogRow row;
        row.epoch = epoch;
        row.loss_d = steps > 0 ? sum_d / steps : 0.0;
        row.loss_g = steps > 0 ? sum_g / steps : 0.0;

        model_.mark_trained();
        if (probe) {
            double probe_err = 0.0;
            for (int d = 0; d < n_depths; ++d) {
                auto gen = model_.generate(log.probe_targets[static_cast<std::size_t>(d)],
                                           DepthLabel(d, n_depths), probe_batch,
                                           config_.seed + 7919ull * (epoch + 1) + d);
                double measured = probe(gen.images);
                row.probe_porosity.push_back(measured);
                probe_err +=
                    std::abs(measured - log.probe_targets[static_cast<std::size_t>(d)]);
            }
            if (checkpoint_dir && probe_err < best_probe_err) {
                best_probe_err = probe_err;
                model_.save(*checkpoint_dir / "best.ckpt", config_, epoch);
            }
        }

        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log.rows.push_back(row);

        if (checkpoint_dir &&
            ((epoch + 1) % config_.checkpoint_every == 0 || epoch + 1 == config_.epochs)) {
            std::ostringstream rs;
            rs << rng_;
            std::ostringstream ts;
            torch::save(at::detail::getDefaultCPUGenerator().get_state(), ts);
            auto extra = pack_blobs(
                {module_to_string(*opt_g_), module_to_string(*opt_d_), rs.str(), ts.str()});
            model_.save(*checkpoint_dir / ("epoch_" + std::to_string(epoch + 1) + ".ckpt"),
                        config_, epoch, extra);
            model_.save(*checkpoint_dir / "latest.ckpt", config_, epoch, extra);
        }
    }
    return log;
}

std::int64_t parameter_count(Preset preset, int n_depths, bool toy) {
    Generator gen(make_generator_spec(preset, n_depths, toy));
    Discriminator disc(make_discriminator_spec(preset, n_depths, toy));
    std::int64_t total = 0;
    for (const auto& p : gen->parameters(true)) total += p.numel();
    for (const auto& p : disc->parameters(true)) total += p.numel();
    return total;
}

}  // namespace porogen::gan
