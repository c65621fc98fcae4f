#include "porogen/seg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "porogen/nn/checkpoint.hpp"
#include "porogen/nn/convert.hpp"

namespace porogen::seg {

namespace {

constexpr double kDiceEps = 1e-6;
constexpr double kProbEps = 1e-7;

torch::nn::Sequential double_conv(int in, int out) {
    using namespace torch::nn;
    return Sequential(Conv2d(Conv2dOptions(in, out, 3).padding(1).bias(false)), BatchNorm2d(out),
                      ReLU(ReLUOptions(true)),
                      Conv2d(Conv2dOptions(out, out, 3).padding(1).bias(false)), BatchNorm2d(out),
                      ReLU(ReLUOptions(true)));
}

// Additive attention gate: skip features are reweighted by
// sigmoid(psi(relu(Wg g + Wx x))) before concatenation.
struct AttentionGateImpl : torch::nn::Module {
    torch::nn::Conv2d wg{nullptr}, wx{nullptr}, psi{nullptr};

    AttentionGateImpl(int gating_ch, int skip_ch, int inter_ch) {
        wg = register_module("wg", torch::nn::Conv2d(torch::nn::Conv2dOptions(gating_ch, inter_ch, 1)));
        wx = register_module("wx", torch::nn::Conv2d(torch::nn::Conv2dOptions(skip_ch, inter_ch, 1)));
        psi = register_module("psi", torch::nn::Conv2d(torch::nn::Conv2dOptions(inter_ch, 1, 1)));
    }

    torch::Tensor forward(const torch::Tensor& g, const torch::Tensor& x) {
        auto a = torch::relu(wg->forward(g) + wx->forward(x));
        return x * torch::sigmoid(psi->forward(a));
    }
};
TORCH_MODULE(AttentionGate);

}  // namespace

class AttentionUNetImpl : public torch::nn::Module {
public:
    explicit AttentionUNetImpl(const SegNetSpec& spec) : spec_(spec) {
        int ch = spec.base_filters;
        int in = 3;
        for (int i = 0; i < spec.encoder_depth; ++i) {
            encoders_.push_back(register_module("enc" + std::to_string(i), double_conv(in, ch)));
            in = ch;
            ch *= 2;
        }
        bottleneck_ = register_module("bottleneck", double_conv(in, ch));
        int up_in = ch;
        for (int i = spec.encoder_depth - 1; i >= 0; --i) {
            int skip_ch = spec.base_filters << i;
            ups_.push_back(register_module(
                "up" + std::to_string(i),
                torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(up_in, skip_ch, 2).stride(2))));
            if (spec.attention_gates)
                gates_.push_back(register_module("gate" + std::to_string(i),
                                                 AttentionGate(skip_ch, skip_ch, skip_ch / 2)));
            decoders_.push_back(
                register_module("dec" + std::to_string(i), double_conv(2 * skip_ch, skip_ch)));
            up_in = skip_ch;
        }
        head_ = register_module("head", torch::nn::Conv2d(torch::nn::Conv2dOptions(spec.base_filters, 1, 1)));
        if (spec.deep_supervision) {
            // auxiliary heads on the two coarsest decoder stages
            int n_aux = std::min<int>(2, spec.encoder_depth - 1);
            for (int a = 0; a < n_aux; ++a) {
                int ch_aux = spec.base_filters << (spec.encoder_depth - 1 - a);
                aux_heads_.push_back(register_module(
                    "aux" + std::to_string(a), torch::nn::Conv2d(torch::nn::Conv2dOptions(ch_aux, 1, 1))));
            }
        }
    }

    /// Logits per head, all upsampled to the input extent; main head first.
    std::vector<torch::Tensor> forward_heads(const torch::Tensor& x) {
        std::vector<torch::Tensor> skips;
        auto h = x;
        for (auto& enc : encoders_) {
            h = enc->forward(h);
            skips.push_back(h);
            h = torch::max_pool2d(h, 2);
        }
        h = bottleneck_->forward(h);
        std::vector<torch::Tensor> decoder_outputs;
        for (std::size_t i = 0; i < ups_.size(); ++i) {
            auto up = ups_[i]->forward(h);
            auto skip = skips[skips.size() - 1 - i];
            if (spec_.attention_gates) skip = gates_[i]->forward(up, skip);
            h = decoders_[i]->forward(torch::cat({up, skip}, 1));
            decoder_outputs.push_back(h);
        }
        std::vector<torch::Tensor> heads;
        heads.push_back(head_->forward(h));
        auto full = heads[0].sizes().vec();
        for (std::size_t a = 0; a < aux_heads_.size(); ++a) {
            auto logits = aux_heads_[a]->forward(decoder_outputs[a]);
            heads.push_back(torch::nn::functional::interpolate(
                logits, torch::nn::functional::InterpolateFuncOptions()
                            .size(std::vector<std::int64_t>{full[2], full[3]})
                            .mode(torch::kBilinear)
                            .align_corners(false)));
        }
        return heads;
    }

    torch::Tensor forward(const torch::Tensor& x) { return forward_heads(x)[0]; }

private:
    SegNetSpec spec_;
    std::vector<torch::nn::Sequential> encoders_;
    torch::nn::Sequential bottleneck_{nullptr};
    std::vector<torch::nn::ConvTranspose2d> ups_;
    std::vector<AttentionGate> gates_;
    std::vector<torch::nn::Sequential> decoders_;
    torch::nn::Conv2d head_{nullptr};
    std::vector<torch::nn::Conv2d> aux_heads_;
};

torch::Tensor dice_coefficient(const torch::Tensor& pred, const torch::Tensor& truth) {
    TORCH_CHECK(pred.sizes() == truth.sizes(), "dice_coefficient: shape mismatch");
    auto p = pred.reshape(-1);
    auto t = truth.reshape(-1);
    auto inter = (p * t).sum();
    return 2.0 * inter / (p.sum() + t.sum() + kDiceEps);
}

torch::Tensor hybrid_loss(const torch::Tensor& pred, const torch::Tensor& truth, double dice_weight,
                          double bce_weight) {
    TORCH_CHECK(pred.sizes() == truth.sizes(), "hybrid_loss: shape mismatch");
    auto p = pred.clamp(kProbEps, 1.0 - kProbEps);
    auto bce = -(truth * p.log() + (1.0 - truth) * (1.0 - p).log()).mean();
    return dice_weight * (1.0 - dice_coefficient(p, truth)) + bce_weight * bce;
}

Segmenter::Segmenter() : Segmenter(SegNetSpec{}) {}

Segmenter::Segmenter(const SegNetSpec& spec)
    : spec_(spec), net_(std::make_shared<AttentionUNetImpl>(spec)) {}

torch::Tensor Segmenter::predict(const torch::Tensor& batch) const {
    return torch::sigmoid(net_->forward(batch));
}

BinaryMask Segmenter::segment(const RgbImage& image) const {
    if (!trained_) throw StateError("Segmenter::segment: model not trained");
    torch::NoGradGuard guard;
    net_->eval();
    auto x = nn::to_tensor(image).unsqueeze(0);
    const int factor = 1 << spec_.encoder_depth;
    const auto h = x.size(2), w = x.size(3);
    const auto ph = (factor - h % factor) % factor, pw = (factor - w % factor) % factor;
    if (ph > 0 || pw > 0)
        x = torch::reflection_pad2d(x, {0, pw, 0, ph});
    auto prob = predict(x);
    if (ph > 0 || pw > 0) prob = prob.slice(2, 0, h).slice(3, 0, w);
    return nn::to_mask(prob.squeeze(0));
}

SegMetrics Segmenter::evaluate(const std::vector<RgbImage>& images,
                               const std::vector<BinaryMask>& masks) const {
    TORCH_CHECK(images.size() == masks.size() && !images.empty(), "evaluate: bad dataset");
    SegMetrics m;
    for (std::size_t i = 0; i < images.size(); ++i) {
        BinaryMask pred = segment(images[i]);
        const auto& truth = masks[i];
        double inter = 0, psum = 0, tsum = 0, correct = 0;
        for (std::size_t j = 0; j < truth.data.size(); ++j) {
            inter += pred.data[j] && truth.data[j];
            psum += pred.data[j];
            tsum += truth.data[j];
            correct += pred.data[j] == truth.data[j];
        }
        double uni = psum + tsum - inter;
        m.dice += (psum + tsum) > 0 ? 2.0 * inter / (psum + tsum) : 1.0;
        m.iou += uni > 0 ? inter / uni : 1.0;
        m.accuracy += correct / truth.data.size();
        m.porosity_mae += std::abs(porosity_of_mask(pred) - porosity_of_mask(truth));
    }
    const double n = static_cast<double>(images.size());
    m.dice /= n;
    m.iou /= n;
    m.accuracy /= n;
    m.porosity_mae /= n;
    return m;
}

void Segmenter::save(const std::filesystem::path& path) const {
    nlohmann::json header = {{"kind", "segmenter"},
                             {"version", 1},
                             {"trained", trained_},
                             {"encoder_depth", spec_.encoder_depth},
                             {"base_filters", spec_.base_filters},
                             {"attention_gates", spec_.attention_gates},
                             {"deep_supervision", spec_.deep_supervision},
                             {"supervision_weights", spec_.supervision_weights}};
    std::ostringstream blob;
    torch::save(net_, blob);
    nn::write_checkpoint(path, header, blob.str());
}

Segmenter Segmenter::load(const std::filesystem::path& path) {
    std::string blob;
    nlohmann::json header = nn::read_checkpoint(path, blob);
    if (header.value("kind", "") != "segmenter")
        throw ValidationError("not a segmenter checkpoint: " + path.string());
    SegNetSpec spec;
    spec.encoder_depth = header.at("encoder_depth");
    spec.base_filters = header.at("base_filters");
    spec.attention_gates = header.at("attention_gates");
    spec.deep_supervision = header.at("deep_supervision");
    spec.supervision_weights = header.at("supervision_weights").get<std::vector<double>>();
    Segmenter seg(spec);
    std::istringstream in(blob);
    torch::load(seg.net_, in);
    seg.trained_ = header.value("trained", false);
    return seg;
}

SegTrainResult train_segmenter(const std::vector<RgbImage>& images,
                               const std::vector<BinaryMask>& masks, const SegTrainConfig& config,
                               const SegNetSpec& spec) {
    if (images.size() != masks.size()) throw ValidationError("train_segmenter: image/mask count mismatch");
    if (std::abs(config.dice_weight + config.bce_weight - 1.0) > 1e-9)
        throw ValidationError("train_segmenter: dice and bce weights must sum to 1");
    const std::size_t n = images.size();
    const std::size_t n_train = static_cast<std::size_t>(config.train_fraction * n);
    const std::size_t n_val = static_cast<std::size_t>(config.val_fraction * n);
    const std::size_t n_test = n - n_train - n_val;
    if (n_train < 2 || n_val < 2 || n_test < 2)
        throw ValidationError("train_segmenter: each split needs at least 2 samples");

    torch::manual_seed(config.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(config.seed));

    auto stack = [&](std::size_t begin, std::size_t end, bool mask_side) {
        std::vector<torch::Tensor> ts;
        for (std::size_t i = begin; i < end; ++i)
            ts.push_back(mask_side ? nn::to_tensor(masks[order[i]]) : nn::to_tensor(images[order[i]]));
        return torch::stack(ts);
    };
    auto x_train = stack(0, n_train, false), y_train = stack(0, n_train, true);
    auto x_val = stack(n_train, n_train + n_val, false), y_val = stack(n_train, n_train + n_val, true);

    Segmenter seg(spec);
    auto net = seg.net();
    torch::optim::Adam opt(net->parameters(), torch::optim::AdamOptions(config.learning_rate));

    double wsum = 0.0;
    std::vector<double> sw = spec.supervision_weights;
    if (!spec.deep_supervision) sw = {1.0};
    for (double w : sw) wsum += w;

    auto multi_head_loss = [&](const torch::Tensor& xb, const torch::Tensor& yb) {
        auto heads = net->forward_heads(xb);
        torch::Tensor loss = torch::zeros({}, torch::kFloat32);
        for (std::size_t h = 0; h < heads.size() && h < sw.size(); ++h)
            loss = loss + sw[h] * hybrid_loss(torch::sigmoid(heads[h]), yb, config.dice_weight,
                                              config.bce_weight);
        return loss / wsum;
    };

    SegTrainResult result;
    std::mt19937_64 batch_rng(config.seed + 1);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        net->train();
        std::vector<std::size_t> idx(n_train);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), batch_rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t b = 0; b < n_train; b += config.batch_size) {
            std::size_t e = std::min(n_train, b + config.batch_size);
            std::vector<torch::Tensor> xs, ys;
            for (std::size_t i = b; i < e; ++i) {
                xs.push_back(x_train[static_cast<std::int64_t>(idx[i])]);
                ys.push_back(y_train[static_cast<std::int64_t>(idx[i])]);
            }
            auto loss = multi_head_loss(torch::stack(xs), torch::stack(ys));
            if (!std::isfinite(loss.item<double>()))
                throw DivergenceError("train_segmenter: non-finite loss", epoch);
            opt.zero_grad();
            loss.backward();
            opt.step();
            epoch_loss += loss.item<double>();
            ++batches;
        }
        result.train_loss_per_epoch.push_back(epoch_loss / std::max(1, batches));
        net->eval();
        torch::NoGradGuard guard;
        result.val_loss_per_epoch.push_back(multi_head_loss(x_val, y_val).item<double>());
    }

    seg.mark_trained();
    std::vector<RgbImage> test_images;
    std::vector<BinaryMask> test_masks;
    for (std::size_t i = n_train + n_val; i < n; ++i) {
        test_images.push_back(images[order[i]]);
        test_masks.push_back(masks[order[i]]);
    }
    result.test_metrics = seg.evaluate(test_images, test_masks);
    result.segmenter = std::move(seg);
    return result;
}

}  // namespace porogen::seg
