#include <cmath>
#include <filesystem>
#include <random>

#include "porogen/gan/cgan.hpp"
#include "porogen/nn/checkpoint.hpp"
#include "porogen/nn/convert.hpp"
#include "porogen/seg/segmenter.hpp"

// torch pulls in c10 logging whose CHECK macro must not shadow doctest's;
// doctest comes last and redefines the assertion macros.
#undef CHECK
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

using namespace porogen;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "porogen_nn_test";
    std::filesystem::create_directories(dir);
    return dir;
}

// Miniature pair small enough for finite-difference work: 12x12 output.
gan::GeneratorSpec mini_gen_spec() {
    gan::GeneratorSpec spec;
    spec.latent_dim = 8;
    spec.dense_channels = 8;
    spec.base_size = 6;
    spec.n_depths = 2;
    spec.block_channels = {8, 3};
    spec.block_strides = {1, 2};
    spec.block_kernels = {3, 3};
    return spec;
}

gan::DiscriminatorSpec mini_disc_spec() {
    gan::DiscriminatorSpec spec;
    spec.image_size = 12;
    spec.n_depths = 2;
    spec.filters = {4, 4};
    spec.kernels = {3, 3};
    return spec;
}

std::vector<gan::GanSample> mini_dataset(int count, std::uint64_t seed) {
    torch::manual_seed(static_cast<std::int64_t>(seed));
    std::vector<gan::GanSample> data;
    for (int i = 0; i < count; ++i) {
        gan::GanSample s;
        s.image = torch::rand({3, 12, 12}) * 2.0 - 1.0;
        s.porosity = 0.1 + 0.02 * i;
        s.depth = i % 2;
        data.push_back(std::move(s));
    }
    return data;
}

}  // namespace

TEST_CASE("tensor/image conversions round trip") {
    RgbImage img = RgbImage::zeros(9, 7);
    std::mt19937_64 rng(4);
    for (float& v : img.data) v = static_cast<float>(rng() % 256);

    auto t = nn::to_tensor(img);
    REQUIRE(t.sizes() == torch::IntArrayRef({3, 7, 9}));
    CHECK(t.max().item<float>() <= 1.0f);
    CHECK(t.min().item<float>() >= -1.0f);
    auto net = nn::to_image(t);  // stays in the tanh range
    CHECK(net.domain == Domain::Network);
    auto back = from_network_domain(net);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(back.data[i] - img.data[i]) <= 0.51f);

    BinaryMask mask = BinaryMask::filled(6, 5, 0);
    for (auto& v : mask.data) v = rng() % 2;
    CHECK(nn::to_mask(nn::to_tensor(mask)).data == mask.data);
}

TEST_CASE("checkpoint container round trip and magic validation") {
    auto path = temp_dir() / "round.ckpt";
    nlohmann::json header = {{"kind", "test"}, {"epoch", 3}};
    std::string blob = std::string("bytes\0with\0nulls", 15) + std::string(1000, '\x7f');
    nn::write_checkpoint(path, header, blob);

    std::string read_blob;
    auto read_header = nn::read_checkpoint(path, read_blob);
    CHECK(read_header == header);
    CHECK(read_blob == blob);

    auto bad = temp_dir() / "bad.ckpt";
    std::ofstream(bad) << "not a checkpoint\n";
    std::string ignored;
    CHECK_THROWS_AS(nn::read_checkpoint(bad, ignored), ValidationError);
}

TEST_CASE("dice and hybrid loss frozen values") {
    auto opts = torch::TensorOptions().dtype(torch::kFloat64);
    auto half = torch::full({1, 16, 16}, 0.5, opts);
    auto ones = torch::ones({1, 16, 16}, opts);

    CHECK(seg::dice_coefficient(half, ones).item<double>() ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(seg::dice_coefficient(ones, ones).item<double>() == doctest::Approx(1.0).epsilon(1e-6));

    // 0.5 * (1 - 2/3) + 0.5 * (-ln 0.5)
    double expect = 0.5 * (1.0 / 3.0) + 0.5 * std::log(2.0);
    CHECK(seg::hybrid_loss(half, ones).item<double>() == doctest::Approx(expect).epsilon(1e-6));
    CHECK(seg::hybrid_loss(ones, ones).item<double>() <= 1e-3);
    // all-solid truth: the dice term degenerates to 0/eps = 0, so the hybrid
    // loss floors at the dice weight even for a perfect prediction
    CHECK(seg::hybrid_loss(torch::zeros({1, 8, 8}, opts), torch::zeros({1, 8, 8}, opts))
              .item<double>() == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("adversarial losses at the indifference point and clamping") {
    auto opts = torch::TensorOptions().dtype(torch::kFloat64);
    auto half = torch::full({4}, 0.5, opts);
    CHECK(gan::discriminator_loss(half, half).item<double>() ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
    CHECK(gan::generator_loss(half).item<double>() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));

    auto inv_e = torch::full({3}, std::exp(-1.0), opts);
    CHECK(gan::generator_loss(inv_e).item<double>() == doctest::Approx(1.0).epsilon(1e-9));

    // Clamp keeps the losses finite and bounded at the extremes.
    CHECK(gan::generator_loss(torch::full({2}, 1e-9, opts)).item<double>() >= 15.0);
    CHECK(gan::generator_loss(torch::full({2}, 1.0 - 1e-9, opts)).item<double>() <= 1e-5);
    auto d_extreme = gan::discriminator_loss(torch::full({2}, 1.0, opts),
                                             torch::full({2}, 0.0, opts));
    CHECK(std::isfinite(d_extreme.item<double>()));
    CHECK_THROWS_AS(gan::generator_loss(torch::empty({0}, opts)), ValidationError);
}

TEST_CASE("learning-rate schedule endpoints and monotone decay") {
    gan::GanTrainConfig cfg;
    cfg.epochs = 200;
    CHECK(gan::lr_schedule(0, cfg) == doctest::Approx(2.0e-4).epsilon(1e-12));
    CHECK(gan::lr_schedule(100, cfg) == doctest::Approx(1.01e-4).epsilon(1e-12));
    CHECK(gan::lr_schedule(200, cfg) == doctest::Approx(2.0e-6).epsilon(1e-12));
    for (int e = 1; e <= 200; ++e) CHECK(gan::lr_schedule(e, cfg) < gan::lr_schedule(e - 1, cfg));
    CHECK_THROWS_AS(gan::lr_schedule(-1, cfg), ValidationError);
    CHECK_THROWS_AS(gan::lr_schedule(201, cfg), ValidationError);
}

TEST_CASE("generator input assembly: channel counts and condition planes") {
    const int n_depths = 4;
    CHECK(gan::make_generator_spec(gan::Preset::Original, n_depths).input_channels() == 517);
    CHECK(gan::make_generator_spec(gan::Preset::ModelA, n_depths).input_channels() == 389);
    CHECK(gan::make_generator_spec(gan::Preset::ModelB, n_depths).input_channels() == 261);
    CHECK(gan::make_generator_spec(gan::Preset::Original, n_depths).output_size() == 480);
    CHECK(gan::make_generator_spec(gan::Preset::Original, n_depths, true).output_size() == 96);

    // Planes are constant and the condition is recoverable from any pixel.
    auto features = torch::randn({2, 5, 4, 4});
    auto phi = torch::tensor({0.31f, 0.07f});
    auto one_hot = torch::tensor({{0.0f, 1.0f, 0.0f}, {1.0f, 0.0f, 0.0f}});
    auto stacked = gan::concat_condition_planes(features, phi, one_hot);
    REQUIRE(stacked.sizes() == torch::IntArrayRef({2, 5 + 3 + 1, 4, 4}));
    for (int c = 5; c < 9; ++c) {
        auto plane = stacked.index({0, c});
        CHECK(plane.max().item<float>() == doctest::Approx(plane.min().item<float>()));
    }
    CHECK(stacked.index({0, 8, 2, 3}).item<float>() == doctest::Approx(0.31f));
    CHECK(stacked.index({1, 8, 0, 0}).item<float>() == doctest::Approx(0.07f));
    CHECK(stacked.index({0, 6, 1, 1}).item<float>() == doctest::Approx(1.0f));
    CHECK(stacked.index({1, 5, 1, 1}).item<float>() == doctest::Approx(1.0f));

    // Assembled generator input carries dense channels plus the condition.
    auto spec = mini_gen_spec();
    gan::Generator gen(spec);
    auto z = torch::rand({2, spec.latent_dim});
    auto gin = gen->assemble_input(z, torch::tensor({0.2f, 0.3f}),
                                   torch::tensor({{1.0f, 0.0f}, {0.0f, 1.0f}}));
    CHECK(gin.sizes() == torch::IntArrayRef({2, spec.input_channels(), 6, 6}));
    CHECK_THROWS_AS(gen->assemble_input(torch::rand({2, 5}), torch::tensor({0.2f, 0.3f}),
                                        torch::tensor({{1.0f, 0.0f}, {0.0f, 1.0f}})),
                    ValidationError);
}

TEST_CASE("miniature generator/discriminator forward shapes") {
    torch::manual_seed(1);
    gan::Generator gen(mini_gen_spec());
    gan::Discriminator disc(mini_disc_spec());
    auto z = torch::rand({3, 8});
    auto phi = torch::tensor({0.1f, 0.2f, 0.3f});
    auto one_hot = torch::tensor({{1.0f, 0.0f}, {0.0f, 1.0f}, {1.0f, 0.0f}});

    auto images = gen->forward(z, phi, one_hot);
    REQUIRE(images.sizes() == torch::IntArrayRef({3, 3, 12, 12}));
    CHECK(images.max().item<float>() <= 1.0f);
    CHECK(images.min().item<float>() >= -1.0f);

    disc->eval();
    auto scores = disc->forward(images, phi, one_hot);
    REQUIRE(scores.sizes() == torch::IntArrayRef({3}));
    for (int i = 0; i < 3; ++i) {
        CHECK(scores[i].item<float>() > 0.0f);
        CHECK(scores[i].item<float>() < 1.0f);
    }
    CHECK_THROWS_AS(disc->forward(torch::rand({1, 3, 10, 10}), phi.slice(0, 0, 1),
                                  one_hot.slice(0, 0, 1)),
                    ValidationError);
}

TEST_CASE("analytic generator gradients match central finite differences") {
    torch::manual_seed(7);
    gan::Generator gen(mini_gen_spec());
    gan::Discriminator disc(mini_disc_spec());
    gen->to(torch::kFloat64);
    disc->to(torch::kFloat64);
    gen->eval();   // running BN statistics: loss is a pure function of params
    disc->eval();  // dropout off

    auto opts = torch::TensorOptions().dtype(torch::kFloat64);
    auto z = torch::rand({2, 8}, opts);
    auto phi = torch::tensor({0.2, 0.4}, opts);
    auto one_hot = torch::tensor({{1.0, 0.0}, {0.0, 1.0}}, opts);

    auto loss_fn = [&] { return gan::generator_loss(disc->forward(gen->forward(z, phi, one_hot), phi, one_hot)); };

    for (auto& p : gen->parameters()) p.mutable_grad() = torch::Tensor();
    auto loss = loss_fn();
    loss.backward();

    std::mt19937_64 rng(13);
    auto params = gen->parameters();
    int checked = 0;
    const double eps = 1e-5;
    while (checked < 20) {
        auto& p = params[rng() % params.size()];
        if (!p.grad().defined()) continue;
        auto flat = p.view(-1);
        auto gflat = p.grad().view(-1);
        std::int64_t idx = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(flat.numel()));
        double analytic = gflat[idx].item<double>();

        double fd;
        {
            torch::NoGradGuard guard;
            double orig = flat[idx].item<double>();
            flat[idx] = orig + eps;
            double up = loss_fn().item<double>();
            flat[idx] = orig - eps;
            double down = loss_fn().item<double>();
            flat[idx] = orig;
            fd = (up - down) / (2.0 * eps);
        }
        double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
        CHECK(std::abs(analytic - fd) / denom <= 1e-3);
        ++checked;
    }
}

TEST_CASE("generation determinism and range flag on a marked model") {
    gan::CGan model(mini_gen_spec(), mini_disc_spec());
    CHECK_THROWS_AS(model.generate(0.2, DepthLabel(0, 2), 1, 1), StateError);

    model.mark_trained();
    model.phi_ranges = {{0.1, 0.4}, {0.15, 0.35}};

    auto a = model.generate(0.2, DepthLabel(0, 2), 2, 42);
    auto b = model.generate(0.2, DepthLabel(0, 2), 2, 42);
    REQUIRE(a.images.size() == 2);
    CHECK_FALSE(a.out_of_range);
    for (int i = 0; i < 2; ++i) CHECK(a.images[i].data == b.images[i].data);

    auto c = model.generate(0.2, DepthLabel(0, 2), 2, 43);
    CHECK(c.images[0].data != a.images[0].data);

    CHECK(model.generate(0.5, DepthLabel(0, 2), 1, 1).out_of_range);
    CHECK(model.generate(0.05, DepthLabel(1, 2), 1, 1).out_of_range);
    CHECK_THROWS_AS(model.generate(0.2, DepthLabel(0, 3), 1, 1), ValidationError);
    CHECK_THROWS_AS(model.generate(0.2, DepthLabel(0, 2), 0, 1), ValidationError);
}

TEST_CASE("cgan checkpoint round trip reproduces generations") {
    torch::manual_seed(11);
    gan::CGan model(gan::make_generator_spec(gan::Preset::ModelB, 2, true),
                    gan::make_discriminator_spec(gan::Preset::ModelB, 2, true));
    model.mark_trained();
    model.phi_ranges = {{0.1, 0.4}, {0.1, 0.4}};

    gan::GanTrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 99;
    auto path = temp_dir() / "cgan.ckpt";
    model.save(path, cfg, 12, "extra-state");

    auto loaded = gan::CGan::load(path);
    CHECK(loaded.epoch == 12);
    CHECK(loaded.toy);
    CHECK(loaded.config.epochs == 30);
    CHECK(loaded.config.seed == 99);
    CHECK(loaded.extra_blob == "extra-state");
    CHECK(loaded.model.trained());
    REQUIRE(loaded.model.phi_ranges.size() == 2);
    CHECK(loaded.model.phi_ranges[0].first == doctest::Approx(0.1));

    auto before = model.generate(0.25, DepthLabel(1, 2), 1, 7);
    auto after = loaded.model.generate(0.25, DepthLabel(1, 2), 1, 7);
    CHECK(before.images[0].data == after.images[0].data);
}

TEST_CASE("trainer validation and deterministic miniature training") {
    auto gspec = mini_gen_spec();
    auto dspec = mini_disc_spec();
    gan::GanTrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.seed = 5;

    {
        auto odd = cfg;
        odd.batch_size = 3;
        CHECK_THROWS_AS(gan::GanTrainer(gspec, dspec, odd), ValidationError);
        auto none = cfg;
        none.epochs = 0;
        CHECK_THROWS_AS(gan::GanTrainer(gspec, dspec, none), ValidationError);
    }

    auto data = mini_dataset(8, 3);

    gan::GanTrainer t1(gspec, dspec, cfg);
    auto log1 = t1.train(data);
    gan::GanTrainer t2(gspec, dspec, cfg);
    auto log2 = t2.train(data);

    REQUIRE(log1.rows.size() == 2);
    REQUIRE(log2.rows.size() == 2);
    for (std::size_t i = 0; i < log1.rows.size(); ++i) {
        CHECK(log1.rows[i].loss_d == log2.rows[i].loss_d);
        CHECK(log1.rows[i].loss_g == log2.rows[i].loss_g);
        CHECK(std::isfinite(log1.rows[i].loss_d));
        CHECK(std::isfinite(log1.rows[i].loss_g));
    }
    CHECK(t1.model().trained());
    REQUIRE(log1.probe_targets.size() == 2);
    // midpoints of the empirical spans per depth
    CHECK(log1.probe_targets[0] == doctest::Approx(0.5 * (0.10 + 0.22)));
    CHECK(log1.probe_targets[1] == doctest::Approx(0.5 * (0.12 + 0.24)));

    CHECK_THROWS_AS(t1.train(std::vector<gan::GanSample>{}), ValidationError);
}

TEST_CASE("trainer checkpointing and resume continue the schedule") {
    auto gspec = mini_gen_spec();
    auto dspec = mini_disc_spec();
    gan::GanTrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 4;
    cfg.checkpoint_every = 2;
    cfg.seed = 21;
    auto data = mini_dataset(8, 17);

    auto dir = temp_dir() / "gan_ckpts";
    std::filesystem::create_directories(dir);

    gan::GanTrainer full(gspec, dspec, cfg);
    auto full_log = full.train(data, dir);
    CHECK(std::filesystem::exists(dir / "epoch_2.ckpt"));
    CHECK(std::filesystem::exists(dir / "epoch_4.ckpt"));
    CHECK(std::filesystem::exists(dir / "latest.ckpt"));

    // Resume from the midpoint: epochs 2..3 only.
    gan::GanTrainer resumed(gspec, dspec, cfg);
    auto resumed_log = resumed.train(data, std::nullopt, nullptr, 4, dir / "epoch_2.ckpt");
    REQUIRE(resumed_log.rows.size() == 2);
    CHECK(resumed_log.rows[0].epoch == 2);
    CHECK(resumed_log.rows[1].epoch == 3);
    for (std::size_t i = 0; i < resumed_log.rows.size(); ++i) {
        CHECK(resumed_log.rows[i].loss_d ==
              doctest::Approx(full_log.rows[i + 2].loss_d).epsilon(1e-6));
        CHECK(resumed_log.rows[i].loss_g ==
              doctest::Approx(full_log.rows[i + 2].loss_g).epsilon(1e-6));
    }
}

TEST_CASE("parameter counts shrink across the preset family") {
    auto original = gan::parameter_count(gan::Preset::Original, 4);
    auto a = gan::parameter_count(gan::Preset::ModelA, 4);
    auto b = gan::parameter_count(gan::Preset::ModelB, 4);
    CHECK(original > a);
    CHECK(a > b);
    CHECK(b > 0);
    CHECK(gan::parameter_count(gan::Preset::Original, 4, true) < b);
}

TEST_CASE("segmenter state guards") {
    seg::Segmenter fresh;
    CHECK_FALSE(fresh.trained());
    CHECK_THROWS_AS(fresh.segment(RgbImage::zeros(32, 32)), StateError);

    std::vector<RgbImage> one{RgbImage::zeros(32, 32)};
    std::vector<BinaryMask> one_mask{BinaryMask::filled(32, 32, 0)};
    CHECK_THROWS_AS(seg::train_segmenter(one, one_mask, {}), ValidationError);
    std::vector<BinaryMask> empty;
    CHECK_THROWS_AS(seg::train_segmenter(one, empty, {}), ValidationError);
}
