#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "porogen/core/errors.hpp"
#include "porogen/core/io.hpp"
#include "porogen/gan/cgan.hpp"
#include "porogen/morph/metrics.hpp"
#include "porogen/pipeline/config.hpp"
#include "porogen/pipeline/stages.hpp"
#include "porogen/seg/segmenter.hpp"

namespace {

using namespace porogen;

struct GlobalOpts {
    std::string config_file;
    std::string corpus_dir;
    std::string work_dir;
    std::string arch;
    bool toy = false;
    bool has_seed = false;
    std::uint64_t seed = 0;
};

void check_device_env();

pipeline::PipelineConfig load_config(const GlobalOpts& opts) {
    check_device_env();
    auto config = opts.config_file.empty()
                      ? pipeline::validate_config_json(nlohmann::json::object())
                      : pipeline::validate_config(opts.config_file);
    if (!opts.corpus_dir.empty()) config.corpus_dir = opts.corpus_dir;
    if (!opts.work_dir.empty()) config.work_dir = opts.work_dir;
    if (!opts.arch.empty()) config.arch = opts.arch;
    if (opts.toy) config.toy = true;
    if (opts.has_seed) config.seed = opts.seed;
    return config;
}

void check_device_env() {
    if (const char* device = std::getenv("POROGEN_DEVICE")) {
        std::string d = device;
        if (d != "cpu")
            throw ValidationError("POROGEN_DEVICE=" + d + " unsupported; this build runs on cpu");
    }
}

void add_stage_command(CLI::App& app, GlobalOpts& opts, const std::string& name,
                       const std::string& description) {
    auto* cmd = app.add_subcommand(name, description);
    cmd->callback([&opts, name]() {
        auto result = pipeline::run_stage(name, load_config(opts));
        for (const auto& artifact : result.artifacts)
            std::cout << name << ": " << artifact.string() << '\n';
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"porogen: conditional synthesis and petrophysical validation of "
                 "porous-media images"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--config", opts.config_file, "pipeline config file (JSON)");
    app.add_option("--corpus-dir", opts.corpus_dir, "override corpus directory");
    app.add_option("--work-dir", opts.work_dir, "override work directory");
    app.add_option_function<std::uint64_t>(
        "--seed",
        [&opts](std::uint64_t v) {
            opts.seed = v;
            opts.has_seed = true;
        },
        "override random seed");
    app.add_option("--arch", opts.arch, "generator preset: original|modelA|modelB");
    app.add_flag("--toy", opts.toy, "desk-scale preset (96x96, reduced channels)");

    for (const auto& [name, desc] :
         std::initializer_list<std::pair<const char*, const char*>>{
             {"prep-synth", "synthesize the two-phase training corpus"},
             {"prep-rev", "representative-window analysis for patch sizing"},
             {"prep-extract", "extract patches from the corpus images"},
             {"prep-balance", "class-balance the patch set via augmentation"},
             {"seg-train", "train the pore/solid segmenter"},
             {"seg-eval", "evaluate the segmenter against ground truth"},
             {"gan-train", "adversarial training on the balanced manifest"},
             {"petro-score", "dual-constraint scores for generated images"},
             {"petro-select", "pick the representative image per depth"},
             {"petro-report", "porosity control, distribution tests, study"}})
        add_stage_command(app, opts, name, desc);

    // seg-apply: stage form over the corpus, or one image -> one mask.
    auto* seg_apply = app.add_subcommand("seg-apply", "segment images with a trained model");
    std::string apply_input, apply_output;
    seg_apply->add_option("--input", apply_input, "single image to segment");
    seg_apply->add_option("--output", apply_output, "mask output path");
    seg_apply->callback([&]() {
        auto config = load_config(opts);
        if (apply_input.empty()) {
            auto result = pipeline::run_stage("seg-apply", config);
            for (const auto& a : result.artifacts) std::cout << "seg-apply: " << a.string() << '\n';
            return;
        }
        if (apply_output.empty()) throw ValidationError("--output required with --input");
        auto ckpt = config.work_dir / "segmenter.ckpt";
        if (!std::filesystem::exists(ckpt))
            throw MissingPrerequisiteError("missing trained segmenter", "seg-train");
        auto segmenter = seg::Segmenter::load(ckpt);
        write_mask(apply_output, segmenter.segment(read_image(apply_input)));
        std::cout << "seg-apply: " << apply_output << '\n';
    });

    // gan-generate: explicit (phi, depth, n) or the stage's per-depth demo.
    auto* gen = app.add_subcommand("gan-generate", "sample images from a trained generator");
    double gen_phi = -1.0;
    int gen_depth = 0, gen_n = 1;
    std::string gen_out = "generated";
    gen->add_option("--phi", gen_phi, "target porosity fraction");
    gen->add_option("--depth", gen_depth, "depth index");
    gen->add_option("--n", gen_n, "number of images");
    gen->add_option("--out", gen_out, "output directory");
    gen->callback([&]() {
        auto config = load_config(opts);
        if (gen_phi < 0.0) {
            auto result = pipeline::run_stage("gan-generate", config);
            for (const auto& a : result.artifacts)
                std::cout << "gan-generate: " << a.string() << '\n';
            return;
        }
        auto ckpt = config.work_dir / "gan" / "latest.ckpt";
        if (!std::filesystem::exists(ckpt))
            throw MissingPrerequisiteError("missing generator checkpoint", "gan-train");
        auto loaded = gan::CGan::load(ckpt);
        auto result = loaded.model.generate(gen_phi, DepthLabel(gen_depth, config.n_depths()),
                                            gen_n, config.seed);
        std::filesystem::create_directories(gen_out);
        for (std::size_t k = 0; k < result.images.size(); ++k)
            write_image(std::filesystem::path(gen_out) / ("gen_" + std::to_string(k) + ".png"),
                        result.images[k]);
        if (result.out_of_range)
            std::cerr << "warning: porosity " << gen_phi
                      << " lies outside the trained range for depth " << gen_depth << '\n';
        std::cout << "gan-generate: " << gen_n << " images -> " << gen_out << '\n';
    });

    // morph-analyze: explicit mask files or the stage over generated images.
    auto* morph = app.add_subcommand("morph-analyze", "pore-network descriptors from masks");
    std::vector<std::string> mask_paths;
    double morph_pixel_size = 1.0;
    morph->add_option("--mask", mask_paths, "mask PNG(s) to analyze");
    morph->add_option("--pixel-size", morph_pixel_size, "micrometers per pixel");
    morph->callback([&]() {
        if (mask_paths.empty()) {
            auto result = pipeline::run_stage("morph-analyze", load_config(opts));
            for (const auto& a : result.artifacts)
                std::cout << "morph-analyze: " << a.string() << '\n';
            return;
        }
        std::cout << "path,porosity,avg_pore_radius,specific_surface_area,tortuosity,"
                     "weighted_throat_radius,percolating\n";
        for (const auto& path : mask_paths) {
            auto stats = morph::analyze_mask(read_mask(path), morph_pixel_size);
            std::cout << path << ',' << stats.porosity << ',' << stats.avg_pore_radius << ','
                      << stats.specific_surface_area << ',' << stats.tortuosity << ','
                      << stats.weighted_throat_radius << ',' << (stats.percolating ? 1 : 0)
                      << '\n';
        }
    });

    auto* run = app.add_subcommand("run", "run one stage by name, or `all`");
    std::string run_target = "all";
    run->add_option("stage", run_target, "stage name or `all`");
    run->callback([&]() {
        auto config = load_config(opts);
        auto stages = run_target == "all" ? pipeline::stage_sequence()
                                          : std::vector<std::string>{run_target};
        for (const auto& stage : stages) {
            auto result = pipeline::run_stage(stage, config);
            std::cout << stage << " done (" << result.wall_seconds << " s)\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const MissingPrerequisiteError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "error: training diverged at step " << e.step() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
