#include "porogen/pipeline/stages.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "porogen/core/errors.hpp"
#include "porogen/core/io.hpp"
#include "porogen/gan/cgan.hpp"
#include "porogen/morph/metrics.hpp"
#include "porogen/nn/convert.hpp"
#include "porogen/petro/validation.hpp"
#include "porogen/pipeline/manifest.hpp"
#include "porogen/pipeline/plot.hpp"
#include "porogen/prep/dataprep.hpp"
#include "porogen/seg/segmenter.hpp"
#include "porogen/stats/stats.hpp"

namespace porogen::pipeline {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "porogen 1.0.0";

void require(const fs::path& path, const std::string& what, const std::string& producing_stage) {
    if (!fs::exists(path)) throw MissingPrerequisiteError("missing " + what, producing_stage);
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ValidationError("cannot write artifact: " + path.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

/// Per-run provenance line: every artifact of a run shares the config hash.
void append_runlog(const PipelineConfig& config, const StageResult& result) {
    nlohmann::json j{{"stage", result.stage},
                     {"config_hash", config_hash(config)},
                     {"seed", config.seed},
                     {"version", kVersion},
                     {"wall_seconds", result.wall_seconds}};
    auto& arts = j["artifacts"] = nlohmann::json::array();
    for (const auto& a : result.artifacts) arts.push_back(a.string());
    fs::create_directories(config.work_dir);
    std::ofstream out(config.work_dir / "runlog.jsonl", std::ios::app);
    out << j.dump() << '\n';
}

prep::SegmentFn make_segment_fn(const PipelineConfig& config) {
    auto ckpt = config.work_dir / "segmenter.ckpt";
    if (fs::exists(ckpt)) {
        auto seg = std::make_shared<seg::Segmenter>(seg::Segmenter::load(ckpt));
        return [seg](const RgbImage& img) { return seg->segment(img); };
    }
    return [](const RgbImage& img) { return heuristic_segment(img); };
}

std::vector<PatchRecord> load_required_corpus(const fs::path& manifest, int n_depths,
                                              const std::string& producing_stage) {
    require(manifest, "manifest " + manifest.string(), producing_stage);
    return load_corpus(manifest, n_depths);
}

// ---- stages -----------------------------------------------------------

StageResult stage_prep_synth(const PipelineConfig& config) {
    prep::SynthParams params;
    params.image_size = config.synth_image_size;
    params.n_depths = config.n_depths();
    params.per_depth_count = config.synth_per_depth;
    params.seed = config.seed;
    auto samples = prep::synthesize_corpus(params);

    std::vector<PatchRecord> records;
    std::vector<BinaryMask> masks;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        PatchRecord rec;
        rec.image = std::move(samples[i].image);
        rec.image.pixel_size = config.pixel_size;
        rec.porosity = samples[i].porosity;
        rec.depth = samples[i].depth;
        rec.source_id = "synth_" + std::to_string(i);
        records.push_back(std::move(rec));
        masks.push_back(std::move(samples[i].mask));
    }
    auto manifest = save_corpus(config.corpus_dir, records, config.n_depths());

    // Ground-truth masks mirror the image layout under masks/.
    auto rows = read_manifest_csv(manifest);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        fs::path mask_path = config.corpus_dir / "masks" / rows[i].path;
        fs::create_directories(mask_path.parent_path());
        write_mask(mask_path, masks[i]);
    }
    return {"prep-synth", {manifest, config.corpus_dir / "masks"}};
}

StageResult stage_prep_rev(const PipelineConfig& config) {
    auto records = load_required_corpus(config.corpus_dir / "manifest.csv", config.n_depths(),
                                        "prep-synth");
    std::vector<RgbImage> images;
    for (auto& r : records) images.push_back(std::move(r.image));
    int min_dim = images.empty() ? 0 : images[0].width;
    for (const auto& img : images) min_dim = std::min({min_dim, img.width, img.height});

    std::vector<int> sizes;
    for (int s : {8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 320, 480})
        if (s <= min_dim) sizes.push_back(s);

    auto curve = prep::rev_analysis(images, make_segment_fn(config), sizes, 200, config.seed);
    auto selected = prep::select_patch_size(curve, config.rev_threshold);

    nlohmann::json j{{"sizes", curve.sizes},
                     {"sigma", curve.sigma},
                     {"mean_porosity", curve.mean_porosity},
                     {"selected_patch_size", selected.patch_size},
                     {"threshold", config.rev_threshold},
                     {"threshold_met", selected.threshold_met}};
    auto out = config.work_dir / "rev.json";
    write_json_atomic(out, j);

    Series sigma{"sigma(phi)", {}, {}, "#1f77b4"};
    for (std::size_t i = 0; i < curve.sizes.size(); ++i) {
        sigma.xs.push_back(curve.sizes[i]);
        sigma.ys.push_back(curve.sigma[i]);
    }
    auto plot = config.work_dir / "plots" / "rev_curve.svg";
    fs::create_directories(plot.parent_path());
    write_line_plot(plot, "Porosity variability vs window size", "window size (px)",
                    "porosity std dev", {sigma});
    return {"prep-rev", {out, plot}};
}

int resolve_patch_size(const PipelineConfig& config) {
    if (config.patch_size > 0) return config.patch_size;
    auto rev = config.work_dir / "rev.json";
    require(rev, "REV analysis (or set patch_size in the config)", "prep-rev");
    std::ifstream in(rev);
    nlohmann::json j;
    in >> j;
    return j.at("selected_patch_size").get<int>();
}

StageResult stage_prep_extract(const PipelineConfig& config) {
    auto records = load_required_corpus(config.corpus_dir / "manifest.csv", config.n_depths(),
                                        "prep-synth");
    int side = resolve_patch_size(config);
    auto segment = make_segment_fn(config);

    std::vector<PatchRecord> patches;
    for (const auto& rec : records) {
        for (auto& patch : prep::extract_patches(rec.image, side, side)) {
            PatchRecord p;
            p.porosity = porosity_of_mask(segment(patch));
            p.image = std::move(patch);
            p.depth = rec.depth;
            p.source_id = rec.source_id;
            patches.push_back(std::move(p));
        }
    }
    auto manifest = save_corpus(config.work_dir / "extracted", patches, config.n_depths());
    return {"prep-extract", {manifest}};
}

StageResult stage_prep_balance(const PipelineConfig& config) {
    auto records = load_required_corpus(config.work_dir / "extracted" / "manifest.csv",
                                        config.n_depths(), "prep-extract");
    std::vector<std::vector<double>> per_depth(static_cast<std::size_t>(config.n_depths()));
    for (const auto& r : records)
        per_depth[static_cast<std::size_t>(r.depth.index)].push_back(r.porosity);
    auto scheme = prep::build_class_scheme(per_depth, config.n_classes);

    prep::BalanceReport report;
    auto balanced =
        prep::balance_dataset(std::move(records), scheme, make_segment_fn(config), &report,
                              config.target_per_class, config.min_class_size, config.seed);
    auto manifest = save_corpus(config.work_dir / "balanced", balanced, config.n_depths());

    nlohmann::json j{{"augmented", report.augmented_count},
                     {"downsampled", report.downsampled_count},
                     {"records", balanced.size()}};
    auto& excluded = j["excluded_cells"] = nlohmann::json::array();
    for (const auto& cell : report.excluded_cells)
        excluded.push_back({{"depth", cell.depth}, {"class", cell.porosity_class}});
    auto& bins = j["class_edges_per_depth"] = nlohmann::json::array();
    for (const auto& d : scheme.per_depth) bins.push_back(d.edges);
    auto report_path = config.work_dir / "balance_report.json";
    write_json_atomic(report_path, j);
    return {"prep-balance", {manifest, report_path}};
}

StageResult stage_seg_train(const PipelineConfig& config) {
    auto manifest = config.corpus_dir / "manifest.csv";
    auto rows_path = config.corpus_dir / "masks";
    require(manifest, "corpus manifest", "prep-synth");
    require(rows_path, "ground-truth masks", "prep-synth");

    auto rows = read_manifest_csv(manifest);
    std::vector<RgbImage> images;
    std::vector<BinaryMask> masks;
    for (const auto& r : rows) {
        images.push_back(read_image(config.corpus_dir / r.path));
        masks.push_back(read_mask(config.corpus_dir / "masks" / r.path));
    }

    seg::SegTrainConfig train_config;
    train_config.epochs = config.seg_epochs;
    train_config.seed = config.seed;
    auto result = seg::train_segmenter(images, masks, train_config);

    auto ckpt = config.work_dir / "segmenter.ckpt";
    fs::create_directories(config.work_dir);
    result.segmenter.save(ckpt);
    write_json_atomic(config.work_dir / "seg_metrics.json",
                      {{"dice", result.test_metrics.dice},
                       {"iou", result.test_metrics.iou},
                       {"accuracy", result.test_metrics.accuracy},
                       {"porosity_mae", result.test_metrics.porosity_mae}});

    Series train_s{"train loss", {}, {}, "#d62728"}, val_s{"val loss", {}, {}, "#1f77b4"};
    for (std::size_t i = 0; i < result.train_loss_per_epoch.size(); ++i) {
        train_s.xs.push_back(static_cast<double>(i));
        train_s.ys.push_back(result.train_loss_per_epoch[i]);
        val_s.xs.push_back(static_cast<double>(i));
        val_s.ys.push_back(result.val_loss_per_epoch[i]);
    }
    auto plot = config.work_dir / "plots" / "seg_loss.svg";
    fs::create_directories(plot.parent_path());
    write_line_plot(plot, "Segmenter training", "epoch", "hybrid loss", {train_s, val_s});
    return {"seg-train", {ckpt, config.work_dir / "seg_metrics.json", plot}};
}

StageResult stage_seg_apply(const PipelineConfig& config) {
    auto ckpt = config.work_dir / "segmenter.ckpt";
    require(ckpt, "trained segmenter", "seg-train");
    auto rows = read_manifest_csv(config.corpus_dir / "manifest.csv");
    auto segmenter = seg::Segmenter::load(ckpt);

    auto out_dir = config.work_dir / "pred_masks";
    for (const auto& r : rows) {
        auto mask = segmenter.segment(read_image(config.corpus_dir / r.path));
        fs::path out = out_dir / r.path;
        fs::create_directories(out.parent_path());
        write_mask(out, mask);
    }
    return {"seg-apply", {out_dir}};
}

StageResult stage_seg_eval(const PipelineConfig& config) {
    auto ckpt = config.work_dir / "segmenter.ckpt";
    require(ckpt, "trained segmenter", "seg-train");
    require(config.corpus_dir / "masks", "ground-truth masks", "prep-synth");
    auto rows = read_manifest_csv(config.corpus_dir / "manifest.csv");
    auto segmenter = seg::Segmenter::load(ckpt);

    std::vector<RgbImage> images;
    std::vector<BinaryMask> masks;
    for (const auto& r : rows) {
        images.push_back(read_image(config.corpus_dir / r.path));
        masks.push_back(read_mask(config.corpus_dir / "masks" / r.path));
    }
    auto metrics = segmenter.evaluate(images, masks);
    auto out = config.work_dir / "seg_eval.json";
    write_json_atomic(out, {{"dice", metrics.dice},
                            {"iou", metrics.iou},
                            {"accuracy", metrics.accuracy},
                            {"porosity_mae", metrics.porosity_mae},
                            {"images", images.size()}});
    return {"seg-eval", {out}};
}

StageResult stage_gan_train(const PipelineConfig& config) {
    auto records = load_required_corpus(config.work_dir / "balanced" / "manifest.csv",
                                        config.n_depths(), "prep-balance");
    std::vector<gan::GanSample> dataset;
    for (const auto& r : records)
        dataset.push_back({nn::to_tensor(r.image), r.porosity, r.depth.index});

    auto preset = gan::preset_from_string(config.arch);
    gan::GanTrainConfig train_config;
    train_config.epochs = config.epochs;
    train_config.batch_size = config.batch_size;
    train_config.seed = config.seed;
    gan::GanTrainer trainer(gan::make_generator_spec(preset, config.n_depths(), config.toy),
                            gan::make_discriminator_spec(preset, config.n_depths(), config.toy),
                            train_config);

    auto segment = make_segment_fn(config);
    gan::ProbeFn probe = [&segment](const std::vector<RgbImage>& images) {
        double sum = 0.0;
        for (const auto& img : images) sum += porosity_of_mask(segment(img));
        return images.empty() ? 0.0 : sum / static_cast<double>(images.size());
    };

    auto gan_dir = config.work_dir / "gan";
    fs::create_directories(gan_dir);
    auto log = trainer.train(dataset, gan_dir, probe);

    std::ostringstream csv;
    csv << "epoch,loss_g,loss_d,wall_seconds";
    for (std::size_t d = 0; d < log.probe_targets.size(); ++d) csv << ",probe_depth_" << d;
    csv << '\n';
    csv.precision(8);
    for (const auto& row : log.rows) {
        csv << row.epoch << ',' << row.loss_g << ',' << row.loss_d << ',' << row.wall_seconds;
        for (double p : row.probe_porosity) csv << ',' << p;
        csv << '\n';
    }
    write_text_atomic(gan_dir / "training_log.csv", csv.str());

    Series g{"generator", {}, {}, "#d62728"}, d{"discriminator", {}, {}, "#1f77b4"};
    std::vector<Series> probes;
    for (std::size_t i = 0; i < log.probe_targets.size(); ++i)
        probes.push_back({"depth " + std::to_string(i) + " porosity", {}, {},
                          i % 2 ? "#2ca02c" : "#9467bd"});
    for (const auto& row : log.rows) {
        g.xs.push_back(row.epoch);
        g.ys.push_back(row.loss_g);
        d.xs.push_back(row.epoch);
        d.ys.push_back(row.loss_d);
        for (std::size_t i = 0; i < row.probe_porosity.size(); ++i) {
            probes[i].xs.push_back(row.epoch);
            probes[i].ys.push_back(row.probe_porosity[i]);
        }
    }
    auto plots = config.work_dir / "plots";
    fs::create_directories(plots);
    write_line_plot(plots / "gan_loss.svg", "Adversarial training", "epoch", "loss", {g, d});
    if (!probes.empty())
        write_line_plot(plots / "gan_porosity_tracking.svg", "Per-depth porosity tracking",
                        "epoch", "mean generated porosity", probes);
    return {"gan-train", {gan_dir / "latest.ckpt", gan_dir / "training_log.csv",
                          plots / "gan_loss.svg"}};
}

StageResult stage_gan_generate(const PipelineConfig& config) {
    auto ckpt = config.work_dir / "gan" / "latest.ckpt";
    require(ckpt, "generator checkpoint", "gan-train");
    auto loaded = gan::CGan::load(ckpt);

    auto out_dir = config.work_dir / "generated";
    std::vector<ManifestRow> rows;
    for (int d = 0; d < config.n_depths(); ++d) {
        auto [lo, hi] = loaded.model.phi_ranges[static_cast<std::size_t>(d)];
        double phi = 0.5 * (lo + hi);
        auto result = loaded.model.generate(phi, DepthLabel(d, config.n_depths()), 8,
                                            config.seed + static_cast<std::uint64_t>(d));
        for (std::size_t k = 0; k < result.images.size(); ++k) {
            fs::path rel = fs::path("depth_" + std::to_string(d)) /
                           ("gen_" + std::to_string(k) + ".png");
            fs::create_directories(out_dir / rel.parent_path());
            write_image(out_dir / rel, result.images[k]);
            rows.push_back({rel.generic_string(), d, phi, -1, false,
                            result.out_of_range ? "out_of_range" : "generated"});
        }
    }
    write_manifest_csv(out_dir / "manifest.csv", rows);
    return {"gan-generate", {out_dir / "manifest.csv"}};
}

StageResult stage_morph_analyze(const PipelineConfig& config) {
    auto manifest = config.work_dir / "generated" / "manifest.csv";
    require(manifest, "generated images", "gan-generate");
    auto segment = make_segment_fn(config);

    std::ostringstream csv;
    csv << "path,porosity,avg_pore_radius,specific_surface_area,tortuosity,"
           "weighted_throat_radius,percolating\n";
    csv.precision(8);
    for (const auto& r : read_manifest_csv(manifest)) {
        auto image = read_image(config.work_dir / "generated" / r.path);
        image.pixel_size = config.pixel_size;
        auto stats = morph::analyze_mask(segment(image), config.pixel_size);
        csv << r.path << ',' << stats.porosity << ',' << stats.avg_pore_radius << ','
            << stats.specific_surface_area << ',' << stats.tortuosity << ','
            << stats.weighted_throat_radius << ',' << (stats.percolating ? 1 : 0) << '\n';
    }
    auto out = config.work_dir / "morphology.csv";
    write_text_atomic(out, csv.str());
    return {"morph-analyze", {out}};
}

std::vector<petro::PetroTargets> depth_targets(const PipelineConfig& config) {
    std::vector<petro::PetroTargets> targets;
    for (int d = 0; d < config.n_depths(); ++d)
        targets.push_back({DepthLabel(d, config.n_depths()),
                           config.depth_table[static_cast<std::size_t>(d)].core_porosity,
                           config.depth_table[static_cast<std::size_t>(d)].core_permeability});
    return targets;
}

StageResult stage_petro_score(const PipelineConfig& config) {
    auto manifest = config.work_dir / "generated" / "manifest.csv";
    require(manifest, "generated images", "gan-generate");
    auto segment = make_segment_fn(config);
    auto targets = depth_targets(config);

    std::map<int, std::vector<RgbImage>> by_depth;
    std::map<int, std::vector<std::string>> paths_by_depth;
    for (const auto& r : read_manifest_csv(manifest)) {
        auto image = read_image(config.work_dir / "generated" / r.path);
        image.pixel_size = config.pixel_size;
        by_depth[r.depth_index].push_back(std::move(image));
        paths_by_depth[r.depth_index].push_back(r.path);
    }

    std::ostringstream csv;
    csv << "path,depth_index,porosity,permeability,error,porosity_term,permeability_term\n";
    csv.precision(8);
    for (auto& [d, images] : by_depth) {
        auto scores = petro::score_candidates(images, targets[static_cast<std::size_t>(d)],
                                              segment, config.w_phi, config.w_k);
        for (const auto& s : scores)
            csv << paths_by_depth[d][static_cast<std::size_t>(s.index)] << ',' << d << ','
                << s.porosity << ',' << s.permeability << ',' << s.score.error << ','
                << s.score.porosity_term << ',' << s.score.permeability_term << '\n';
    }
    auto out = config.work_dir / "petro_scores.csv";
    write_text_atomic(out, csv.str());
    return {"petro-score", {out}};
}

StageResult stage_petro_select(const PipelineConfig& config) {
    auto ckpt = config.work_dir / "gan" / "latest.ckpt";
    require(ckpt, "generator checkpoint", "gan-train");
    auto loaded = gan::CGan::load(ckpt);
    auto segment = make_segment_fn(config);
    auto targets = depth_targets(config);

    auto out_dir = config.work_dir / "selected";
    fs::create_directories(out_dir);
    nlohmann::json j = nlohmann::json::array();
    for (int d = 0; d < config.n_depths(); ++d) {
        auto candidates =
            loaded.model
                .generate(targets[static_cast<std::size_t>(d)].core_porosity,
                          DepthLabel(d, config.n_depths()), 100,
                          config.seed + 100ull * static_cast<std::uint64_t>(d))
                .images;
        for (auto& c : candidates) c.pixel_size = config.pixel_size;
        auto [index, best] = petro::select_representative(
            candidates, targets[static_cast<std::size_t>(d)], segment, config.w_phi, config.w_k);
        auto path = out_dir / ("depth_" + std::to_string(d) + ".png");
        write_image(path, candidates[static_cast<std::size_t>(index)]);
        j.push_back({{"depth_index", d},
                     {"path", path.string()},
                     {"candidate_index", index},
                     {"porosity", best.porosity},
                     {"permeability", best.permeability},
                     {"error", best.score.error}});
    }
    auto out = config.work_dir / "selected.json";
    write_json_atomic(out, j);
    return {"petro-select", {out, out_dir}};
}

StageResult stage_petro_report(const PipelineConfig& config) {
    auto ckpt = config.work_dir / "gan" / "latest.ckpt";
    require(ckpt, "generator checkpoint", "gan-train");
    auto corpus = load_required_corpus(config.corpus_dir / "manifest.csv", config.n_depths(),
                                       "prep-synth");
    auto loaded = gan::CGan::load(ckpt);
    auto segment = make_segment_fn(config);
    auto targets = depth_targets(config);

    petro::GenerateFn generate = [&loaded, &config](double phi, const DepthLabel& depth, int n,
                                                    std::uint64_t seed) {
        auto images = loaded.model.generate(phi, depth, n, seed).images;
        for (auto& img : images) img.pixel_size = config.pixel_size;
        return images;
    };

    // Porosity control: uniform probe targets over the middle of each depth's
    // trained span.
    std::vector<petro::PorosityProbe> probes;
    for (int d = 0; d < config.n_depths(); ++d) {
        auto [lo, hi] = loaded.model.phi_ranges[static_cast<std::size_t>(d)];
        double a = lo + 0.1 * (hi - lo), b = hi - 0.1 * (hi - lo);
        for (int i = 0; i < 50; ++i)
            probes.push_back({a + (b - a) * i / 49.0, DepthLabel(d, config.n_depths())});
    }
    auto control = petro::porosity_control_report(generate, segment, probes, config.seed);

    // Real vs generated porosity distributions per depth.
    std::vector<std::vector<RgbImage>> real_per_depth(
        static_cast<std::size_t>(config.n_depths()));
    std::vector<std::vector<double>> real_phi(static_cast<std::size_t>(config.n_depths()));
    for (auto& r : corpus) {
        r.image.pixel_size = config.pixel_size;
        real_phi[static_cast<std::size_t>(r.depth.index)].push_back(r.porosity);
        if (real_per_depth[static_cast<std::size_t>(r.depth.index)].size() < 50)
            real_per_depth[static_cast<std::size_t>(r.depth.index)].push_back(
                std::move(r.image));
    }

    nlohmann::json dist_tests = nlohmann::json::array();
    for (int d = 0; d < config.n_depths(); ++d) {
        std::vector<double> gen_phi;
        for (double t : real_phi[static_cast<std::size_t>(d)]) {
            if (gen_phi.size() >= 50) break;
            auto imgs = generate(t, DepthLabel(d, config.n_depths()), 1,
                                 config.seed + 31ull * gen_phi.size() + 1000ull * d);
            gen_phi.push_back(porosity_of_mask(segment(imgs[0])));
        }
        std::vector<double> real_sample(real_phi[static_cast<std::size_t>(d)].begin(),
                                        real_phi[static_cast<std::size_t>(d)].begin() +
                                            static_cast<std::ptrdiff_t>(gen_phi.size()));
        auto ks = stats::ks_test(real_sample, gen_phi);
        auto tt = stats::t_test(real_sample, gen_phi);
        auto es = stats::cohens_d(real_sample, gen_phi);
        dist_tests.push_back({{"depth_index", d},
                              {"ks_statistic", ks.statistic},
                              {"ks_p", ks.p_value},
                              {"t_statistic", tt.statistic},
                              {"t_p", tt.p_value},
                              {"cohens_d", es.d},
                              {"effect_band", es.band},
                              {"significance", stats::significance_marker(ks.p_value)}});
    }

    auto study = petro::representativeness_study(real_per_depth, generate, segment, targets, 100,
                                                 10, config.seed);
    nlohmann::json rep = nlohmann::json::array();
    for (const auto& row : study.rows)
        rep.push_back({{"depth_index", row.target.depth.index},
                       {"real_mean_error", row.real_mean_error},
                       {"gen_mean_error", row.gen_mean_error},
                       {"real_mean_porosity", row.real_mean_porosity},
                       {"gen_mean_porosity", row.gen_mean_porosity},
                       {"real_mean_permeability", row.real_mean_permeability},
                       {"gen_mean_permeability", row.gen_mean_permeability}});

    nlohmann::json j{{"config_hash", config_hash(config)},
                     {"porosity_control",
                      {{"r_squared", control.r_squared},
                       {"per_depth_mae", control.per_depth_mae}}},
                     {"distribution_tests", dist_tests},
                     {"representativeness", rep}};
    auto out = config.work_dir / "report.json";
    write_json_atomic(out, j);

    Series scatter{"probes", control.targets, control.observed, "#d62728"};
    auto plot = config.work_dir / "plots" / "porosity_control.svg";
    fs::create_directories(plot.parent_path());
    write_scatter_plot(plot, "Porosity control", "target porosity", "measured porosity",
                       {scatter}, true);
    return {"petro-report", {out, plot}};
}

}  // namespace

BinaryMask heuristic_segment(const RgbImage& image) {
    const RgbImage* img = &image;
    RgbImage storage;
    if (image.domain == Domain::Network) {
        storage = from_network_domain(image);
        img = &storage;
    }
    BinaryMask mask = BinaryMask::filled(img->width, img->height, 0);
    for (int y = 0; y < img->height; ++y)
        for (int x = 0; x < img->width; ++x)
            mask.at(x, y) = img->at(x, y, 2) - img->at(x, y, 0) > 60.0f ? 1 : 0;
    return mask;
}

const std::vector<std::string>& stage_sequence() {
    static const std::vector<std::string> order = {
        "prep-synth",  "seg-train",    "prep-rev",     "prep-extract", "prep-balance",
        "gan-train",   "gan-generate", "morph-analyze", "petro-score", "petro-select",
        "petro-report"};
    return order;
}

StageResult run_stage(const std::string& name, const PipelineConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    StageResult result;
    if (name == "prep-synth") result = stage_prep_synth(config);
    else if (name == "prep-rev") result = stage_prep_rev(config);
    else if (name == "prep-extract") result = stage_prep_extract(config);
    else if (name == "prep-balance") result = stage_prep_balance(config);
    else if (name == "seg-train") result = stage_seg_train(config);
    else if (name == "seg-apply") result = stage_seg_apply(config);
    else if (name == "seg-eval") result = stage_seg_eval(config);
    else if (name == "gan-train") result = stage_gan_train(config);
    else if (name == "gan-generate") result = stage_gan_generate(config);
    else if (name == "morph-analyze") result = stage_morph_analyze(config);
    else if (name == "petro-score") result = stage_petro_score(config);
    else if (name == "petro-select") result = stage_petro_select(config);
    else if (name == "petro-report") result = stage_petro_report(config);
    else throw ValidationError("unknown stage: " + name);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    append_runlog(config, result);
    return result;
}

}  // namespace porogen::pipeline
