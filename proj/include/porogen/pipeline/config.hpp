#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace porogen::pipeline {

struct DepthTableEntry {
    double depth_m = 0.0;
    double core_porosity = 0.0;      // fraction
    double core_permeability = 0.0;  // millidarcy
};

/// Single human-editable JSON config driving every stage; unset keys take the
/// documented defaults.
struct PipelineConfig {
    std::filesystem::path corpus_dir = "corpus";
    std::filesystem::path work_dir = "work";  // manifests, checkpoints, reports

    std::vector<DepthTableEntry> depth_table;

    int patch_size = 0;  // 0 = choose via REV analysis
    int n_classes = 10;
    int target_per_class = 160;
    int min_class_size = 20;
    double rev_threshold = 0.06;

    double w_phi = 0.5;
    double w_k = 0.5;

    std::string arch = "original";
    bool toy = false;
    int epochs = 200;
    int batch_size = 16;

    int seg_epochs = 20;
    int synth_image_size = 96;
    int synth_per_depth = 100;

    double pixel_size = 1.0;
    std::uint64_t seed = 0;

    int n_depths() const { return static_cast<int>(depth_table.size()); }
};

/// Parses and validates; unknown keys and out-of-range values are aggregated
/// into one ValidationError listing every problem.
PipelineConfig validate_config(const std::filesystem::path& file);
PipelineConfig validate_config_json(const nlohmann::json& j);

/// Normalized dump: every effective value plus a provenance note for each
/// defaulted field.
nlohmann::json normalized_dump(const PipelineConfig& config);

/// FNV-1a hash of the normalized dump; embedded in every artifact of a run.
std::string config_hash(const PipelineConfig& config);

}  // namespace porogen::pipeline
