#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "porogen/core/types.hpp"
#include "porogen/pipeline/config.hpp"

namespace porogen::pipeline {

struct StageResult {
    std::string stage;
    std::vector<std::filesystem::path> artifacts;
    double wall_seconds = 0.0;
};

/// Color-threshold binarizer (pore iff blue dominates red); exact on the
/// synthetic rendering and used by prep stages that run before a segmenter
/// has been trained.
BinaryMask heuristic_segment(const RgbImage& image);

/// Stage names in full-pipeline order (the `run all` sequence).
const std::vector<std::string>& stage_sequence();

/// Executes one named stage; artifacts land under config.work_dir (corpus
/// under config.corpus_dir) and every run appends to work_dir/runlog.jsonl.
/// Missing inputs raise MissingPrerequisiteError naming the producing stage.
StageResult run_stage(const std::string& name, const PipelineConfig& config);

}  // namespace porogen::pipeline
