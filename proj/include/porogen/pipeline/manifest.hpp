#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "porogen/core/types.hpp"

namespace porogen::pipeline {

/// One manifest line; `path` is relative to the manifest's directory.
struct ManifestRow {
    std::string path;
    int depth_index = 0;
    double porosity = 0.0;
    int porosity_class = -1;
    bool augmented = false;
    std::string source_id;
};

void write_manifest_csv(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path);

void write_manifest_json(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest_json(const std::filesystem::path& path);

/// Corpus layout: depth_<i>/class_<j>/patch_<k>.png under the corpus root.
std::filesystem::path corpus_patch_path(int depth_index, int porosity_class, int patch_index);

/// Writes patch PNGs in the corpus layout plus manifest.csv and
/// manifest.json; returns the CSV path.
std::filesystem::path save_corpus(const std::filesystem::path& root,
                                  const std::vector<PatchRecord>& records, int n_depths);

/// Loads a manifest (CSV or JSON by extension) and its referenced images.
std::vector<PatchRecord> load_corpus(const std::filesystem::path& manifest_path, int n_depths);

}  // namespace porogen::pipeline
