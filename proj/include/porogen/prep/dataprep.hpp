#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "porogen/core/types.hpp"

namespace porogen::prep {

using SegmentFn = std::function<BinaryMask(const RgbImage&)>;

/// ---- patch extraction -------------------------------------------------

/// All fully-inside axis-aligned windows at offsets {0, stride, 2*stride, ...},
/// row-major.
std::vector<RgbImage> extract_patches(const RgbImage& image, int side, int stride);

/// ---- REV analysis -----------------------------------------------------

struct RevCurve {
    std::vector<int> sizes;
    std::vector<double> sigma;        // per-size porosity standard deviation
    std::vector<double> mean_porosity;
    std::vector<int> skipped_sizes;   // sizes exceeding every image
};

struct RevResult {
    int patch_size = 0;
    bool threshold_met = true;  // false when no size satisfied the threshold
};

/// Porosity mean/stddev over sampled windows per size. Each image is
/// segmented once; window porosity is read from the mask. Up to max_windows
/// random windows per size per image (exhaustive when fewer exist).
RevCurve rev_analysis(const std::vector<RgbImage>& images, const SegmentFn& segment,
                      const std::vector<int>& sizes, int max_windows = 200,
                      std::uint64_t seed = 0);

/// Smallest size with sigma <= threshold; falls back to the largest size with
/// a flag when none qualifies.
RevResult select_patch_size(const RevCurve& curve, double threshold = 0.06);

/// ---- porosity classing ------------------------------------------------

struct DepthClassBins {
    double min_porosity = 0.0;
    double max_porosity = 0.0;
    std::vector<double> edges;  // n_classes + 1 monotone edges
};

/// Equal-width bins over the observed porosity span, built per depth.
struct PorosityClassScheme {
    int n_classes = 10;
    std::vector<DepthClassBins> per_depth;

    /// Bin of a porosity value at a depth: half-open bins, last bin closed.
    /// Values outside [min,max] map to the nearest end bin.
    int assign(int depth_index, double porosity) const;
};

PorosityClassScheme build_class_scheme(const std::vector<std::vector<double>>& porosities_per_depth,
                                       int n_classes = 10);

/// ---- augmentation -----------------------------------------------------

enum class AugKind { HFlip, VFlip, Rot90, Rot180, Rot270, IntensityNoise };

struct AugmentationOp {
    AugKind kind = AugKind::HFlip;
    std::uint64_t noise_seed = 0;  // used by IntensityNoise only
};

RgbImage apply_geometric(const RgbImage& image, AugKind kind);
BinaryMask apply_geometric(const BinaryMask& mask, AugKind kind);

/// Geometric ops permute pixels exactly; intensity noise adds i.i.d. integer
/// noise in [-2,2] clipped to [0,255]. The porosity label is re-evaluated via
/// the segmenter and the op is rejected when it drifts more than
/// label_drift_tol.
PatchRecord augment(const PatchRecord& patch, const AugmentationOp& op, const SegmentFn& segment,
                    double label_drift_tol = 0.01, int max_retries = 8);

/// ---- balancing --------------------------------------------------------

struct CellKey {
    int depth = 0;
    int porosity_class = 0;
    auto operator<=>(const CellKey&) const = default;
};

struct BalanceReport {
    std::vector<CellKey> excluded_cells;  // below min_size, dropped
    int augmented_count = 0;
    int downsampled_count = 0;
};

/// Cells below min_size are excluded; cells in [min_size, target) are filled
/// with augmented copies; cells above target are uniformly downsampled.
std::vector<PatchRecord> balance_dataset(std::vector<PatchRecord> records,
                                         const PorosityClassScheme& scheme,
                                         const SegmentFn& segment, BalanceReport* report = nullptr,
                                         int target = 160, int min_size = 20,
                                         std::uint64_t seed = 0);

/// ---- synthetic corpus -------------------------------------------------

struct SynthParams {
    int image_size = 96;
    int n_depths = 2;
    int per_depth_count = 100;
    double min_porosity = 0.08;
    double max_porosity = 0.45;
    double porosity_tolerance = 0.005;
    std::uint64_t seed = 0;
};

struct SynthSample {
    RgbImage image;
    BinaryMask mask;  // exact ground truth
    double porosity = 0.0;
    DepthLabel depth;
};

/// Procedural two-phase textures: thresholded smoothed random fields with
/// exactly known masks. Depth styles differ in correlation length (>= 2x) and
/// matrix color; pores are rendered epoxy-blue. The threshold is solved by
/// bisection so achieved mask porosity lands within porosity_tolerance of the
/// request.
std::vector<SynthSample> synthesize_corpus(const SynthParams& params);

/// One sample at an exact porosity request.
SynthSample synthesize_sample(int image_size, double porosity, const DepthLabel& depth,
                              std::uint64_t seed, double tolerance = 0.005);

}  // namespace porogen::prep
