#include "porogen/prep/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace porogen::prep {

// ---- patch extraction ---------------------------------------------------

std::vector<RgbImage> extract_patches(const RgbImage& image, int side, int stride) {
    if (side <= 0 || stride <= 0) throw ValidationError("extract_patches: side and stride must be positive");
    if (side > image.width || side > image.height)
        throw ValidationError("extract_patches: side exceeds image dimensions");
    std::vector<RgbImage> patches;
    for (int oy = 0; oy + side <= image.height; oy += stride)
        for (int ox = 0; ox + side <= image.width; ox += stride) {
            RgbImage p = RgbImage::zeros(side, side, image.domain);
            p.pixel_size = image.pixel_size;
            for (int y = 0; y < side; ++y)
                for (int x = 0; x < side; ++x)
                    for (int c = 0; c < 3; ++c) p.at(x, y, c) = image.at(ox + x, oy + y, c);
            patches.push_back(std::move(p));
        }
    return patches;
}

// ---- REV analysis -------------------------------------------------------

namespace {

// inclusive prefix sums of pore counts for O(1) window porosity
struct MaskSums {
    int width = 0, height = 0;
    std::vector<std::int64_t> sums;  // (w+1)*(h+1)

    explicit MaskSums(const BinaryMask& m) : width(m.width), height(m.height) {
        sums.assign(static_cast<std::size_t>(width + 1) * (height + 1), 0);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                at(x + 1, y + 1) = m.at(x, y) + at(x, y + 1) + at(x + 1, y) - at(x, y);
    }
    std::int64_t& at(int x, int y) { return sums[static_cast<std::size_t>(y) * (width + 1) + x]; }
    std::int64_t at(int x, int y) const { return sums[static_cast<std::size_t>(y) * (width + 1) + x]; }
    double window_porosity(int x, int y, int side) const {
        std::int64_t pore = at(x + side, y + side) - at(x, y + side) - at(x + side, y) + at(x, y);
        return static_cast<double>(pore) / (static_cast<double>(side) * side);
    }
};

}  // namespace

RevCurve rev_analysis(const std::vector<RgbImage>& images, const SegmentFn& segment,
                      const std::vector<int>& sizes, int max_windows, std::uint64_t seed) {
    if (images.empty()) throw ValidationError("rev_analysis: empty image list");
    std::vector<MaskSums> masks;
    masks.reserve(images.size());
    for (const auto& img : images) masks.emplace_back(segment(img));

    std::mt19937_64 rng(seed);
    RevCurve curve;
    for (int size : sizes) {
        std::vector<double> porosities;
        for (const auto& m : masks) {
            if (size > m.width || size > m.height) continue;
            const int nx = m.width - size + 1, ny = m.height - size + 1;
            const std::int64_t total = static_cast<std::int64_t>(nx) * ny;
            if (total <= max_windows) {
                for (int y = 0; y < ny; ++y)
                    for (int x = 0; x < nx; ++x) porosities.push_back(m.window_porosity(x, y, size));
            } else {
                std::uniform_int_distribution<int> dx(0, nx - 1), dy(0, ny - 1);
                for (int k = 0; k < max_windows; ++k)
                    porosities.push_back(m.window_porosity(dx(rng), dy(rng), size));
            }
        }
        if (porosities.empty()) {
            curve.skipped_sizes.push_back(size);
            continue;
        }
        double mean = 0.0;
        for (double p : porosities) mean += p;
        mean /= porosities.size();
        double var = 0.0;
        for (double p : porosities) var += (p - mean) * (p - mean);
        var = porosities.size() > 1 ? var / (porosities.size() - 1) : 0.0;
        curve.sizes.push_back(size);
        curve.mean_porosity.push_back(mean);
        curve.sigma.push_back(std::sqrt(var));
    }
    return curve;
}

RevResult select_patch_size(const RevCurve& curve, double threshold) {
    if (curve.sizes.empty()) throw ValidationError("select_patch_size: empty curve");
    for (std::size_t i = 0; i < curve.sizes.size(); ++i)
        if (curve.sigma[i] <= threshold) return {curve.sizes[i], true};
    return {curve.sizes.back(), false};
}

// ---- porosity classing --------------------------------------------------

int PorosityClassScheme::assign(int depth_index, double porosity) const {
    const auto& bins = per_depth.at(depth_index);
    if (porosity <= bins.min_porosity) return 0;
    if (porosity >= bins.max_porosity) return n_classes - 1;
    const double width = (bins.max_porosity - bins.min_porosity) / n_classes;
    int cls = static_cast<int>((porosity - bins.min_porosity) / width);
    return std::clamp(cls, 0, n_classes - 1);
}

PorosityClassScheme build_class_scheme(const std::vector<std::vector<double>>& porosities_per_depth,
                                       int n_classes) {
    PorosityClassScheme scheme;
    scheme.n_classes = n_classes;
    for (const auto& vals : porosities_per_depth) {
        std::set<double> distinct(vals.begin(), vals.end());
        if (static_cast<int>(distinct.size()) < n_classes)
            throw ValidationError("build_class_scheme: need >= n_classes distinct porosities per depth");
        DepthClassBins bins;
        bins.min_porosity = *std::min_element(vals.begin(), vals.end());
        bins.max_porosity = *std::max_element(vals.begin(), vals.end());
        if (bins.max_porosity <= bins.min_porosity)
            throw ValidationError("build_class_scheme: degenerate porosity range");
        const double width = (bins.max_porosity - bins.min_porosity) / n_classes;
        for (int i = 0; i <= n_classes; ++i) bins.edges.push_back(bins.min_porosity + i * width);
        scheme.per_depth.push_back(std::move(bins));
    }
    return scheme;
}

// ---- augmentation -------------------------------------------------------

namespace {

std::pair<int, int> map_coord(AugKind kind, int x, int y, int w, int h) {
    switch (kind) {
        case AugKind::HFlip: return {w - 1 - x, y};
        case AugKind::VFlip: return {x, h - 1 - y};
        case AugKind::Rot180: return {w - 1 - x, h - 1 - y};
        case AugKind::Rot90: return {y, w - 1 - x};        // source coord for dst (x,y), dst is h x w
        case AugKind::Rot270: return {h - 1 - y, x};
        default: return {x, y};
    }
}

}  // namespace

RgbImage apply_geometric(const RgbImage& image, AugKind kind) {
    if (kind == AugKind::IntensityNoise) throw ValidationError("apply_geometric: not a geometric op");
    const bool swaps = kind == AugKind::Rot90 || kind == AugKind::Rot270;
    RgbImage out = RgbImage::zeros(swaps ? image.height : image.width,
                                   swaps ? image.width : image.height, image.domain);
    out.pixel_size = image.pixel_size;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            auto [sx, sy] = map_coord(kind, x, y, out.width, out.height);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = image.at(sx, sy, c);
        }
    return out;
}

BinaryMask apply_geometric(const BinaryMask& mask, AugKind kind) {
    if (kind == AugKind::IntensityNoise) throw ValidationError("apply_geometric: not a geometric op");
    const bool swaps = kind == AugKind::Rot90 || kind == AugKind::Rot270;
    BinaryMask out = BinaryMask::filled(swaps ? mask.height : mask.width,
                                        swaps ? mask.width : mask.height, 0);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            auto [sx, sy] = map_coord(kind, x, y, out.width, out.height);
            out.at(x, y) = mask.at(sx, sy);
        }
    return out;
}

namespace {

RgbImage add_intensity_noise(const RgbImage& image, std::uint64_t seed) {
    if (image.domain != Domain::Storage)
        throw ValidationError("intensity noise applies in storage domain");
    RgbImage out = image;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> noise(-2, 2);
    for (float& v : out.data)
        v = std::clamp(v + static_cast<float>(noise(rng)), 0.0f, 255.0f);
    return out;
}

}  // namespace

PatchRecord augment(const PatchRecord& patch, const AugmentationOp& op, const SegmentFn& segment,
                    double label_drift_tol, int max_retries) {
    PatchRecord out = patch;
    out.augmented = true;
    if (op.kind != AugKind::IntensityNoise) {
        out.image = apply_geometric(patch.image, op.kind);
        return out;  // exact pixel permutation, porosity label unchanged
    }
    std::uint64_t seed = op.noise_seed;
    for (int attempt = 0; attempt < max_retries; ++attempt, ++seed) {
        out.image = add_intensity_noise(patch.image, seed);
        double relabeled = porosity_of_mask(segment(out.image));
        if (std::abs(relabeled - patch.porosity) <= label_drift_tol) {
            out.porosity = relabeled;
            return out;
        }
    }
    throw ValidationError("augment: intensity noise rejected, porosity label drift > tolerance");
}

// ---- balancing ----------------------------------------------------------

std::vector<PatchRecord> balance_dataset(std::vector<PatchRecord> records,
                                         const PorosityClassScheme& scheme, const SegmentFn& segment,
                                         BalanceReport* report, int target, int min_size,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::map<CellKey, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        r.porosity_class = scheme.assign(r.depth.index, r.porosity);
        r.excluded = false;
        cells[{r.depth.index, r.porosity_class}].push_back(i);
    }

    BalanceReport local;
    std::vector<PatchRecord> balanced;
    static constexpr AugKind kGeometric[] = {AugKind::HFlip, AugKind::VFlip, AugKind::Rot90,
                                             AugKind::Rot180, AugKind::Rot270};
    for (auto& [key, indices] : cells) {
        const int count = static_cast<int>(indices.size());
        if (count < min_size) {
            local.excluded_cells.push_back(key);
            continue;
        }
        if (count >= target) {
            std::shuffle(indices.begin(), indices.end(), rng);
            for (int i = 0; i < target; ++i) balanced.push_back(records[indices[i]]);
            local.downsampled_count += count - target;
            continue;
        }
        for (std::size_t i : indices) balanced.push_back(records[i]);
        // Fill with unique geometric variants first, then noise variants.
        std::vector<std::pair<std::size_t, AugKind>> geo_pool;
        for (std::size_t i : indices)
            for (AugKind k : kGeometric) geo_pool.emplace_back(i, k);
        std::shuffle(geo_pool.begin(), geo_pool.end(), rng);
        int needed = target - count;
        std::size_t next_source = 0;
        while (needed > 0) {
            AugmentationOp op;
            std::size_t source;
            if (!geo_pool.empty()) {
                auto [s, k] = geo_pool.back();
                geo_pool.pop_back();
                source = s;
                op.kind = k;
            } else {
                source = indices[next_source++ % indices.size()];
                op.kind = AugKind::IntensityNoise;
                op.noise_seed = rng();
            }
            try {
                balanced.push_back(augment(records[source], op, segment));
                local.augmented_count += 1;
                --needed;
            } catch (const ValidationError&) {
                // drifted noise op: try another source/seed
            }
        }
    }
    if (report) *report = local;
    return balanced;
}

// ---- synthetic corpus ---------------------------------------------------

namespace {

std::vector<float> gaussian_smooth_field(int size, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    std::vector<float> field(static_cast<std::size_t>(size) * size);
    for (float& v : field) v = gauss(rng);

    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<float> kernel(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)));
        ksum += kernel[i + radius];
    }
    for (float& k : kernel) k = static_cast<float>(k / ksum);

    std::vector<float> tmp(field.size());
    auto clampi = [&](int v) { return std::clamp(v, 0, size - 1); };
#pragma omp parallel for
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            float s = 0.0f;
            for (int i = -radius; i <= radius; ++i)
                s += kernel[i + radius] * field[static_cast<std::size_t>(y) * size + clampi(x + i)];
            tmp[static_cast<std::size_t>(y) * size + x] = s;
        }
#pragma omp parallel for
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            float s = 0.0f;
            for (int i = -radius; i <= radius; ++i)
                s += kernel[i + radius] * tmp[static_cast<std::size_t>(clampi(y + i)) * size + x];
            field[static_cast<std::size_t>(y) * size + x] = s;
        }
    return field;
}

double field_porosity(const std::vector<float>& field, float threshold) {
    std::size_t pore = 0;
    for (float v : field) pore += (v < threshold);
    return static_cast<double>(pore) / field.size();
}

}  // namespace

SynthSample synthesize_sample(int image_size, double porosity, const DepthLabel& depth,
                              std::uint64_t seed, double tolerance) {
    if (porosity <= 0.0 || porosity >= 1.0)
        throw ValidationError("synthesize_sample: porosity must lie strictly inside (0,1)");
    std::mt19937_64 rng(seed);
    // Two depth styles: fine-grained vs coarse-grained correlation length.
    const int style = depth.index % 2;
    const double sigma = style == 0 ? 1.6 : 4.0;
    std::vector<float> field = gaussian_smooth_field(image_size, sigma, rng);

    // Bisection on the threshold against the exact pixel count.
    float lo = *std::min_element(field.begin(), field.end());
    float hi = *std::max_element(field.begin(), field.end());
    float t = 0.0f;
    for (int it = 0; it < 64; ++it) {
        t = 0.5f * (lo + hi);
        double phi = field_porosity(field, t);
        if (std::abs(phi - porosity) <= tolerance * 0.5) break;
        if (phi < porosity) lo = t;
        else hi = t;
    }

    SynthSample sample;
    sample.depth = depth;
    sample.mask = BinaryMask::filled(image_size, image_size, 0);
    for (std::size_t i = 0; i < field.size(); ++i) sample.mask.data[i] = field[i] < t ? 1 : 0;
    sample.porosity = porosity_of_mask(sample.mask);
    if (std::abs(sample.porosity - porosity) > tolerance)
        throw ValidationError("synthesize_sample: requested porosity unattainable for this field");

    // Epoxy-blue pores over a style-dependent matrix color.
    const float pore_rgb[3] = {45.0f, 70.0f, 205.0f};
    const float matrix_rgb[2][3] = {{185.0f, 158.0f, 118.0f}, {148.0f, 148.0f, 155.0f}};
    std::uniform_real_distribution<float> jitter(-9.0f, 9.0f);
    sample.image = RgbImage::zeros(image_size, image_size);
    for (int y = 0; y < image_size; ++y)
        for (int x = 0; x < image_size; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * image_size + x;
            const float* base = sample.mask.data[i] ? pore_rgb : matrix_rgb[style];
            // modulate by the field to give grain-like shading
            float shade = 10.0f * (field[i] - t);
            for (int c = 0; c < 3; ++c)
                sample.image.at(x, y, c) =
                    std::clamp(base[c] + jitter(rng) + (sample.mask.data[i] ? 0.0f : shade), 0.0f,
                               255.0f);
        }
    return sample;
}

std::vector<SynthSample> synthesize_corpus(const SynthParams& p) {
    if (p.min_porosity <= 0.0 || p.max_porosity >= 1.0 || p.min_porosity >= p.max_porosity)
        throw ValidationError("synthesize_corpus: porosity range must be inside (0,1)");
    std::vector<SynthSample> corpus;
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> phi(p.min_porosity, p.max_porosity);
    for (int d = 0; d < p.n_depths; ++d)
        for (int i = 0; i < p.per_depth_count; ++i)
            corpus.push_back(synthesize_sample(p.image_size, phi(rng), DepthLabel(d, p.n_depths),
                                               rng(), p.porosity_tolerance));
    return corpus;
}

}  // namespace porogen::prep
