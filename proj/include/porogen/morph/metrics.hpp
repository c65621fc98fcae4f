#pragma once

#include <optional>
#include <vector>

#include "porogen/morph/distance.hpp"

namespace porogen::morph {

/// Watershed basins of the distance field. label 0 = solid, 1..n_basins =
/// pore bodies. Ridge pixels separate two or more basins and carry the basin
/// label they were flooded from.
struct PorePartition {
    int width = 0;
    int height = 0;
    int n_basins = 0;
    std::vector<int> labels;

    int label(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// One constriction between two adjacent pore bodies.
struct Throat {
    int basin_a = 0;
    int basin_b = 0;
    double radius_px = 0.0;  // distance-field value at the widest ridge pixel
    int ridge_length = 0;    // ridge pixel count, used as cross-section weight
};

struct PoreNetworkStats {
    double porosity = 0.0;
    double avg_pore_radius = 0.0;       // micrometers
    double specific_surface_area = 0.0; // 1/micrometer
    double tortuosity = 0.0;            // >= 1, 0 when non-percolating
    double weighted_throat_radius = 0.0;// micrometers
    bool percolating = false;
};

/// Watershed of -distance seeded at h-maxima of the distance field
/// (merge threshold 2 px against over-segmentation). 8-connected pore phase.
PorePartition watershed_partition(const BinaryMask& mask, const DistanceField& dist,
                                  double h_merge = 2.0);

std::vector<Throat> extract_throats(const PorePartition& partition, const DistanceField& dist);

/// Mean over pore bodies of the body's maximum inscribed radius.
double average_pore_radius(const BinaryMask& mask, double pixel_size = 1.0);

/// Pore-solid interface length per unit image area (sub-pixel contour).
double specific_surface_area(const BinaryMask& mask, double pixel_size = 1.0);

/// Geodesic tortuosity: per percolating axis, mean over connected inlet pore
/// pixels of geodesic distance to the opposite face over the straight span;
/// empty when no axis percolates.
std::optional<double> geodesic_tortuosity(const BinaryMask& mask);

/// Throws when the pore phase does not percolate along any axis.
double tortuosity(const BinaryMask& mask);

/// Ridge-length-weighted mean throat radius; falls back to
/// average_pore_radius when the partition has no throats.
double weighted_throat_radius(const BinaryMask& mask, double pixel_size = 1.0);

/// Full descriptor bundle for one mask.
PoreNetworkStats analyze_mask(const BinaryMask& mask, double pixel_size = 1.0);

}  // namespace porogen::morph
