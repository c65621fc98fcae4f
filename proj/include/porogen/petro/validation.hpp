#pragma once

#include <functional>
#include <vector>

#include "porogen/core/types.hpp"
#include "porogen/stats/stats.hpp"

namespace porogen::petro {

/// Binarizer used to measure porosity of candidate images.
using SegmentFn = std::function<BinaryMask(const RgbImage&)>;

/// Image source for generated candidates: (porosity, depth, count, seed).
using GenerateFn =
    std::function<std::vector<RgbImage>(double, const DepthLabel&, int, std::uint64_t)>;

/// Core-measured targets for one depth.
struct PetroTargets {
    DepthLabel depth;
    double core_porosity = 0.0;      // fraction
    double core_permeability = 0.0;  // millidarcy
};

/// Weighted relative deviation from the (porosity, permeability) target pair.
struct DualConstraintScore {
    double error = 0.0;
    double porosity_term = 0.0;
    double permeability_term = 0.0;
    double w_phi = 0.5;
    double w_k = 0.5;
};

/// Empirical permeability in millidarcy from porosity and weighted mean
/// throat radius (micrometers): K = 1.3049 * exp(1.7432 * phi * R_th).
double permeability(double porosity, double throat_radius_um);

DualConstraintScore dual_constraint_error(double calc_porosity, double calc_permeability,
                                          const PetroTargets& target, double w_phi = 0.5,
                                          double w_k = 0.5);

struct CandidateScore {
    int index = 0;
    double porosity = 0.0;
    double permeability = 0.0;
    DualConstraintScore score;
};

/// Scores every candidate (porosity via segmentation, permeability via throat
/// radius) and returns the argmin; ties break to the lowest index.
std::pair<int, CandidateScore> select_representative(const std::vector<RgbImage>& candidates,
                                                     const PetroTargets& target,
                                                     const SegmentFn& segment,
                                                     double w_phi = 0.5, double w_k = 0.5);

std::vector<CandidateScore> score_candidates(const std::vector<RgbImage>& candidates,
                                             const PetroTargets& target, const SegmentFn& segment,
                                             double w_phi = 0.5, double w_k = 0.5);

/// One probe of the porosity-control evaluation.
struct PorosityProbe {
    double target = 0.0;
    DepthLabel depth;
};

struct PorosityControlReport {
    double r_squared = 0.0;
    std::vector<double> per_depth_mae;
    std::vector<double> targets;
    std::vector<double> observed;
    std::vector<int> depth_of_probe;
};

/// Generates one image per probe, measures porosity with the segmenter, and
/// reports overall R^2 plus per-depth MAE.
PorosityControlReport porosity_control_report(const GenerateFn& generate,
                                              const SegmentFn& segment,
                                              const std::vector<PorosityProbe>& probes,
                                              std::uint64_t seed = 0);

/// Cohort comparison row: random real sub-images vs dual-constraint-selected
/// generated images for one depth.
struct RepresentativenessRow {
    PetroTargets target;
    double real_mean_porosity = 0.0;
    double real_mean_permeability = 0.0;
    double real_mean_error = 0.0;
    double gen_mean_porosity = 0.0;
    double gen_mean_permeability = 0.0;
    double gen_mean_error = 0.0;
    std::vector<double> real_errors;
    std::vector<double> gen_errors;
    std::vector<double> real_porosities;
    std::vector<double> gen_porosities;
    std::vector<double> real_permeabilities;
    std::vector<double> gen_permeabilities;
};

struct RepresentativenessStudy {
    std::vector<RepresentativenessRow> rows;
};

/// Per-depth study: scores real sub-image cohorts against core targets and
/// compares with the best-of-n generated candidates (repeated n_selected
/// times with distinct seeds). Cohort error is the mean of per-image errors.
RepresentativenessStudy representativeness_study(
    const std::vector<std::vector<RgbImage>>& real_subimages_per_depth,
    const GenerateFn& generate, const SegmentFn& segment,
    const std::vector<PetroTargets>& targets, int candidates_per_selection = 100,
    int n_selected = 10, std::uint64_t seed = 0);

}  // namespace porogen::petro
