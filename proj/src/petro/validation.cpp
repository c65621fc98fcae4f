#include "porogen/petro/validation.hpp"

#include <cmath>

#include "porogen/morph/metrics.hpp"

namespace porogen::petro {

double permeability(double porosity, double throat_radius_um) {
    if (porosity < 0.0 || porosity > 1.0 || throat_radius_um < 0.0)
        throw ValidationError("permeability: porosity must be in [0,1], throat radius >= 0");
    return 1.3049 * std::exp(1.7432 * porosity * throat_radius_um);
}

DualConstraintScore dual_constraint_error(double calc_porosity, double calc_permeability,
                                          const PetroTargets& target, double w_phi, double w_k) {
    if (target.core_porosity <= 0.0 || target.core_permeability <= 0.0)
        throw ValidationError("dual_constraint_error: target porosity and permeability must be > 0");
    DualConstraintScore s;
    s.w_phi = w_phi;
    s.w_k = w_k;
    s.porosity_term = std::abs(target.core_porosity - calc_porosity) / target.core_porosity;
    s.permeability_term =
        std::abs(target.core_permeability - calc_permeability) / target.core_permeability;
    s.error = w_phi * s.porosity_term + w_k * s.permeability_term;
    return s;
}

std::vector<CandidateScore> score_candidates(const std::vector<RgbImage>& candidates,
                                             const PetroTargets& target, const SegmentFn& segment,
                                             double w_phi, double w_k) {
    if (candidates.empty()) throw ValidationError("score_candidates: empty candidate list");
    std::vector<CandidateScore> scores(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
        BinaryMask mask = segment(candidates[i]);
        CandidateScore c;
        c.index = i;
        c.porosity = porosity_of_mask(mask);
        double rth = c.porosity > 0.0
                         ? morph::weighted_throat_radius(mask, candidates[i].pixel_size)
                         : 0.0;
        c.permeability = permeability(c.porosity, rth);
        c.score = dual_constraint_error(c.porosity, c.permeability, target, w_phi, w_k);
        scores[i] = c;
    }
    return scores;
}

std::pair<int, CandidateScore> select_representative(const std::vector<RgbImage>& candidates,
                                                     const PetroTargets& target,
                                                     const SegmentFn& segment, double w_phi,
                                                     double w_k) {
    auto scores = score_candidates(candidates, target, segment, w_phi, w_k);
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
        if (scores[i].score.error < scores[best].score.error) best = i;
    return {best, scores[best]};
}

PorosityControlReport porosity_control_report(const GenerateFn& generate, const SegmentFn& segment,
                                              const std::vector<PorosityProbe>& probes,
                                              std::uint64_t seed) {
    if (probes.empty()) throw ValidationError("porosity_control_report: no probes");
    PorosityControlReport rep;
    int n_depths = probes.front().depth.n_depths;
    std::vector<double> depth_abs_err(n_depths, 0.0);
    std::vector<int> depth_count(n_depths, 0);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& p = probes[i];
        auto images = generate(p.target, p.depth, 1, seed + i);
        double observed = porosity_of_mask(segment(images.at(0)));
        rep.targets.push_back(p.target);
        rep.observed.push_back(observed);
        rep.depth_of_probe.push_back(p.depth.index);
        depth_abs_err[p.depth.index] += std::abs(observed - p.target);
        depth_count[p.depth.index] += 1;
    }
    rep.r_squared = stats::r_squared(rep.targets, rep.observed);
    rep.per_depth_mae.assign(n_depths, 0.0);
    for (int d = 0; d < n_depths; ++d)
        if (depth_count[d] > 0) rep.per_depth_mae[d] = depth_abs_err[d] / depth_count[d];
    return rep;
}

RepresentativenessStudy representativeness_study(
    const std::vector<std::vector<RgbImage>>& real_subimages_per_depth, const GenerateFn& generate,
    const SegmentFn& segment, const std::vector<PetroTargets>& targets,
    int candidates_per_selection, int n_selected, std::uint64_t seed) {
    if (targets.size() != real_subimages_per_depth.size())
        throw ValidationError("representativeness_study: targets/cohorts size mismatch");
    RepresentativenessStudy study;
    for (std::size_t d = 0; d < targets.size(); ++d) {
        const auto& target = targets[d];
        const auto& reals = real_subimages_per_depth[d];
        if (static_cast<int>(reals.size()) < 10)
            throw ValidationError("representativeness_study: need >= 10 real sub-images per depth");
        RepresentativenessRow row;
        row.target = target;
        auto real_scores = score_candidates(reals, target, segment);
        for (const auto& s : real_scores) {
            row.real_errors.push_back(s.score.error);
            row.real_porosities.push_back(s.porosity);
            row.real_permeabilities.push_back(s.permeability);
        }
        for (int k = 0; k < n_selected; ++k) {
            auto candidates = generate(target.core_porosity, target.depth,
                                       candidates_per_selection,
                                       seed + d * 1000 + k);
            auto [best, score] = select_representative(candidates, target, segment);
            (void)best;
            row.gen_errors.push_back(score.score.error);
            row.gen_porosities.push_back(score.porosity);
            row.gen_permeabilities.push_back(score.permeability);
        }
        auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return v.empty() ? 0.0 : s / v.size();
        };
        row.real_mean_porosity = mean(row.real_porosities);
        row.real_mean_permeability = mean(row.real_permeabilities);
        row.real_mean_error = mean(row.real_errors);
        row.gen_mean_porosity = mean(row.gen_porosities);
        row.gen_mean_permeability = mean(row.gen_permeabilities);
        row.gen_mean_error = mean(row.gen_errors);
        study.rows.push_back(std::move(row));
    }
    return study;
}

}  // namespace porogen::petro
