#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "porogen/morph/metrics.hpp"
#include "porogen/petro/validation.hpp"

using namespace porogen;

namespace {

// Images whose blue channel is the mask; the mock segmenter inverts exactly.
RgbImage image_from_mask(const BinaryMask& mask) {
    RgbImage img = RgbImage::zeros(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) img.at(x, y, 2) = mask.at(x, y) ? 255.0f : 0.0f;
    return img;
}

BinaryMask mock_segment(const RgbImage& img) {
    BinaryMask m = BinaryMask::filled(img.width, img.height, 0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) m.at(x, y) = img.at(x, y, 2) > 128.0f ? 1 : 0;
    return m;
}

// Blob mask with approximately the requested porosity.
BinaryMask blob_mask(int size, double porosity, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    BinaryMask m = BinaryMask::filled(size, size, 0);
    int pore_rows = static_cast<int>(porosity * size + uni(rng) * 2.0);
    for (int y = 0; y < std::min(pore_rows, size); ++y)
        for (int x = 0; x < size; ++x) m.at(x, y) = 1;
    return m;
}

}  // namespace

TEST_CASE("permeability formula against direct evaluation") {
    CHECK(petro::permeability(0.0, 7.0) == doctest::Approx(1.3049).epsilon(1e-12));
    CHECK(petro::permeability(0.3, 0.0) == doctest::Approx(1.3049).epsilon(1e-12));
    CHECK(petro::permeability(0.1, 5.0) ==
          doctest::Approx(1.3049 * std::exp(0.8716)).epsilon(1e-12));
    CHECK(petro::permeability(0.1, 5.0) == doctest::Approx(3.121).epsilon(1e-3));

    // Algebraic inversion on the first depth's core targets.
    double rth = std::log(33.64 / 1.3049) / (1.7432 * 0.1573);
    CHECK(rth == doctest::Approx(11.85).epsilon(0.01));
    CHECK(petro::permeability(0.1573, rth) == doctest::Approx(33.64).epsilon(0.003));

    CHECK_THROWS_AS(petro::permeability(-0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(petro::permeability(0.1, -1.0), ValidationError);

    // strictly increasing in phi * R_th
    CHECK(petro::permeability(0.2, 5.0) > petro::permeability(0.2, 4.0));
    CHECK(petro::permeability(0.3, 5.0) > petro::permeability(0.2, 5.0));
}

TEST_CASE("dual-constraint error hand values") {
    petro::PetroTargets target{DepthLabel(0, 2), 0.20, 100.0};
    CHECK(petro::dual_constraint_error(0.20, 100.0, target).error == doctest::Approx(0.0));

    auto s = petro::dual_constraint_error(0.18, 90.0, target);
    CHECK(s.error == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(s.porosity_term == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.permeability_term == doctest::Approx(0.1).epsilon(1e-12));

    CHECK(petro::dual_constraint_error(0.18, 90.0, target, 1.0, 0.0).error ==
          doctest::Approx(0.1).epsilon(1e-12));

    // scale consistency in K
    petro::PetroTargets scaled_target{DepthLabel(0, 2), 0.20, 100.0 * 7.5};
    CHECK(petro::dual_constraint_error(0.18, 90.0 * 7.5, scaled_target).permeability_term ==
          doctest::Approx(s.permeability_term).epsilon(1e-12));

    petro::PetroTargets bad{DepthLabel(0, 2), 0.0, 100.0};
    CHECK_THROWS_AS(petro::dual_constraint_error(0.1, 1.0, bad), ValidationError);
}

TEST_CASE("representative selection matches exhaustive scoring oracle") {
    std::vector<RgbImage> candidates;
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 12; ++i) {
        masks.push_back(blob_mask(48, 0.1 + 0.03 * i, 100 + i));
        candidates.push_back(image_from_mask(masks.back()));
    }
    petro::PetroTargets target{DepthLabel(0, 2), porosity_of_mask(masks[7]), 0.0};
    target.core_permeability = petro::permeability(
        target.core_porosity, morph::weighted_throat_radius(masks[7], 1.0));

    // exhaustive oracle
    int oracle_best = 0;
    double oracle_err = 1e300;
    for (int i = 0; i < 12; ++i) {
        double phi = porosity_of_mask(masks[i]);
        double k = petro::permeability(phi, morph::weighted_throat_radius(masks[i], 1.0));
        double err = petro::dual_constraint_error(phi, k, target).error;
        if (err < oracle_err) {
            oracle_err = err;
            oracle_best = i;
        }
    }
    REQUIRE(oracle_best == 7);

    auto [best, score] = petro::select_representative(candidates, target, mock_segment);
    CHECK(best == 7);
    CHECK(score.score.error == doctest::Approx(0.0).epsilon(1e-12));

    // equal-error tie breaks to the lower index
    std::vector<RgbImage> twins{candidates[7], candidates[7], candidates[3]};
    auto [tie_best, tie_score] = petro::select_representative(
        twins, target, mock_segment);
    CHECK(tie_best == 0);
    (void)tie_score;

    CHECK_THROWS_AS(petro::select_representative({}, target, mock_segment), ValidationError);
}

TEST_CASE("porosity control report on mock generators") {
    auto make_gen = [](double bias) {
        return [bias](double phi, const DepthLabel&, int n, std::uint64_t) {
            std::vector<RgbImage> images;
            for (int i = 0; i < n; ++i) {
                BinaryMask m = BinaryMask::filled(100, 100, 0);
                int rows = static_cast<int>(std::round((phi + bias) * 100));
                for (int y = 0; y < rows; ++y)
                    for (int x = 0; x < 100; ++x) m.at(x, y) = 1;
                images.push_back(image_from_mask(m));
            }
            return images;
        };
    };

    std::vector<petro::PorosityProbe> probes;
    for (int i = 0; i < 10; ++i)
        probes.push_back({0.10 + 0.02 * i, DepthLabel(i % 2, 2)});

    auto perfect = petro::porosity_control_report(make_gen(0.0), mock_segment, probes);
    CHECK(perfect.r_squared == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(perfect.per_depth_mae[0] == doctest::Approx(0.0));
    CHECK(perfect.per_depth_mae[1] == doctest::Approx(0.0));

    auto biased = petro::porosity_control_report(make_gen(0.02), mock_segment, probes);
    CHECK(biased.per_depth_mae[0] == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(biased.per_depth_mae[1] == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(biased.r_squared == doctest::Approx(stats::r_squared(biased.targets,
                                                               biased.observed)));
}

TEST_CASE("representativeness study direction on mock cohorts") {
    // Reals scatter widely around the target; the generator hits it exactly.
    std::vector<std::vector<RgbImage>> reals(1);
    for (int i = 0; i < 12; ++i)
        reals[0].push_back(image_from_mask(blob_mask(60, 0.1 + 0.04 * i, 40 + i)));

    BinaryMask target_mask = blob_mask(60, 0.3, 999);
    petro::PetroTargets target{DepthLabel(0, 1), porosity_of_mask(target_mask), 1.0};
    target.core_permeability = petro::permeability(
        target.core_porosity, morph::weighted_throat_radius(target_mask, 1.0));

    petro::GenerateFn generate = [&](double, const DepthLabel&, int n, std::uint64_t) {
        return std::vector<RgbImage>(static_cast<std::size_t>(n),
                                     image_from_mask(target_mask));
    };
    auto study = petro::representativeness_study(reals, generate, mock_segment, {target}, 20, 3);
    REQUIRE(study.rows.size() == 1);
    CHECK(study.rows[0].gen_mean_error == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(study.rows[0].gen_mean_error < study.rows[0].real_mean_error);

    std::vector<std::vector<RgbImage>> too_few(1);
    too_few[0].assign(5, reals[0][0]);
    CHECK_THROWS_AS(
        petro::representativeness_study(too_few, generate, mock_segment, {target}, 20, 1),
        ValidationError);
}
