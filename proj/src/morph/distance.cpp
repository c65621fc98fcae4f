#include "porogen/morph/distance.hpp"

#include <cmath>
#include <limits>

namespace porogen::morph {

namespace {

constexpr float kInf = std::numeric_limits<float>::max() / 4;

// 1D squared distance transform of a sampled function (Felzenszwalb &
// Huttenlocher lower envelope of parabolas).
void dt1d(const float* f, float* d, int n, int* v, float* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        float s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0f * (q - v[k]));
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0f * (q - v[k]));
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
    }
}

}  // namespace

DistanceField distance_transform(const BinaryMask& mask, Exec exec) {
    if (mask.empty()) throw ValidationError("distance_transform: empty mask");
    // Work on a grid padded with one ring of solid so the boundary acts as solid.
    const int pw = mask.width + 2;
    const int ph = mask.height + 2;
    std::vector<float> grid(static_cast<std::size_t>(pw) * ph, 0.0f);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            grid[static_cast<std::size_t>(y + 1) * pw + (x + 1)] = mask.at(x, y) ? kInf : 0.0f;

    const bool parallel = exec == Exec::Parallel;

    // Column pass.
#pragma omp parallel if (parallel)
    {
        std::vector<float> f(ph), d(ph);
        std::vector<int> v(ph);
        std::vector<float> z(ph + 1);
#pragma omp for
        for (int x = 0; x < pw; ++x) {
            for (int y = 0; y < ph; ++y) f[y] = grid[static_cast<std::size_t>(y) * pw + x];
            dt1d(f.data(), d.data(), ph, v.data(), z.data());
            for (int y = 0; y < ph; ++y) grid[static_cast<std::size_t>(y) * pw + x] = d[y];
        }
    }
    // Row pass.
#pragma omp parallel if (parallel)
    {
        std::vector<float> d(pw);
        std::vector<int> v(pw);
        std::vector<float> z(pw + 1);
#pragma omp for
        for (int y = 0; y < ph; ++y) {
            float* row = grid.data() + static_cast<std::size_t>(y) * pw;
            dt1d(row, d.data(), pw, v.data(), z.data());
            for (int x = 0; x < pw; ++x) row[x] = d[x];
        }
    }

    DistanceField out;
    out.width = mask.width;
    out.height = mask.height;
    out.data.resize(mask.data.size());
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            out.at(x, y) = std::sqrt(grid[static_cast<std::size_t>(y + 1) * pw + (x + 1)]);
    return out;
}

}  // namespace porogen::morph
