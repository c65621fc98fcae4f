#include "porogen/morph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numbers>
#include <queue>

namespace porogen::morph {

namespace {

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

inline bool inside(int x, int y, int w, int h) { return x >= 0 && x < w && y >= 0 && y < h; }

// Grayscale reconstruction by dilation of marker under mask, restricted to
// pore pixels (8-connected). Iterated raster scans until stable; distance
// fields converge in a handful of sweeps.
std::vector<float> reconstruct_dilation(const std::vector<float>& marker,
                                        const std::vector<float>& ceiling,
                                        const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<float> r = marker;
    bool changed = true;
    while (changed) {
        changed = false;
        // forward pass
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                std::size_t i = static_cast<std::size_t>(y) * w + x;
                if (!mask.data[i]) continue;
                float best = r[i];
                for (int k : {1, 3, 5, 7}) {  // left, up, up-right, up-left
                    int nx = x - kDx[k], ny = y - kDy[k];
                    if (inside(nx, ny, w, h) && mask.at(nx, ny))
                        best = std::max(best, r[static_cast<std::size_t>(ny) * w + nx]);
                }
                best = std::min(best, ceiling[i]);
                if (best > r[i]) { r[i] = best; changed = true; }
            }
        // backward pass
        for (int y = h - 1; y >= 0; --y)
            for (int x = w - 1; x >= 0; --x) {
                std::size_t i = static_cast<std::size_t>(y) * w + x;
                if (!mask.data[i]) continue;
                float best = r[i];
                for (int k : {0, 2, 4, 6}) {  // right, down, down-right, down-left
                    int nx = x + kDx[k], ny = y + kDy[k];
                    if (inside(nx, ny, w, h) && mask.at(nx, ny))
                        best = std::max(best, r[static_cast<std::size_t>(ny) * w + nx]);
                }
                best = std::min(best, ceiling[i]);
                if (best > r[i]) { r[i] = best; changed = true; }
            }
    }
    return r;
}

// Exact regional maxima: flood each equal-value plateau and keep it only if
// no pore neighbor is higher.
std::vector<int> regional_maxima_labels(const std::vector<float>& field, const BinaryMask& mask,
                                        int& n_labels) {
    const int w = mask.width, h = mask.height;
    std::vector<int> label(field.size(), 0);
    std::vector<std::uint8_t> visited(field.size(), 0);
    n_labels = 0;
    std::vector<std::size_t> plateau;
    std::queue<std::size_t> q;
    for (std::size_t start = 0; start < field.size(); ++start) {
        if (visited[start] || !mask.data[start]) continue;
        plateau.clear();
        bool is_max = true;
        const float v = field[start];
        visited[start] = 1;
        q.push(start);
        while (!q.empty()) {
            std::size_t i = q.front();
            q.pop();
            plateau.push_back(i);
            int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
            for (int k = 0; k < 8; ++k) {
                int nx = x + kDx[k], ny = y + kDy[k];
                if (!inside(nx, ny, w, h)) continue;
                std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                if (!mask.data[j]) continue;
                if (field[j] > v) is_max = false;
                else if (field[j] == v && !visited[j]) { visited[j] = 1; q.push(j); }
            }
        }
        if (is_max) {
            ++n_labels;
            for (std::size_t i : plateau) label[i] = n_labels;
        }
    }
    return label;
}

}  // namespace

PorePartition watershed_partition(const BinaryMask& mask, const DistanceField& dist,
                                  double h_merge) {
    const int w = mask.width, h = mask.height;
    std::vector<float> marker(dist.data.size(), 0.0f);
    for (std::size_t i = 0; i < dist.data.size(); ++i)
        if (mask.data[i]) marker[i] = std::max(0.0f, dist.data[i] - static_cast<float>(h_merge));
    std::vector<float> recon = reconstruct_dilation(marker, dist.data, mask);

    PorePartition part;
    part.width = w;
    part.height = h;
    part.labels = regional_maxima_labels(recon, mask, part.n_basins);

    // Priority flood: grow basins downhill in distance order.
    using Node = std::pair<float, std::size_t>;
    std::priority_queue<Node> pq;
    for (std::size_t i = 0; i < part.labels.size(); ++i)
        if (part.labels[i] > 0) pq.emplace(dist.data[i], i);
    while (!pq.empty()) {
        auto [d, i] = pq.top();
        pq.pop();
        int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        for (int k = 0; k < 8; ++k) {
            int nx = x + kDx[k], ny = y + kDy[k];
            if (!inside(nx, ny, w, h)) continue;
            std::size_t j = static_cast<std::size_t>(ny) * w + nx;
            if (!mask.data[j] || part.labels[j] != 0) continue;
            part.labels[j] = part.labels[i];
            pq.emplace(dist.data[j], j);
        }
    }
    return part;
}

std::vector<Throat> extract_throats(const PorePartition& part, const DistanceField& dist) {
    const int w = part.width, h = part.height;
    std::map<std::pair<int, int>, Throat> throats;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int a = part.label(x, y);
            if (a == 0) continue;
            for (int k = 0; k < 8; ++k) {
                int nx = x + kDx[k], ny = y + kDy[k];
                if (!inside(nx, ny, w, h)) continue;
                int b = part.label(nx, ny);
                if (b == 0 || b <= a) continue;
                auto& t = throats[{a, b}];
                t.basin_a = a;
                t.basin_b = b;
                t.radius_px = std::max(t.radius_px,
                                       static_cast<double>(std::max(dist.at(x, y), dist.at(nx, ny))));
                t.ridge_length += 1;
            }
        }
    std::vector<Throat> out;
    out.reserve(throats.size());
    for (auto& [key, t] : throats) out.push_back(t);
    return out;
}

double average_pore_radius(const BinaryMask& mask, double pixel_size) {
    if (porosity_of_mask(mask) <= 0.0)
        throw ValidationError("average_pore_radius: undefined on zero-porosity mask");
    DistanceField dist = distance_transform(mask);
    PorePartition part = watershed_partition(mask, dist);
    std::vector<double> basin_max(part.n_basins + 1, 0.0);
    for (std::size_t i = 0; i < part.labels.size(); ++i)
        if (part.labels[i] > 0)
            basin_max[part.labels[i]] = std::max(basin_max[part.labels[i]],
                                                 static_cast<double>(dist.data[i]));
    double sum = 0.0;
    for (int b = 1; b <= part.n_basins; ++b) sum += basin_max[b];
    return sum / part.n_basins * pixel_size;
}

double specific_surface_area(const BinaryMask& mask, double pixel_size) {
    if (mask.empty()) throw ValidationError("specific_surface_area: empty mask");
    const int w = mask.width, h = mask.height;
    // Two 3x3 box blurs give a smooth sub-pixel field; marching squares at
    // the 0.5 level then tracks the interface with low bias on curved shapes.
    std::vector<float> a(mask.data.begin(), mask.data.end()), b(a.size());
    auto blur = [&](const std::vector<float>& src, std::vector<float>& dst) {
#pragma omp parallel for
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                float s = 0.0f;
                int n = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (!inside(nx, ny, w, h)) continue;
                        s += src[static_cast<std::size_t>(ny) * w + nx];
                        ++n;
                    }
                dst[static_cast<std::size_t>(y) * w + x] = s / n;
            }
    };
    blur(a, b);
    blur(b, a);

    const float iso = 0.5f;
    double length = 0.0;
#pragma omp parallel for reduction(+ : length)
    for (int y = 0; y < h - 1; ++y)
        for (int x = 0; x < w - 1; ++x) {
            float v00 = a[static_cast<std::size_t>(y) * w + x];
            float v10 = a[static_cast<std::size_t>(y) * w + x + 1];
            float v01 = a[static_cast<std::size_t>(y + 1) * w + x];
            float v11 = a[static_cast<std::size_t>(y + 1) * w + x + 1];
            int c = (v00 > iso) | ((v10 > iso) << 1) | ((v01 > iso) << 2) | ((v11 > iso) << 3);
            if (c == 0 || c == 15) continue;
            auto lerp = [&](float p, float q) { return (iso - p) / (q - p); };
            // crossing points on the four cell edges (x,y offsets in cell units)
            float tx0 = lerp(v00, v10), tx1 = lerp(v01, v11);
            float ty0 = lerp(v00, v01), ty1 = lerp(v10, v11);
            auto seg = [&](float x0, float y0, float x1, float y1) {
                length += std::hypot(x1 - x0, y1 - y0);
            };
            switch (c) {
                case 1: case 14: seg(tx0, 0, 0, ty0); break;
                case 2: case 13: seg(tx0, 0, 1, ty1); break;
                case 4: case 11: seg(0, ty0, tx1, 1); break;
                case 8: case 7:  seg(1, ty1, tx1, 1); break;
                case 3: case 12: seg(0, ty0, 1, ty1); break;
                case 5: case 10: seg(tx0, 0, tx1, 1); break;
                case 6:  seg(tx0, 0, 0, ty0); seg(1, ty1, tx1, 1); break;
                case 9:  seg(tx0, 0, 1, ty1); seg(0, ty0, tx1, 1); break;
            }
        }
    const double area = static_cast<double>(w) * h * pixel_size * pixel_size;
    return length * pixel_size / area;
}

std::optional<double> geodesic_tortuosity(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    if (mask.empty()) throw ValidationError("tortuosity: empty mask");
    const float inf = std::numeric_limits<float>::infinity();

    // Multi-source Dijkstra from one face, read distances at the opposite
    // face. Both directions per axis are averaged so the metric is exactly
    // invariant under flips and 90-degree rotations.
    auto directional = [&](bool vertical, bool reverse) -> std::optional<double> {
        std::vector<float> dist(mask.data.size(), inf);
        using Node = std::pair<float, std::size_t>;
        std::priority_queue<Node, std::vector<Node>, std::greater<>> pq;
        auto seed = [&](int x, int y) {
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (mask.data[i]) { dist[i] = 0.0f; pq.emplace(0.0f, i); }
        };
        if (vertical) for (int x = 0; x < w; ++x) seed(x, reverse ? 0 : h - 1);
        else for (int y = 0; y < h; ++y) seed(reverse ? 0 : w - 1, y);
        while (!pq.empty()) {
            auto [d, i] = pq.top();
            pq.pop();
            if (d > dist[i]) continue;
            int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
            for (int k = 0; k < 8; ++k) {
                int nx = x + kDx[k], ny = y + kDy[k];
                if (!inside(nx, ny, w, h)) continue;
                std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                if (!mask.data[j]) continue;
                float nd = d + (k < 4 ? 1.0f : std::numbers::sqrt2_v<float>);
                if (nd < dist[j]) { dist[j] = nd; pq.emplace(nd, j); }
            }
        }
        const double span = vertical ? h - 1 : w - 1;
        if (span <= 0) return std::nullopt;
        double sum = 0.0;
        int count = 0;
        if (vertical) {
            int outlet_y = reverse ? h - 1 : 0;
            for (int x = 0; x < w; ++x) {
                std::size_t i = static_cast<std::size_t>(outlet_y) * w + x;
                if (mask.data[i] && std::isfinite(dist[i])) { sum += dist[i] / span; ++count; }
            }
        } else {
            int outlet_x = reverse ? w - 1 : 0;
            for (int y = 0; y < h; ++y) {
                std::size_t i = static_cast<std::size_t>(y) * w + outlet_x;
                if (mask.data[i] && std::isfinite(dist[i])) { sum += dist[i] / span; ++count; }
            }
        }
        if (count == 0) return std::nullopt;
        return sum / count;
    };
    auto axis_tortuosity = [&](bool vertical) -> std::optional<double> {
        auto fwd = directional(vertical, false);
        auto bwd = directional(vertical, true);
        if (!fwd || !bwd) return std::nullopt;
        return 0.5 * (*fwd + *bwd);
    };

    auto ty = axis_tortuosity(true);
    auto tx = axis_tortuosity(false);
    if (!ty && !tx) return std::nullopt;
    if (ty && tx) return 0.5 * (*ty + *tx);
    return ty ? ty : tx;
}

double tortuosity(const BinaryMask& mask) {
    auto t = geodesic_tortuosity(mask);
    if (!t) throw ValidationError("tortuosity: pore phase does not percolate along any axis");
    return *t;
}

double weighted_throat_radius(const BinaryMask& mask, double pixel_size) {
    if (porosity_of_mask(mask) <= 0.0)
        throw ValidationError("weighted_throat_radius: undefined on zero-porosity mask");
    DistanceField dist = distance_transform(mask);
    PorePartition part = watershed_partition(mask, dist);
    std::vector<Throat> throats = extract_throats(part, dist);
    if (throats.empty()) return average_pore_radius(mask, pixel_size);
    double num = 0.0, den = 0.0;
    for (const Throat& t : throats) {
        num += t.radius_px * t.ridge_length;
        den += t.ridge_length;
    }
    return num / den * pixel_size;
}

PoreNetworkStats analyze_mask(const BinaryMask& mask, double pixel_size) {
    PoreNetworkStats s;
    s.porosity = porosity_of_mask(mask);
    if (s.porosity > 0.0) {
        s.avg_pore_radius = average_pore_radius(mask, pixel_size);
        s.weighted_throat_radius = weighted_throat_radius(mask, pixel_size);
    }
    s.specific_surface_area = specific_surface_area(mask, pixel_size);
    auto t = geodesic_tortuosity(mask);
    s.percolating = t.has_value();
    s.tortuosity = t.value_or(0.0);
    return s;
}

}  // namespace porogen::morph
