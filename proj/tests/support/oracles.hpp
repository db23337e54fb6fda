#pragma once

// Brute-force reference implementations and random generators shared by
// the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "glyphseg/raster/raster.hpp"
#include "glyphseg/util/rng.hpp"

namespace glyphseg::testing {

inline BitMask random_mask(Rng& rng, int w, int h, double density) {
    BitMask m(w, h, 0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.chance(density);
    return m;
}

inline BBox random_box(Rng& rng, int limit) {
    const int x0 = static_cast<int>(rng.uniform_int(0, limit - 1));
    const int y0 = static_cast<int>(rng.uniform_int(0, limit - 1));
    return {x0, y0, static_cast<int>(rng.uniform_int(x0 + 1, limit)), static_cast<int>(rng.uniform_int(y0 + 1, limit))};
}

/// Union-find over all pixel pairs that are adjacent under the connectivity.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void join(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

/// Root id per pixel (background gets SIZE_MAX), eight or four adjacency.
inline std::vector<std::size_t> union_find_roots(const BitMask& m, bool eight) {
    const int w = m.width(), h = m.height();
    UnionFind uf(m.size());
    for (int y1 = 0; y1 < h; ++y1) {
        for (int x1 = 0; x1 < w; ++x1) {
            if (!m.at(x1, y1)) continue;
            for (int y2 = 0; y2 < h; ++y2) {
                for (int x2 = 0; x2 < w; ++x2) {
                    if (!m.at(x2, y2)) continue;
                    const int dx = std::abs(x1 - x2), dy = std::abs(y1 - y2);
                    const bool adjacent = eight ? std::max(dx, dy) == 1 : dx + dy == 1;
                    if (adjacent) uf.join(std::size_t(y1) * w + x1, std::size_t(y2) * w + x2);
                }
            }
        }
    }
    std::vector<std::size_t> roots(m.size(), SIZE_MAX);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i]) roots[i] = uf.find(i);
    }
    return roots;
}

/// True when two labelings induce the same partition of the foreground.
inline bool same_partition(const std::vector<std::size_t>& roots, const LabelMap& labels) {
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if ((roots[i] == SIZE_MAX) != (labels[i] == 0)) return false;
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (roots[i] == SIZE_MAX || roots[j] == SIZE_MAX) continue;
            if ((roots[i] == roots[j]) != (labels[i] == labels[j])) return false;
        }
    }
    return true;
}

/// Plain BFS from every border background pixel, 4-connected.
inline BitMask bfs_border_flood(const BitMask& m) {
    const int w = m.width(), h = m.height();
    BitMask seen(w, h, 0);
    std::deque<Point> q;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if ((x == 0 || y == 0 || x == w - 1 || y == h - 1) && !m.at(x, y)) {
                seen.at(x, y) = 1;
                q.push_back({x, y});
            }
        }
    }
    while (!q.empty()) {
        const Point p = q.front();
        q.pop_front();
        const Point nb[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
        for (Point n : nb) {
            if (m.in_bounds(n.x, n.y) && !m.at(n) && !seen.at(n)) {
                seen.at(n) = 1;
                q.push_back(n);
            }
        }
    }
    return seen;
}

/// O(n^2) chessboard distance to the nearest background pixel, with the
/// outside of the raster counted as background.
inline ScoreMap brute_distance(const BitMask& m) {
    const int w = m.width(), h = m.height();
    ScoreMap d(w, h, 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!m.at(x, y)) continue;
            int best = std::min({x + 1, y + 1, w - x, h - y});
            for (int yy = 0; yy < h; ++yy) {
                for (int xx = 0; xx < w; ++xx) {
                    if (!m.at(xx, yy)) best = std::min(best, std::max(std::abs(x - xx), std::abs(y - yy)));
                }
            }
            d.at(x, y) = static_cast<float>(best);
        }
    }
    return d;
}

struct BruteTally {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline BruteTally brute_tally(const BitMask& pred, const BitMask& gt) {
    BruteTally t;
    for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
            const bool p = pred.at(x, y) != 0, g = gt.at(x, y) != 0;
            if (p && g) ++t.tp;
            else if (p) ++t.fp;
            else if (g) ++t.fn;
            else ++t.tn;
        }
    }
    return t;
}

/// Minimum over all injective row -> column maps, summing row by row.
inline double brute_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const int m = n ? static_cast<int>(cost[0].size()) : 0;
    std::vector<int> cols(m);
    std::iota(cols.begin(), cols.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    // Permuting all columns and reading the first n covers every injection.
    do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += cost[i][cols[i]];
        best = std::min(best, s);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

inline double row_sum(const std::vector<std::vector<double>>& cost, const std::vector<int>& column_of_row) {
    double s = 0.0;
    for (std::size_t i = 0; i < cost.size(); ++i) s += cost[i][column_of_row[i]];
    return s;
}

/// Integer-valued costs so sums are exact.
inline std::vector<std::vector<double>> random_costs(Rng& rng, int rows, int cols) {
    std::vector<std::vector<double>> c(rows, std::vector<double>(cols));
    for (auto& r : c) {
        for (double& v : r) v = static_cast<double>(rng.uniform_int(0, 99));
    }
    return c;
}

/// Sum of isotropic bumps; each centre is the strict maximum of its bump.
struct Bump {
    double x, y, height, sigma;
};

inline ScoreMap bump_map(int w, int h, const std::vector<Bump>& bumps) {
    ScoreMap s(w, h, 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = 0.0;
            for (const Bump& b : bumps) {
                const double dx = x - b.x, dy = y - b.y;
                v += b.height * std::exp(-(dx * dx + dy * dy) / (2 * b.sigma * b.sigma));
            }
            s.at(x, y) = v < 1e-3 ? 0.0f : static_cast<float>(v);
        }
    }
    return s;
}

}  // namespace glyphseg::testing
