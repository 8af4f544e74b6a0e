#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tde/errors.hpp"
#include "tde/rng.hpp"

namespace tde {

// ---------------------------------------------------------------------------
// The triod Y: three unit segments glued at a common center, with the graph
// metric (same arm: |t - t'|; across arms: t + t'). Products Y^n carry the
// sup metric. Any continuous real-valued map on Y has a fiber of diameter at
// least 1; the search below exhibits such fibers exactly for piecewise-linear
// maps on a mesh.
// ---------------------------------------------------------------------------

struct TriodPoint {
    int arm = 0;   // 0, 1, 2
    double t = 0;  // in [0,1]; t = 0 is the center (canonically arm 0)

    static TriodPoint make(int arm, double t) {
        require(arm >= 0 && arm <= 2, errc::config_error, "triod arm must be 0, 1 or 2");
        require(t >= 0.0 && t <= 1.0, errc::config_error, "triod parameter must lie in [0,1]");
        if (t == 0.0) arm = 0;  // canonical center
        return TriodPoint{arm, t};
    }
};

inline double triod_distance(TriodPoint p, TriodPoint q) {
    if (p.arm == q.arm) return std::fabs(p.t - q.t);
    return p.t + q.t;
}

inline double triod_product_distance(const std::vector<TriodPoint>& ps, const std::vector<TriodPoint>& qs) {
    require(ps.size() == qs.size(), errc::length_mismatch, "triod product points of different lengths");
    double d = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) d = std::max(d, triod_distance(ps[i], qs[i]));
    return d;
}

// ---------------------------------------------------------------------------
// Piecewise-linear maps Y -> R on a mesh of `nodes` points per arm (node j at
// t = j/(nodes-1); node 0 is the shared center, so the three arm values at
// node 0 must agree).
// ---------------------------------------------------------------------------

struct PlTriodMap {
    int power = 1;  // n in Y^n; only n = 1 is supported
    int nodes = 0;
    std::array<std::vector<double>, 3> values;

    double node_t(int j) const { return static_cast<double>(j) / (nodes - 1); }

    double eval(TriodPoint p) const {
        const auto& v = values[static_cast<std::size_t>(p.arm)];
        double x = p.t * (nodes - 1);
        int j = std::min(static_cast<int>(std::floor(x)), nodes - 2);
        double frac = x - j;
        return v[static_cast<std::size_t>(j)] * (1.0 - frac) + v[static_cast<std::size_t>(j + 1)] * frac;
    }

    void validate() const {
        require(power == 1, errc::unsupported_dimension,
                "only the one-dimensional triod search is supported (n = 1)");
        require(nodes >= 3, errc::config_error, "triod mesh needs at least 3 nodes per arm");
        for (const auto& v : values) {
            require(static_cast<int>(v.size()) == nodes, errc::length_mismatch,
                    "arm value count != nodes");
            for (double x : v)
                require(std::isfinite(x), errc::config_error, "PL map values must be finite");
        }
        require(values[0][0] == values[1][0] && values[1][0] == values[2][0], errc::config_error,
                "arm values at node 0 must agree (shared center)");
    }
};

inline PlTriodMap random_pl_map(int nodes, Rng& rng) {
    PlTriodMap m;
    m.nodes = nodes;
    double center = rng.uniform01();
    for (auto& v : m.values) {
        v.resize(static_cast<std::size_t>(nodes));
        v[0] = center;
        for (int j = 1; j < nodes; ++j) v[static_cast<std::size_t>(j)] = rng.uniform01();
    }
    m.validate();
    return m;
}

// CSV exchange format: one row per mesh node, "arm,node,value".
inline PlTriodMap parse_pl_csv(const std::string& text) {
    PlTriodMap m;
    std::array<std::vector<std::pair<int, double>>, 3> rows;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line[0] == '#' || line.rfind("arm", 0) == 0) continue;
        int arm, node;
        double value;
        if (std::sscanf(line.c_str(), "%d,%d,%lf", &arm, &node, &value) != 3)
            fail(errc::config_error, "PL csv line " + std::to_string(line_no) + ": expected arm,node,value");
        require(arm >= 0 && arm <= 2, errc::config_error,
                "PL csv line " + std::to_string(line_no) + ": arm out of range");
        rows[static_cast<std::size_t>(arm)].emplace_back(node, value);
    }
    require(!rows[0].empty() && rows[0].size() == rows[1].size() && rows[1].size() == rows[2].size(),
            errc::config_error, "PL csv: the three arms need equal node counts");
    m.nodes = static_cast<int>(rows[0].size());
    for (int arm = 0; arm < 3; ++arm) {
        auto& r = rows[static_cast<std::size_t>(arm)];
        std::sort(r.begin(), r.end());
        auto& v = m.values[static_cast<std::size_t>(arm)];
        v.resize(static_cast<std::size_t>(m.nodes));
        for (int j = 0; j < m.nodes; ++j) {
            require(r[static_cast<std::size_t>(j)].first == j, errc::config_error,
                    "PL csv: arm " + std::to_string(arm) + " misses node " + std::to_string(j));
            v[static_cast<std::size_t>(j)] = r[static_cast<std::size_t>(j)].second;
        }
    }
    m.validate();
    return m;
}

inline std::string pl_to_csv(const PlTriodMap& m) {
    std::string s = "arm,node,value\n";
    char buf[64];
    for (int arm = 0; arm < 3; ++arm)
        for (int j = 0; j < m.nodes; ++j) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", arm, j,
                          m.values[static_cast<std::size_t>(arm)][static_cast<std::size_t>(j)]);
            s += buf;
        }
    return s;
}

struct FiberWitness {
    TriodPoint a, b;
    double level = 0;     // common value f(a) = f(b)
    double distance = 0;  // d_Y(a, b)
};

// Exact PL level-set analysis: the fiber diameter, as a function of the
// level, is a maximum of convex piecewise-affine functions between
// consecutive node values, so its supremum is attained at a node value.
// Scanning every node value and computing the full fiber there is exact.
inline std::optional<FiberWitness> fiber_collapse_search(const PlTriodMap& map, double epsilon) {
    map.validate();
    require(epsilon > 0, errc::bad_epsilon, "fiber_collapse_search: epsilon must be positive");

    std::vector<double> levels;
    for (const auto& v : map.values) levels.insert(levels.end(), v.begin(), v.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::optional<FiberWitness> best;
    std::vector<TriodPoint> fiber;
    for (double y : levels) {
        fiber.clear();
        for (int arm = 0; arm < 3; ++arm) {
            const auto& v = map.values[static_cast<std::size_t>(arm)];
            for (int j = 0; j + 1 < map.nodes; ++j) {
                double v0 = v[static_cast<std::size_t>(j)], v1 = v[static_cast<std::size_t>(j + 1)];
                double lo = std::min(v0, v1), hi = std::max(v0, v1);
                if (y < lo || y > hi) continue;
                double t0 = map.node_t(j), t1 = map.node_t(j + 1);
                if (v0 == v1) {  // flat segment exactly at this level
                    fiber.push_back(TriodPoint::make(arm, t0));
                    fiber.push_back(TriodPoint::make(arm, t1));
                } else {
                    double t = t0 + (y - v0) / (v1 - v0) * (t1 - t0);
                    fiber.push_back(TriodPoint::make(arm, t));
                }
            }
        }
        // Diameter via per-arm extremes.
        double tmax[3] = {-1, -1, -1}, tmin[3] = {2, 2, 2};
        for (const auto& p : fiber) {
            tmax[p.arm] = std::max(tmax[p.arm], p.t);
            tmin[p.arm] = std::min(tmin[p.arm], p.t);
        }
        auto consider = [&](TriodPoint a, TriodPoint b) {
            double d = triod_distance(a, b);
            if (d >= epsilon && (!best || d > best->distance))
                best = FiberWitness{a, b, y, d};
        };
        for (int a = 0; a < 3; ++a) {
            if (tmax[a] < 0) continue;
            consider(TriodPoint::make(a, tmin[a]), TriodPoint::make(a, tmax[a]));
            for (int b = a + 1; b < 3; ++b) {
                if (tmax[b] < 0) continue;
                consider(TriodPoint::make(a, tmax[a]), TriodPoint::make(b, tmax[b]));
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Counterexample certificate arithmetic: sequences (b_n, c_n) with
// lim (c_n - D b_n / 2) = infinity contradict an embedding with window
// constant L as soon as 2 c_n > D (b_n + 2L). Returns the first violating
// index (1-based), or nullopt if the sequence never violates.
// ---------------------------------------------------------------------------

struct CounterexampleParams {
    long D = 1;
    long L = 0;
    std::vector<long> b, c;
};

inline std::optional<std::size_t> certificate_check(const CounterexampleParams& params) {
    require(params.D >= 1, errc::config_error, "D must be >= 1");
    require(params.L >= 0, errc::config_error, "L must be >= 0");
    require(params.b.size() == params.c.size(), errc::length_mismatch, "b and c differ in length");
    for (std::size_t i = 0; i < params.b.size(); ++i) {
        require(params.b[i] >= 1 && params.c[i] >= 1, errc::config_error, "b_n, c_n must be positive");
        if (2 * params.c[i] > params.D * (params.b[i] + 2 * params.L)) return i + 1;
    }
    return std::nullopt;
}

}  // namespace tde
