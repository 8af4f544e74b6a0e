#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tde/clopen.hpp"
#include "tde/errors.hpp"
#include "tde/systems.hpp"

namespace tde {

// ---------------------------------------------------------------------------
// Metrics.
//
// Base metrics (the choice left open by the theory; fixed once here):
//   symbolic   d(x,y) = 2^{-min{|i| : x_i != y_i}}
//   circle     d(x,y) = min(|x-y|, 1-|x-y|)
//   product    max of the component metrics
// plus the horizon metric d_a^b(x,y) = max_{a<=i<=b} d(T^i x, T^i y).
//
// A symbolic comparison that exhausts the common window without finding a
// difference yields a certified upper bound with exact=false.
// ---------------------------------------------------------------------------

struct Dist {
    double value = 0;   // exact value, or an upper bound when !exact
    bool exact = true;
};

inline Dist dist_max(Dist a, Dist b) {
    if (a.exact && b.exact) return {std::max(a.value, b.value), true};
    if (a.exact && !b.exact) return b.value <= a.value ? Dist{a.value, true} : Dist{b.value, false};
    if (!a.exact && b.exact) return a.value <= b.value ? Dist{b.value, true} : Dist{a.value, false};
    return {std::max(a.value, b.value), false};
}

inline Dist base_distance(const System& sys, const Point& p, const Point& q) {
    switch (sys.kind()) {
        case SystemKind::rotation:
            return {circle_distance(p.angle(), q.angle()), true};
        case SystemKind::product:
            return dist_max(base_distance(sys.left(), p.left(), q.left()),
                            base_distance(sys.right(), p.right(), q.right()));
        default: {
            long clo = std::max(p.lo(), q.lo());
            long chi = std::min(p.hi(), q.hi());
            require(clo <= 0 && chi >= 0, errc::insufficient_window,
                    "symbolic distance: windows do not share coordinate 0");
            long R = std::min(-clo, chi);
            for (long r = 0; r <= R; ++r) {
                if (p.at(r) != q.at(r) || p.at(-r) != q.at(-r))
                    return {std::ldexp(1.0, static_cast<int>(-r)), true};
            }
            return {std::ldexp(1.0, static_cast<int>(-(R + 1))), false};
        }
    }
}

inline Dist horizon_distance(const System& sys, const Point& p, const Point& q, long a, long b) {
    require(a <= b, errc::config_error, "horizon_distance: need a <= b");
    Dist d{0.0, true};
    for (long i = a; i <= b; ++i)
        d = dist_max(d, base_distance(sys, apply_shift(sys, p, i), apply_shift(sys, q, i)));
    return d;
}

// ---------------------------------------------------------------------------
// Covers. The catalogue is analytic: overlapping arcs on the circle (order 1),
// cylinder partitions of a subshift (order 0), and their products (order <=
// sum since one factor is a partition). Certificates are exact; partitions of
// unity are tent functions on arcs, indicators on cylinders, products on
// products.
// ---------------------------------------------------------------------------

enum class CoverShape { whole, arcs, cylinders, product };

class Cover {
public:
    CoverShape shape = CoverShape::whole;

    // arcs (also the arc part of a product): m arcs centered at i/m,
    // closed-open, half length (1-tau)/m, tent half width (1-2*tau)/m.
    int arc_count = 0;
    double arc_half_len = 0;
    double tent_half_width = 0;

    // cylinders (also the cylinder part of a product): sorted admissible words
    // on the window [cyl_anchor, cyl_anchor + cyl_len)
    long cyl_anchor = 0;
    int cyl_len = 0;
    std::vector<std::string> cyl_words;

    double mesh = 0;          // certified diameter bound in `metric_note`
    int order = 0;            // certified order
    std::string metric_note;  // which metric the mesh certificate refers to
    std::string order_note;   // how the order certificate was established

    std::size_t size() const {
        switch (shape) {
            case CoverShape::whole: return 1;
            case CoverShape::arcs: return static_cast<std::size_t>(arc_count);
            case CoverShape::cylinders: return cyl_words.size();
            case CoverShape::product: return cyl_words.size() * static_cast<std::size_t>(arc_count);
        }
        return 0;
    }

    // product region index = cyl_index * arc_count + arc_index
    std::size_t product_index(std::size_t cyl_i, std::size_t arc_i) const {
        return cyl_i * static_cast<std::size_t>(arc_count) + arc_i;
    }

    double arc_center(std::size_t i) const { return static_cast<double>(i) / arc_count; }

    static double circle_dist_d(double x, double y) {
        double d = std::fabs(x - y);
        d = d - std::floor(d);
        return std::min(d, 1.0 - d);
    }

    double tent(std::size_t arc_i, double x) const {
        double d = circle_dist_d(x, arc_center(arc_i));
        return std::max(0.0, 1.0 - d / tent_half_width);
    }

    bool arc_contains(std::size_t arc_i, double x) const {
        // closed-open arc [c - h, c + h)
        double u = x - (arc_center(arc_i) - arc_half_len);
        u -= std::floor(u);
        return u < 2 * arc_half_len;
    }

    std::optional<std::size_t> cyl_index_of(std::string_view w) const {
        auto it = std::lower_bound(cyl_words.begin(), cyl_words.end(), w);
        if (it == cyl_words.end() || *it != w) return std::nullopt;
        return static_cast<std::size_t>(it - cyl_words.begin());
    }

    // --- membership -------------------------------------------------------
    bool contains(std::size_t region, const Point& p) const {
        switch (shape) {
            case CoverShape::whole: return true;
            case CoverShape::arcs: return arc_contains(region, p.angle().to_double());
            case CoverShape::cylinders: {
                auto w = p.view(cyl_anchor, cyl_len);
                auto idx = cyl_index_of(w);
                return idx && *idx == region;
            }
            case CoverShape::product: {
                auto w = p.right().view(cyl_anchor, cyl_len);
                auto idx = cyl_index_of(w);
                if (!idx || *idx != region / static_cast<std::size_t>(arc_count)) return false;
                return arc_contains(region % static_cast<std::size_t>(arc_count),
                                    p.left().angle().to_double());
            }
        }
        return false;
    }

    // --- partition of unity -----------------------------------------------
    // Appends (region, weight) pairs with weight > 0; weights sum to 1.
    void weights(const Point& p, std::vector<std::pair<std::size_t, double>>& out) const {
        out.clear();
        switch (shape) {
            case CoverShape::whole:
                out.emplace_back(0, 1.0);
                return;
            case CoverShape::arcs: {
                arc_weights(p.angle().to_double(), 0, 1, out);
                return;
            }
            case CoverShape::cylinders: {
                auto idx = cyl_index_of(p.view(cyl_anchor, cyl_len));
                require(idx.has_value(), errc::invariant_violation,
                        "point lies in no cylinder of the partition");
                out.emplace_back(*idx, 1.0);
                return;
            }
            case CoverShape::product: {
                auto idx = cyl_index_of(p.right().view(cyl_anchor, cyl_len));
                require(idx.has_value(), errc::invariant_violation,
                        "point lies in no cylinder of the partition");
                arc_weights(p.left().angle().to_double(),
                            product_index(*idx, 0), 1, out);
                return;
            }
        }
    }

private:
    void arc_weights(double x, std::size_t base, std::size_t stride,
                     std::vector<std::pair<std::size_t, double>>& out) const {
        const int m = arc_count;
        if (m == 1) {  // degenerate whole-circle arc
            out.emplace_back(base, 1.0);
            return;
        }
        // Tents have half width < 1/m, so only the arcs adjacent to the
        // nearest center can be active (m >= 4 for genuine arc covers).
        long nearest = std::lround(x * m);
        double tsum = 0;
        double tv[3];
        std::size_t ti[3];
        int cnt = 0;
        for (long di = -1; di <= 1; ++di) {
            long i = ((nearest + di) % m + m) % m;
            double t = tent(static_cast<std::size_t>(i), x);
            if (t > 0) {
                tv[cnt] = t;
                ti[cnt] = static_cast<std::size_t>(i);
                ++cnt;
                tsum += t;
            }
        }
        require(tsum > 0, errc::invariant_violation, "tent partition sums to zero");
        for (int j = 0; j < cnt; ++j) out.emplace_back(base + ti[j] * stride, tv[j] / tsum);
    }
};

// ---------------------------------------------------------------------------
// Cover constructors
// ---------------------------------------------------------------------------

inline constexpr double kArcShrink = 0.125;  // tau: arcs shrink to (2/m)(1-tau)

inline Cover arc_cover(double epsilon) {
    require(epsilon > 0, errc::bad_epsilon, "arc_cover: epsilon must be positive");
    Cover c;
    c.metric_note = "circle metric (rotation-invariant, any horizon)";
    if (epsilon > 0.5) {  // whole circle has diameter 1/2 < epsilon
        c.shape = CoverShape::whole;
        c.mesh = 0.5;
        c.order = 0;
        c.order_note = "single region";
        return c;
    }
    int m = static_cast<int>(std::ceil(2.0 / epsilon));
    c.shape = CoverShape::arcs;
    c.arc_count = m;
    c.arc_half_len = (1.0 - kArcShrink) / m;
    c.tent_half_width = (1.0 - 2 * kArcShrink) / m;
    c.mesh = 2 * c.arc_half_len;  // < epsilon
    c.order = 1;
    c.order_note = "consecutive-only overlaps, verified analytically over all arc pairs";

    // Exact certificate over the arc list: consecutive arcs overlap, arcs two
    // apart are disjoint, arcs cover.
    for (int i = 0; i < m; ++i) {
        double ri = c.arc_center(static_cast<std::size_t>(i)) + c.arc_half_len;
        double lnext = c.arc_center(static_cast<std::size_t>(i)) + 1.0 / m - c.arc_half_len;
        double lskip = c.arc_center(static_cast<std::size_t>(i)) + 2.0 / m - c.arc_half_len;
        require(lnext < ri, errc::invariant_violation, "consecutive arcs must overlap");
        require(lskip > ri, errc::invariant_violation, "non-consecutive arcs must be disjoint");
    }
    require(c.mesh < epsilon, errc::invariant_violation, "arc mesh certificate");
    return c;
}

// Cylinder partition of the whole subshift at horizon k: words on the window
// [-L, L+k-1] with L = ceil(log2(1/epsilon)), so the d_0^{k-1} mesh is at most
// 2^{-(L+1)} < epsilon. Order 0.
inline int cylinder_window_radius(double epsilon) {
    require(epsilon > 0, errc::bad_epsilon, "cylinder cover: epsilon must be positive");
    int L = static_cast<int>(std::ceil(std::log2(1.0 / epsilon)));
    return std::max(0, L);
}

inline Cover cylinder_cover(const System& sys, double epsilon, long horizon = 1) {
    require(horizon >= 1, errc::config_error, "cylinder_cover: horizon must be >= 1");
    int L = cylinder_window_radius(epsilon);
    Cover c;
    c.shape = CoverShape::cylinders;
    c.cyl_anchor = -L;
    c.cyl_len = static_cast<int>(2 * L + horizon);
    c.cyl_words = admissible_words(sys, c.cyl_len);
    c.mesh = std::ldexp(1.0, -(L + 1));
    c.order = 0;
    c.metric_note = "symbolic d_0^" + std::to_string(horizon - 1);
    c.order_note = "partition by distinct words on a common window";
    require(c.mesh < epsilon, errc::invariant_violation, "cylinder mesh certificate");
    return c;
}

// Cylinder partition of a clopen subset (used to cover tower level sets): the
// window is widened to include both the clopen set's own window and the mesh
// window [-L, L+horizon-1].
inline Cover cylinder_partition_of(const ClopenSet& cls, double epsilon, long horizon) {
    int L = cylinder_window_radius(epsilon);
    long lo = std::min<long>(-L, cls.anchor());
    long hi = std::max<long>(L + horizon, cls.window_end());
    ClopenSet refined = cls.refined(lo, static_cast<int>(hi - lo));
    Cover c;
    c.shape = CoverShape::cylinders;
    c.cyl_anchor = refined.anchor();
    c.cyl_len = refined.length();
    c.cyl_words = refined.words();
    c.mesh = std::ldexp(1.0, -(L + 1));
    c.order = 0;
    c.metric_note = "symbolic d_0^" + std::to_string(horizon - 1) + " restricted to a clopen set";
    c.order_note = "partition by distinct words on a common window";
    require(c.mesh < epsilon, errc::invariant_violation, "cylinder mesh certificate");
    return c;
}

// Product of an arc cover (or whole) with a cylinder partition. Since the
// cylinder factor is a partition, the product multiplicity at any point is
// the arc multiplicity: order = arc order + 0.
inline Cover product_cover(const Cover& circle_part, const Cover& cylinder_part) {
    require(circle_part.shape == CoverShape::arcs || circle_part.shape == CoverShape::whole,
            errc::unsupported, "product_cover: left factor must be arcs or whole");
    require(cylinder_part.shape == CoverShape::cylinders, errc::unsupported,
            "product_cover: right factor must be a cylinder partition");
    Cover c;
    c.shape = CoverShape::product;
    if (circle_part.shape == CoverShape::whole) {
        // Degenerate arc data: one arc spanning the circle.
        c.arc_count = 1;
        c.arc_half_len = 0.5;
        c.tent_half_width = 0.5;
    } else {
        c.arc_count = circle_part.arc_count;
        c.arc_half_len = circle_part.arc_half_len;
        c.tent_half_width = circle_part.tent_half_width;
    }
    c.cyl_anchor = cylinder_part.cyl_anchor;
    c.cyl_len = cylinder_part.cyl_len;
    c.cyl_words = cylinder_part.cyl_words;
    c.mesh = std::max(circle_part.mesh, cylinder_part.mesh);
    c.order = circle_part.order + cylinder_part.order;
    c.metric_note = "sup-product of (" + circle_part.metric_note + ") and (" +
                    cylinder_part.metric_note + ")";
    c.order_note = "product with a partition factor: order adds";
    return c;
}

// Structured-text cover report: region descriptions plus the mesh and order
// certificates.
inline std::string cover_report(const Cover& c) {
    std::string s;
    s += "regions: " + std::to_string(c.size()) + "\n";
    s += "mesh_certificate: " + std::to_string(c.mesh) + " (" + c.metric_note + ")\n";
    s += "order_certificate: " + std::to_string(c.order) + " (" + c.order_note + ")\n";
    char buf[128];
    switch (c.shape) {
        case CoverShape::whole:
            s += "  region 0: whole space\n";
            break;
        case CoverShape::arcs:
            for (int i = 0; i < c.arc_count; ++i) {
                std::snprintf(buf, sizeof buf, "  region %d: arc center %.17g half_length %.17g\n", i,
                              c.arc_center(static_cast<std::size_t>(i)), c.arc_half_len);
                s += buf;
            }
            break;
        case CoverShape::cylinders:
            for (std::size_t i = 0; i < c.cyl_words.size(); ++i)
                s += "  region " + std::to_string(i) + ": cylinder " + std::to_string(c.cyl_anchor) +
                     ":" + c.cyl_words[i] + "\n";
            break;
        case CoverShape::product:
            for (std::size_t ci = 0; ci < c.cyl_words.size(); ++ci)
                for (int ai = 0; ai < c.arc_count; ++ai) {
                    std::snprintf(buf, sizeof buf,
                                  "  region %zu: arc center %.17g half_length %.17g x cylinder ",
                                  c.product_index(ci, static_cast<std::size_t>(ai)),
                                  c.arc_center(static_cast<std::size_t>(ai)), c.arc_half_len);
                    s += buf;
                    s += std::to_string(c.cyl_anchor) + ":" + c.cyl_words[ci] + "\n";
                }
            break;
    }
    return s;
}

// Order of a family restricted to a finite sample: (largest number of sets
// sharing a sampled point) - 1. Exact for the sample, a lower bound in general.
inline int cover_order_exact(const std::vector<std::vector<std::size_t>>& region_point_sets) {
    std::size_t max_point = 0;
    for (const auto& s : region_point_sets)
        for (auto p : s) max_point = std::max(max_point, p + 1);
    std::vector<int> mult(max_point, 0);
    for (const auto& s : region_point_sets)
        for (auto p : s) ++mult[p];
    int best = 0;
    for (int m : mult) best = std::max(best, m);
    return best - 1;  // empty sample: -1 (order of the empty family)
}

// ---------------------------------------------------------------------------
// widim upper bounds on the supported catalogue and the mean-dimension
// estimate widim/k. Certified upper bounds only; lower bounds are not
// computable from finite samples.
// ---------------------------------------------------------------------------

struct WidimBound {
    long horizon = 1;
    int bound = 0;
    Cover cover;
};

inline WidimBound widim_upper(const System& sys, long horizon, double epsilon) {
    require(horizon >= 1, errc::config_error, "widim_upper: horizon must be >= 1");
    WidimBound wb;
    wb.horizon = horizon;
    switch (sys.kind()) {
        case SystemKind::rotation: {
            // Rotation is an isometry, so d_0^{k-1} = d and the base-scale arcs
            // certify every horizon.
            wb.cover = arc_cover(epsilon);
            wb.bound = wb.cover.order;
            return wb;
        }
        case SystemKind::full_shift:
        case SystemKind::sft:
        case SystemKind::substitution: {
            wb.cover = cylinder_cover(sys, epsilon, horizon);
            wb.bound = 0;
            return wb;
        }
        case SystemKind::product: {
            const System* rot = nullptr;
            const System* sym = nullptr;
            if (sys.left().kind() == SystemKind::rotation && sys.right().is_symbolic()) {
                rot = &sys.left();
                sym = &sys.right();
            } else if (sys.right().kind() == SystemKind::rotation && sys.left().is_symbolic()) {
                rot = &sys.right();
                sym = &sys.left();
            }
            require(rot != nullptr, errc::unsupported,
                    "widim_upper: products must pair a rotation with a subshift");
            wb.cover = product_cover(arc_cover(epsilon), cylinder_cover(*sym, epsilon, horizon));
            wb.bound = wb.cover.order;
            return wb;
        }
    }
    fail(errc::unsupported, "widim_upper: unsupported space");
}

struct MdimRow {
    long k = 0;
    int bound = 0;
    double ratio = 0;
};

inline std::vector<MdimRow> mdim_estimate(const System& sys, double epsilon, long k_max) {
    require(k_max >= 1, errc::config_error, "mdim_estimate: k_max must be >= 1");
    std::vector<MdimRow> rows;
    for (long k = 1; k <= k_max; ++k) {
        auto wb = widim_upper(sys, k, epsilon);
        rows.push_back({k, wb.bound, static_cast<double>(wb.bound) / static_cast<double>(k)});
    }
    return rows;
}

}  // namespace tde
