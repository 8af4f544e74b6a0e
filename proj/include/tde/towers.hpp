#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tde/clopen.hpp"
#include "tde/errors.hpp"
#include "tde/systems.hpp"

namespace tde {

// ---------------------------------------------------------------------------
// Kakutani-Rokhlin tower representation of an aperiodic subshift: a clopen
// base B with B ∩ S^k B = ∅ (1 <= k <= N) and ⋃_{k=1}^{2N+1} S^k B = Z, the
// roof function h(b) = min{n >= 1 : S^n b ∈ B} with values in {N+1,...,2N+1},
// and tower coordinates (roof class, level). Certificates are exact clopen
// identities, computed and checked at build time.
// ---------------------------------------------------------------------------

// Minimal L such that every admissible word of length L has no word-period
// <= N. Cylinders on those words are pairwise S^k-disjoint markers for
// 1 <= k <= N and cover the subshift.
inline int marker_window_length(const System& sys, long N) {
    require(N >= 1, errc::config_error, "marker_window_length: N must be >= 1");
    auto cert = certify_aperiodic(sys, N);
    if (!cert.aperiodic_up_to)
        fail(errc::aperiodicity_required,
             "system has a periodic point of period " + std::to_string(cert.period) +
                 " <= " + std::to_string(N) + " (word '" + cert.periodic_word + "')");
    return cert.marker_length;
}

struct Tower {
    System sys;
    long N = 0;
    ClopenSet base;
    // roof partition: k -> h^{-1}(k), keys within {N+1,...,2N+1}
    std::map<long, ClopenSet> roof;
    // coordinate partition: l -> n^{-1}(l) = S^l B ∩ ⋂_{j<l} S^j B^c, l in {0,...,2N}
    std::map<long, ClopenSet> coords;

    // Window span over all stored partitions: [span_lo, span_hi) covers every
    // clopen set's window; points need this span (plus slack for shifts) to be
    // classified.
    long span_lo = 0, span_hi = 0;
    long required_radius() const { return std::max(std::abs(span_lo), std::abs(span_hi)) + 2 * N + 1; }
};

namespace detail {

inline void tower_check(bool cond, const std::string& what) {
    require(cond, errc::invariant_violation, "tower certificate failed: " + what);
}

}  // namespace detail

// Base construction by marker induction: V_1 = U_1,
// V_{l+1} = V_l ∪ (U_{l+1} \ ⋃_{i=-N}^{N} S^i V_l), B = V_m, with markers
// U_w = [w]_0 over the length-L* words in lexicographic order.
inline ClopenSet build_base(const System& sys, long N) {
    const int L = marker_window_length(sys, N);
    const auto& marker_words = admissible_words(sys, L);

    std::optional<ClopenSet> V;
    for (const auto& w : marker_words) {
        ClopenSet U = ClopenSet::cylinder(sys, w, 0);
        if (!V) {
            V = U;
            continue;
        }
        ClopenSet shifted_union = ClopenSet::empty_set(sys);
        for (long i = -N; i <= N; ++i) shifted_union = set_union(shifted_union, V->shifted(i));
        *V = set_union(*V, set_difference(U, shifted_union));
    }
    ClopenSet B = *V;

    for (long k = 1; k <= N; ++k)
        detail::tower_check(set_intersection(B, B.shifted(k)).is_empty(),
                            "B ∩ S^" + std::to_string(k) + " B = ∅");
    ClopenSet cover = ClopenSet::empty_set(sys);
    for (long k = 1; k <= 2 * N + 1; ++k) cover = set_union(cover, B.shifted(k));
    detail::tower_check(cover.is_full(), "⋃_{k=1}^{2N+1} S^k B covers");
    return B;
}

inline Tower build_tower(const System& sys, long N) {
    require(N >= 1, errc::config_error, "build_tower: N must be >= 1");
    ClopenSet B = build_base(sys, N);

    Tower t{sys, N, B, {}, {}};

    // h^{-1}(k) = B ∩ ⋂_{j=1}^{k-1} S^{-j}B^c ∩ S^{-k}B
    ClopenSet Bc = B.complement();
    ClopenSet roof_union = ClopenSet::empty_set(sys);
    for (long k = N + 1; k <= 2 * N + 1; ++k) {
        ClopenSet cls = B;
        for (long j = 1; j < k; ++j) cls = set_intersection(cls, Bc.shifted(-j));
        cls = set_intersection(cls, B.shifted(-k));
        if (!cls.is_empty()) {
            for (const auto& [k2, other] : t.roof)
                detail::tower_check(set_intersection(cls, other).is_empty(), "roof classes disjoint");
            roof_union = set_union(roof_union, cls);
            t.roof.emplace(k, std::move(cls));
        }
    }
    detail::tower_check(roof_union.equals(B), "roof classes partition B");
    // Roof values below N+1 or above 2N+1 are impossible by the base
    // certificates; verify the computed keys anyway.
    for (const auto& [k, cls] : t.roof)
        detail::tower_check(k >= N + 1 && k <= 2 * N + 1, "roof value within {N+1,...,2N+1}");

    // n^{-1}(l) = S^l B ∩ ⋂_{j=0}^{l-1} S^j B^c
    ClopenSet coord_union = ClopenSet::empty_set(sys);
    for (long l = 0; l <= 2 * N; ++l) {
        ClopenSet cls = B.shifted(l);
        for (long j = 0; j < l; ++j) cls = set_intersection(cls, Bc.shifted(j));
        if (!cls.is_empty()) {
            for (const auto& [l2, other] : t.coords)
                detail::tower_check(set_intersection(cls, other).is_empty(), "coord classes disjoint");
            coord_union = set_union(coord_union, cls);
            t.coords.emplace(l, std::move(cls));
        }
    }
    detail::tower_check(coord_union.is_full(), "coord classes partition Z");
    detail::tower_check(t.coords.count(0) == 1 && t.coords.at(0).equals(B), "n^{-1}(0) = B");

    long lo = B.anchor(), hi = B.window_end();
    for (const auto& [k, cls] : t.roof) {
        lo = std::min(lo, cls.anchor());
        hi = std::max(hi, cls.window_end());
    }
    for (const auto& [l, cls] : t.coords) {
        lo = std::min(lo, cls.anchor());
        hi = std::max(hi, cls.window_end());
    }
    t.span_lo = lo;
    t.span_hi = hi;
    return t;
}

// Tower coordinates of a point: l = its coordinate class, k = the roof value
// of its base point S^{-l} z. Returns (k, l) with 0 <= l < k.
struct TowerCoord {
    long roof_value = 0;  // k = h(base point)
    long level = 0;       // l, 0 <= l < k
};

inline long roof_value_of(const Tower& t, const Point& base_point) {
    for (const auto& [k, cls] : t.roof)
        if (cls.member(base_point)) return k;
    fail(errc::not_in_base, "point is not in the tower base");
}

inline TowerCoord tower_coords(const Tower& t, const Point& p) {
    std::optional<long> level;
    for (const auto& [l, cls] : t.coords)
        if (cls.member(p)) {
            level = l;
            break;
        }
    require(level.has_value(), errc::invariant_violation, "point in no coordinate class");
    Point base = apply_shift(t.sys, p, -*level);
    long k = roof_value_of(t, base);
    require(*level < k, errc::invariant_violation, "tower level must satisfy l < h(b)");
    return TowerCoord{k, *level};
}

// First-return map T_B b = S^{h(b)} b.
inline Point return_map(const Tower& t, const Point& base_point) {
    require(t.base.member(base_point), errc::not_in_base, "return_map: point not in base");
    long h = roof_value_of(t, base_point);
    Point out = apply_shift(t.sys, base_point, h);
    require(t.base.member(out), errc::invariant_violation, "return_map image must lie in base");
    return out;
}

inline std::string serialize_tower(const Tower& t) {
    std::string s;
    s += "tower N=" + std::to_string(t.N) + " system=" + t.sys.describe() + "\n";
    s += "[base]\n" + t.base.dump();
    for (const auto& [k, cls] : t.roof) s += "[roof " + std::to_string(k) + "]\n" + cls.dump();
    for (const auto& [l, cls] : t.coords) s += "[coord " + std::to_string(l) + "]\n" + cls.dump();
    return s;
}

}  // namespace tde
