#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tde/errors.hpp"
#include "tde/geometry.hpp"
#include "tde/report.hpp"
#include "tde/rng.hpp"
#include "tde/systems.hpp"
#include "tde/towers.hpp"

namespace tde {

// ---------------------------------------------------------------------------
// MapTable: an evaluable continuous map into [0,1]^M. Evaluators:
//   HarmonicSeed   analytic seed map driven by the circle coordinate, with a
//                  certified Lipschitz bound (2*pi*amplitude per coordinate)
//   OrbitStack     x -> (f(x), f(Tx), ..., f(T^{k-1}x)) in [0,1]^{kD}
//   VertexMix      x -> sum_i phi_i(x) u_i over a cover's partition of unity
//   TowerAssembly  the tower-assembled map g(T^l x) = F_k(x)|_l
// ---------------------------------------------------------------------------

class MapTable;

struct HarmonicSeed {
    int dim = 1;
    double amplitude = 0.5;  // coordinate 0: 0.5 + a*cos(2*pi*x); 1: 0.5 + a*sin; rest 0
};

struct VertexMix {
    std::shared_ptr<const Cover> cover;
    std::vector<std::vector<double>> vertices;  // one per region, each in [0,1]^M
};

struct OrbitStack {
    std::shared_ptr<const MapTable> f;
    long k = 1;
};

struct TowerAssembly {
    std::shared_ptr<const Tower> tower;                      // on Z = right factor
    std::shared_ptr<const std::map<long, MapTable>> levels;  // k -> F_k
    int block_dim = 1;                                       // D
};

class MapTable {
public:
    System domain;
    int target_dim = 1;
    std::optional<double> lipschitz;  // sup-norm bound w.r.t. the domain metric
    std::variant<HarmonicSeed, OrbitStack, VertexMix, TowerAssembly> rule;

    std::vector<double> eval(const Point& p) const;

    double circle_coordinate(const Point& p) const {
        if (p.kind() == Point::Kind::rotation) return p.angle().to_double();
        if (p.kind() == Point::Kind::product) return p.left().angle().to_double();
        fail(errc::unsupported, "map needs a circle coordinate");
    }
};

inline MapTable make_harmonic_seed(System domain, int dim, double amplitude) {
    require(dim >= 1, errc::config_error, "seed map dimension must be >= 1");
    require(amplitude > 0 && amplitude <= 0.5, errc::config_error,
            "seed amplitude must lie in (0, 0.5]");
    MapTable f;
    f.domain = std::move(domain);
    f.target_dim = dim;
    f.lipschitz = 2.0 * std::numbers::pi * amplitude;
    f.rule = HarmonicSeed{dim, amplitude};
    return f;
}

inline MapTable stack_orbit(const MapTable& f, long k) {
    require(k >= 1, errc::config_error, "stack_orbit: k must be >= 1");
    MapTable s;
    s.domain = f.domain;
    s.target_dim = static_cast<int>(k) * f.target_dim;
    s.lipschitz = f.lipschitz;  // sup over orbit shifts preserves the modulus
    s.rule = OrbitStack{std::make_shared<const MapTable>(f), k};
    return s;
}

inline std::vector<double> MapTable::eval(const Point& p) const {
    if (const auto* h = std::get_if<HarmonicSeed>(&rule)) {
        std::vector<double> out(static_cast<std::size_t>(h->dim), 0.0);
        double x = circle_coordinate(p);
        out[0] = 0.5 + h->amplitude * std::cos(2.0 * std::numbers::pi * x);
        if (h->dim >= 2) out[1] = 0.5 + h->amplitude * std::sin(2.0 * std::numbers::pi * x);
        return out;
    }
    if (const auto* o = std::get_if<OrbitStack>(&rule)) {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(target_dim));
        for (long l = 0; l < o->k; ++l) {
            auto v = o->f->eval(apply_shift(domain, p, l));
            out.insert(out.end(), v.begin(), v.end());
        }
        return out;
    }
    if (const auto* m = std::get_if<VertexMix>(&rule)) {
        std::vector<std::pair<std::size_t, double>> w;
        m->cover->weights(p, w);
        std::vector<double> out(static_cast<std::size_t>(target_dim), 0.0);
        for (auto [i, wi] : w) {
            const auto& u = m->vertices[i];
            for (std::size_t j = 0; j < out.size(); ++j) out[j] += wi * u[j];
        }
        return out;
    }
    const auto& t = std::get<TowerAssembly>(rule);
    const Point& z = p.right();
    TowerCoord tc = tower_coords(*t.tower, z);
    Point base_fiber = apply_shift(domain, p, -tc.level);
    auto full = t.levels->at(tc.roof_value).eval(base_fiber);
    std::vector<double> out(static_cast<std::size_t>(t.block_dim));
    for (int j = 0; j < t.block_dim; ++j)
        out[static_cast<std::size_t>(j)] =
            full[static_cast<std::size_t>(tc.level) * static_cast<std::size_t>(t.block_dim) +
                 static_cast<std::size_t>(j)];
    return out;
}

// ---------------------------------------------------------------------------
// General position vertices.
//
// The uniqueness condition on small affine combinations follows from affine
// independence of every subset of min(2a+2, N) vertices (a violating pair
// (J, K) with |J|,|K| <= a+1 is an affine dependence on J ∪ K). That is what
// gets verified, exhaustively, with a numeric margin: for each subset, the
// smallest singular value of the column-normalized difference matrix must
// stay above the margin. Fails are resampled; degenerate configurations are
// measure-zero events.
// ---------------------------------------------------------------------------

inline constexpr double kGeneralPositionMargin = 1e-9;

struct GeneralPositionCertificate {
    int target_dim = 0;
    int cover_order = 0;
    std::size_t vertex_count = 0;
    int subset_size = 0;
    std::size_t subsets_checked = 0;
    double margin = 0;  // min verified lower bound on sigma_min over all subsets
    int attempts = 1;
};

namespace detail {

// Smallest eigenvalue of a symmetric 3x3 matrix (trigonometric closed form).
inline double smallest_eigen_sym3(const double g[3][3]) {
    double p1 = g[0][1] * g[0][1] + g[0][2] * g[0][2] + g[1][2] * g[1][2];
    double q = (g[0][0] + g[1][1] + g[2][2]) / 3.0;
    if (p1 == 0) return std::min({g[0][0], g[1][1], g[2][2]});
    double b00 = g[0][0] - q, b11 = g[1][1] - q, b22 = g[2][2] - q;
    double p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    double detB = (b00 * (b11 * b22 - g[1][2] * g[1][2]) - g[0][1] * (g[0][1] * b22 - g[1][2] * g[0][2]) +
                   g[0][2] * (g[0][1] * g[1][2] - b11 * g[0][2]));
    double r = detB / (2.0 * p * p * p);
    r = std::clamp(r, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    // smallest eigenvalue = q + 2p cos(phi + 2*pi/3)
    return q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
}

// Certified lower bound on sigma_min of the normalized difference matrix of
// the subset {pts[idx[0..c-1]]}; exact when cheap bounds are inconclusive.
inline double subset_affine_margin(const std::vector<std::vector<double>>& pts,
                                   const std::size_t* idx, int c, double need) {
    const int r = c - 1;  // number of difference vectors
    if (r <= 0) return 1.0;
    const auto& p0 = pts[idx[0]];
    const std::size_t M = p0.size();
    double v[7][64];
    if (r > 7 || M > 64) fail(errc::unsupported, "general position subset too large");
    for (int i = 0; i < r; ++i) {
        const auto& pi = pts[idx[i + 1]];
        double nrm2 = 0;
        for (std::size_t j = 0; j < M; ++j) {
            v[i][j] = pi[j] - p0[j];
            nrm2 += v[i][j] * v[i][j];
        }
        if (nrm2 < 1e-300) return 0.0;
        double inv = 1.0 / std::sqrt(nrm2);
        for (std::size_t j = 0; j < M; ++j) v[i][j] *= inv;
    }
    if (r == 1) return 1.0;
    double g[3][3];
    for (int i = 0; i < r; ++i)
        for (int k = i; k < r; ++k) {
            double s = 0;
            for (std::size_t j = 0; j < M; ++j) s += v[i][j] * v[k][j];
            g[i][k] = g[k][i] = s;
        }
    if (r == 2) {
        double lam = 1.0 - std::fabs(g[0][1]);
        return lam <= 0 ? 0.0 : std::sqrt(lam);
    }
    // r == 3: sigma_min^2 = lambda_3 >= det(G) / (lambda_1 lambda_2) >= det(G)/2.25
    double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[1][2]) -
                 g[0][1] * (g[0][1] * g[2][2] - g[1][2] * g[0][2]) +
                 g[0][2] * (g[0][1] * g[1][2] - g[1][1] * g[0][2]);
    if (det < 0) det = 0;
    double cheap = std::sqrt(det / 2.25);
    if (cheap >= need) return cheap;
    double lam = smallest_eigen_sym3(g);
    return lam <= 0 ? 0.0 : std::sqrt(lam);
}

template <typename Fn>
inline bool for_each_subset(std::size_t n, int c, Fn&& fn) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    if (static_cast<std::size_t>(c) > n) return true;
    for (;;) {
        if (!fn(idx.data())) return false;
        int i = c - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - static_cast<std::size_t>(c - i)) --i;
        if (i < 0) return true;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < c; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace detail

struct GeneralPositionResult {
    std::vector<std::vector<double>> vertices;
    GeneralPositionCertificate cert;
};

inline GeneralPositionResult general_position_vertices(int M, const std::vector<std::vector<double>>& anchors,
                                                       int cover_order, double radius, Rng rng,
                                                       int retry_cap = 32) {
    require(2 * cover_order < M, errc::dimension_too_small,
            "need 2a < M, got a=" + std::to_string(cover_order) + ", M=" + std::to_string(M));
    require(radius > 0, errc::config_error, "vertex radius must be positive");
    const std::size_t N = anchors.size();
    for (const auto& a : anchors) {
        require(a.size() == static_cast<std::size_t>(M), errc::config_error, "anchor dimension mismatch");
        for (double x : a)
            require(x >= 0.0 && x <= 1.0, errc::config_error, "anchors must lie in [0,1]^M");
    }
    const int c = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(2 * cover_order + 2), N));

    std::string last_fail;
    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        std::vector<std::vector<double>> u(N, std::vector<double>(static_cast<std::size_t>(M)));
        for (std::size_t i = 0; i < N; ++i)
            for (int j = 0; j < M; ++j) {
                double lo = std::max(0.0, anchors[i][static_cast<std::size_t>(j)] - radius);
                double hi = std::min(1.0, anchors[i][static_cast<std::size_t>(j)] + radius);
                u[i][static_cast<std::size_t>(j)] = rng.uniform(lo, hi);
            }

        double min_margin = 1.0;
        std::size_t checked = 0;
        bool ok = detail::for_each_subset(N, c, [&](const std::size_t* idx) {
            double m = detail::subset_affine_margin(u, idx, c, kGeneralPositionMargin);
            ++checked;
            if (m < kGeneralPositionMargin) {
                last_fail = "subset {";
                for (int t = 0; t < c; ++t)
                    last_fail += (t ? "," : "") + std::to_string(idx[static_cast<std::size_t>(t)]);
                last_fail += "} margin " + std::to_string(m);
                return false;
            }
            min_margin = std::min(min_margin, m);
            return true;
        });
        if (ok) {
            GeneralPositionResult res;
            res.vertices = std::move(u);
            res.cert = GeneralPositionCertificate{M,       cover_order, N, c, checked,
                                                  min_margin, attempt + 1};
            return res;
        }
    }
    fail(errc::retries_exhausted, "general position sampling failed after retries; last failure: " + last_fail);
}

// ---------------------------------------------------------------------------
// Perturbation embedding: from a cover of order a < M/2 with mesh < epsilon
// and a map f with the modulus certificate Lip(f)*epsilon < delta, build
// g = sum_i phi_i u_i with vertices in general position anchored at f(x_i),
// then verify sup ||f-g|| < delta and separation of sampled far pairs.
// ---------------------------------------------------------------------------

using PairDistance = std::function<Dist(const Point&, const Point&)>;

struct PerturbParams {
    double delta = 0.1;
    double epsilon = 0.1;
    long pair_count = 10000;
    double s_inflation = 1.25;
    int retry_cap = 8;
};

struct PerturbResult {
    MapTable g;
    GeneralPositionCertificate cert;
    double s_estimate = 0;     // inflated sampled sup of ||f(x) - f(x_i)|| over supports
    double vertex_radius = 0;  // delta - s_estimate
    double sup_fg = 0;         // sampled sup of ||f - g||_inf
    double min_separation = 0; // min ||g(x)-g(y)||_inf over tested far pairs
    long pairs_tested = 0;
    long pairs_skipped = 0;  // distance not certified >= epsilon
    long collisions = 0;
};

inline PerturbResult perturb_to_embedding(const MapTable& f, const Cover& cover,
                                          const std::vector<Point>& region_reps,
                                          const std::vector<Point>& sample, const PairDistance& dist,
                                          PerturbParams params, Rng rng) {
    const int M = f.target_dim;
    const int a = cover.order;
    require(params.epsilon > 0 && params.delta > 0, errc::config_error, "delta, epsilon must be positive");
    require(f.lipschitz.has_value(), errc::modulus_violated,
            "seed map carries no Lipschitz certificate");
    require(*f.lipschitz * params.epsilon < params.delta, errc::modulus_violated,
            "modulus gate Lip*epsilon < delta fails: " + std::to_string(*f.lipschitz) + " * " +
                std::to_string(params.epsilon) + " >= " + std::to_string(params.delta));
    require(2 * a < M, errc::order_too_large,
            "cover order too large: 2*" + std::to_string(a) + " >= " + std::to_string(M));
    require(region_reps.size() == cover.size(), errc::config_error,
            "need one representative per region");

    // Anchors f(x_i).
    std::vector<std::vector<double>> anchors;
    anchors.reserve(region_reps.size());
    for (const auto& rep : region_reps) anchors.push_back(f.eval(rep));

    // Sampled s = sup_{x in supp phi_i} ||f(x) - f(x_i)||, inflated.
    double s_raw = 0;
    std::vector<std::pair<std::size_t, double>> w;
    std::vector<std::vector<double>> sample_f;
    sample_f.reserve(sample.size());
    for (const auto& x : sample) {
        auto fx = f.eval(x);
        cover.weights(x, w);
        for (auto [i, wi] : w) {
            if (wi <= 0) continue;
            double d = 0;
            for (std::size_t j = 0; j < fx.size(); ++j)
                d = std::max(d, std::fabs(fx[j] - anchors[i][j]));
            s_raw = std::max(s_raw, d);
        }
        sample_f.push_back(std::move(fx));
    }
    double s = params.s_inflation * s_raw;
    require(params.delta - s > 0, errc::modulus_violated,
            "delta - s <= 0 (s estimate " + std::to_string(s) + " >= delta " +
                std::to_string(params.delta) + ")");

    for (int attempt = 0; attempt < params.retry_cap; ++attempt) {
        auto gp = general_position_vertices(M, anchors, a, params.delta - s,
                                            rng.fork("gp" + std::to_string(attempt)));
        MapTable g;
        g.domain = f.domain;
        g.target_dim = M;
        g.rule = VertexMix{std::make_shared<const Cover>(cover), gp.vertices};

        PerturbResult res;
        res.g = g;
        res.cert = gp.cert;
        res.s_estimate = s;
        res.vertex_radius = params.delta - s;
        res.min_separation = std::numeric_limits<double>::infinity();

        // sup ||f - g|| over the sample.
        for (std::size_t i = 0; i < sample.size(); ++i) {
            auto gx = g.eval(sample[i]);
            double d = 0;
            for (std::size_t j = 0; j < gx.size(); ++j)
                d = std::max(d, std::fabs(gx[j] - sample_f[i][j]));
            res.sup_fg = std::max(res.sup_fg, d);
        }

        // Separation over sampled pairs with certified distance >= epsilon;
        // keeps drawing until pair_count such pairs were tested.
        Rng pair_rng = rng.fork("pairs" + std::to_string(attempt));
        long tested = 0, skipped = 0, collisions = 0;
        for (long t = 0; tested < params.pair_count && t < params.pair_count * 200; ++t) {
            const Point& x = sample[pair_rng.below(sample.size())];
            const Point& y = sample[pair_rng.below(sample.size())];
            Dist d = dist(x, y);
            if (!d.exact || d.value < params.epsilon) {
                ++skipped;
                continue;
            }
            auto gx = g.eval(x);
            auto gy = g.eval(y);
            double sep = 0;
            for (std::size_t j = 0; j < gx.size(); ++j) sep = std::max(sep, std::fabs(gx[j] - gy[j]));
            ++tested;
            if (sep == 0.0)
                ++collisions;
            else
                res.min_separation = std::min(res.min_separation, sep);
        }
        res.pairs_tested = tested;
        res.pairs_skipped = skipped;
        res.collisions = collisions;

        if (res.sup_fg < params.delta && collisions == 0) return res;
        // A collision triggers vertex resampling; repeated failure is hard.
    }
    fail(errc::verification_failed,
         "perturbation embedding failed verification after vertex resampling");
}

// ---------------------------------------------------------------------------
// Tower-assembled embedding over X = circle x Z with pi = right projection:
// per roof class k, cover B_k = pi^{-1}(h^{-1}(k)) under d_0^{k-1}, run the
// perturbation embedding on I_f|_0^{k-1} : B_k -> [0,1]^{kD}, and assemble
// g(T^l x) = F_k(x)|_l. The widim gate (cover order < kD/2 for every roof
// value k) is checked before anything is built.
// ---------------------------------------------------------------------------

struct TowerEmbedParams {
    int D = 1;
    double delta = 0.2;
    double eta = 0.05;
    long L = 0;  // 0 = choose the smallest L passing the widim gate
    long level_samples = 600;
    long level_pairs = 4000;
    long orbit_checks = 200;  // well-definedness samples
};

struct LevelBuild {
    long k = 0;
    Cover cover;
    long region_count = 0;
    PerturbResult build;
};

struct GateRow {
    long k = 0;
    int bound = 0;
    double threshold = 0;  // k*D/2
};

struct EmbedPipeline {
    System X, Z;
    int D = 1;
    double delta = 0, eta = 0, epsilon = 0;
    long L = 0;
    std::shared_ptr<const Tower> tower;
    MapTable f, g;
    std::vector<GateRow> gate;
    std::vector<LevelBuild> levels;
    long orbit_checks_done = 0;
};

namespace detail {

inline Angle angle_from_double(double x) {
    x -= std::floor(x);
    double hi = std::floor(x * 0x1.0p64);
    double lo = std::floor((x * 0x1.0p64 - hi) * 0x1.0p64);
    return make_angle(static_cast<std::uint64_t>(hi), static_cast<std::uint64_t>(lo));
}

}  // namespace detail

inline std::vector<GateRow> widim_gate(const System& X, int D, double epsilon, long L) {
    std::vector<GateRow> rows;
    for (long k = L + 1; k <= 2 * L + 1; ++k) {
        auto wb = widim_upper(X, k, epsilon);
        rows.push_back({k, wb.bound, static_cast<double>(k) * D / 2.0});
    }
    return rows;
}

inline bool gate_passes(const std::vector<GateRow>& rows) {
    for (const auto& r : rows)
        if (!(static_cast<double>(r.bound) < r.threshold)) return false;
    return true;
}

inline EmbedPipeline tower_embed(const System& X, const MapTable& f, TowerEmbedParams params, Rng rng) {
    require(X.kind() == SystemKind::product && X.left().kind() == SystemKind::rotation &&
                X.right().is_symbolic(),
            errc::unsupported, "tower_embed expects X = rotation x subshift with pi = right projection");
    require(params.delta > 0 && params.eta > 0, errc::config_error, "delta, eta must be positive");
    require(f.target_dim == params.D, errc::config_error, "seed map dimension must equal D");
    require(f.lipschitz.has_value(), errc::modulus_violated, "seed map carries no Lipschitz certificate");

    EmbedPipeline pipe;
    pipe.X = X;
    pipe.Z = X.right();
    pipe.D = params.D;
    pipe.delta = params.delta;
    pipe.eta = params.eta;
    pipe.f = f;

    // epsilon < eta with the modulus certificate Lip * epsilon < delta.
    pipe.epsilon = std::min(0.9 * params.eta, 0.9 * params.delta / *f.lipschitz);

    if (params.L > 0) {
        pipe.L = params.L;
        pipe.gate = widim_gate(X, params.D, pipe.epsilon, pipe.L);
        for (const auto& r : pipe.gate)
            require(static_cast<double>(r.bound) < r.threshold, errc::widim_gate_failed,
                    "widim gate fails at k=" + std::to_string(r.k) + ": bound " +
                        std::to_string(r.bound) + " >= " + std::to_string(r.threshold));
    } else {
        for (long L = 1; L <= 64; ++L) {
            auto rows = widim_gate(X, params.D, pipe.epsilon, L);
            if (gate_passes(rows)) {
                pipe.L = L;
                pipe.gate = std::move(rows);
                break;
            }
        }
        require(pipe.L > 0, errc::widim_gate_failed, "no L <= 64 passes the widim gate");
    }

    auto tower = std::make_shared<const Tower>(build_tower(pipe.Z, pipe.L));
    pipe.tower = tower;

    // Per-level perturbation embeddings.
    auto levels = std::make_shared<std::map<long, MapTable>>();
    const int rep_radius_slack = 4;
    for (const auto& [k, roof_class] : tower->roof) {
        Cover cyl = cylinder_partition_of(roof_class, pipe.epsilon, k);
        Cover cover = product_cover(arc_cover(pipe.epsilon), cyl);
        require(2 * cover.order < k * params.D, errc::widim_gate_failed,
                "level cover order gate fails at k=" + std::to_string(k));

        // One representative per region: (arc center, a point carrying the word).
        int rep_radius = static_cast<int>(std::max<long>(cover.cyl_len, k) + rep_radius_slack);
        std::vector<Point> reps;
        reps.reserve(cover.size());
        for (std::size_t ci = 0; ci < cover.cyl_words.size(); ++ci) {
            Point zrep = point_containing(pipe.Z, cover.cyl_words[ci], cover.cyl_anchor, rep_radius);
            for (int ai = 0; ai < cover.arc_count; ++ai) {
                Point xrep = Point::make_product(
                    Point::make_rotation(detail::angle_from_double(cover.arc_center(static_cast<std::size_t>(ai)))),
                    zrep);
                reps.push_back(std::move(xrep));
            }
        }
        // cover.size() iterates cylinder-major: region = cyl_i * arc_count + arc_i.

        // Sample B_k by rejection from X samples.
        Rng srng = rng.fork("level_sample" + std::to_string(k));
        std::vector<Point> level_sample;
        level_sample.reserve(static_cast<std::size_t>(params.level_samples));
        int sample_radius = static_cast<int>(tower->required_radius() + k + 8);
        long guard = 0;
        while (static_cast<long>(level_sample.size()) < params.level_samples) {
            require(++guard < params.level_samples * 1000, errc::resource_limit,
                    "rejection sampling of a tower level set stalled");
            Point q = detail::sample_one(X, sample_radius, srng);
            if (roof_class.member(q.right())) level_sample.push_back(std::move(q));
        }

        MapTable fk = stack_orbit(f, k);
        PairDistance dist = [&X, k](const Point& a, const Point& b) {
            return horizon_distance(X, a, b, 0, k - 1);
        };
        PerturbParams pp;
        pp.delta = params.delta;
        pp.epsilon = pipe.epsilon;
        pp.pair_count = params.level_pairs;
        PerturbResult built =
            perturb_to_embedding(fk, cover, reps, level_sample, dist, pp, rng.fork("level" + std::to_string(k)));

        LevelBuild lb;
        lb.k = k;
        lb.cover = cover;
        lb.region_count = static_cast<long>(cover.size());
        lb.build = built;
        levels->emplace(k, lb.build.g);
        pipe.levels.push_back(std::move(lb));
    }

    MapTable g;
    g.domain = X;
    g.target_dim = params.D;
    g.rule = TowerAssembly{tower, levels, params.D};
    pipe.g = g;

    // Well-definedness: sampled points decompose uniquely as T^l x with
    // x in B_k, 0 <= l < k, consistently along their orbit.
    Rng orng = rng.fork("orbit");
    int orbit_radius = static_cast<int>(tower->required_radius() + 2 * pipe.L + 16);
    for (long t = 0; t < params.orbit_checks; ++t) {
        Point q = detail::sample_one(X, orbit_radius, orng);
        TowerCoord c = tower_coords(*tower, q.right());
        require(c.level >= 0 && c.level < c.roof_value, errc::invariant_violation,
                "tower coordinates out of range");
        Point base_fiber = apply_shift(X, q, -c.level);
        require(tower->roof.at(c.roof_value).member(base_fiber.right()), errc::invariant_violation,
                "fiber base point not in its roof class");
        TowerCoord cn = tower_coords(*tower, apply_shift(pipe.Z, q.right(), 1));
        if (c.level + 1 < c.roof_value) {
            require(cn.roof_value == c.roof_value && cn.level == c.level + 1, errc::invariant_violation,
                    "tower transition below the roof must increment the level");
        } else {
            require(cn.level == 0, errc::invariant_violation, "tower transition at the roof must reset");
        }
        ++pipe.orbit_checks_done;
    }
    return pipe;
}

// Structured-text export of the constructed embedding: per-level covers,
// vertices, certificates and verification statistics.
inline std::string embedding_table_report(const EmbedPipeline& pipe) {
    std::string s;
    s += "embedding table\n";
    s += "D: " + std::to_string(pipe.D) + "\n";
    s += "delta: " + fmt_double(pipe.delta) + "\n";
    s += "eta: " + fmt_double(pipe.eta) + "\n";
    s += "epsilon: " + fmt_double(pipe.epsilon) + "\n";
    s += "L: " + std::to_string(pipe.L) + "\n";
    for (const auto& lb : pipe.levels) {
        s += "\n[level " + std::to_string(lb.k) + "]\n";
        s += cover_report(lb.cover);
        const auto& cert = lb.build.cert;
        s += "general_position: margin " + fmt_double(cert.margin) + ", subsets " +
             std::to_string(cert.subsets_checked) + " of size " + std::to_string(cert.subset_size) +
             ", attempts " + std::to_string(cert.attempts) + "\n";
        s += "s_estimate: " + fmt_double(lb.build.s_estimate) + "\n";
        s += "vertex_radius: " + fmt_double(lb.build.vertex_radius) + "\n";
        s += "sup_fg: " + fmt_double(lb.build.sup_fg) + "\n";
        s += "pairs_tested: " + std::to_string(lb.build.pairs_tested) + "\n";
        s += "min_separation: " + fmt_double(lb.build.min_separation) + "\n";
        const auto& mix = std::get<VertexMix>(lb.build.g.rule);
        for (std::size_t i = 0; i < mix.vertices.size(); ++i) {
            s += "vertex " + std::to_string(i) + ":";
            for (double v : mix.vertices[i]) s += " " + fmt_double(v);
            s += "\n";
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// eta-embedding verification for (I_g, pi): sampled pairs at distance >= eta
// must produce different outputs (I_g windows together with pi windows).
// ---------------------------------------------------------------------------

struct EtaReport {
    long window = 0;
    double eta = 0;
    long pairs_requested = 0;
    long pairs_tested = 0;
    long pairs_skipped = 0;      // d(x,y) not certified >= eta
    long separated_by_pi = 0;    // pi windows differ
    long separated_by_g = 0;     // pi windows equal, I_g windows differ
    long collisions = 0;         // outputs identical: eta-embedding violation
    double min_separation = 0;   // min over by-g pairs of sup_n ||g(T^n x)-g(T^n y)||
};

inline EtaReport verify_eta_embedding(const EmbedPipeline& pipe, long W, double eta, long pair_count,
                                      Rng rng) {
    require(W >= 2 * pipe.L + 1, errc::insufficient_window,
            "verification window must cover the tower horizon 2L+1");
    EtaReport rep;
    rep.window = W;
    rep.eta = eta;
    rep.pairs_requested = pair_count;
    rep.min_separation = std::numeric_limits<double>::infinity();

    int radius = static_cast<int>(W + pipe.tower->required_radius() + 2 * pipe.L + 16);
    for (long t = 0; rep.pairs_tested < pair_count && t < pair_count * 200; ++t) {
        Point x = detail::sample_one(pipe.X, radius, rng);
        Point y = detail::sample_one(pipe.X, radius, rng);
        Dist d = base_distance(pipe.X, x, y);
        if (!d.exact || d.value < eta) {
            ++rep.pairs_skipped;
            continue;
        }
        ++rep.pairs_tested;
        bool pi_equal = x.right().view(-W, static_cast<int>(2 * W + 1)) ==
                        y.right().view(-W, static_cast<int>(2 * W + 1));
        if (!pi_equal) {
            ++rep.separated_by_pi;
            continue;
        }
        double sep = 0;
        for (long n = -W; n <= W; ++n) {
            auto gx = pipe.g.eval(apply_shift(pipe.X, x, n));
            auto gy = pipe.g.eval(apply_shift(pipe.X, y, n));
            for (std::size_t j = 0; j < gx.size(); ++j) sep = std::max(sep, std::fabs(gx[j] - gy[j]));
        }
        if (sep == 0.0) {
            ++rep.collisions;
        } else {
            ++rep.separated_by_g;
            rep.min_separation = std::min(rep.min_separation, sep);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Compositions into the unit interval and the cube-sequence shift.
// ---------------------------------------------------------------------------

// Topological embedding of a subshift over {1..l} into [0,1] by gap coding:
// digits 1..l in base 2l+1 along the interleaving 0, 1, -1, 2, -2, ...
// Distinct windows map at least (2l+1)^{-(2P+1)} / 2 apart.
inline double interval_code(const System& subshift, const Point& z, int precision_terms) {
    require(subshift.is_symbolic(), errc::not_symbolic, "interval_code needs a subshift point");
    require(precision_terms >= 0, errc::config_error, "precision_terms must be >= 0");
    const int P = precision_terms;
    require(z.lo() <= -P && z.hi() >= P, errc::insufficient_window,
            "interval_code needs window radius >= P");
    const double base = 2.0 * subshift.alphabet_size() + 1.0;
    double acc = 0;
    for (int n = 2 * P; n >= 0; --n) {
        long pos = (n == 0) ? 0 : ((n % 2 == 1) ? (n + 1) / 2 : -(n / 2));
        double digit = symbol_index(z.at(pos)) + 1;
        acc = (acc + digit) / base;
    }
    return acc;
}

// [0,1]^D x {1..l} -> [0,1]^D: the first coordinate is mapped affinely into
// the slab [(2j-2)/(2l-1), (2j-1)/(2l-1)]; slabs of distinct symbols are
// separated by gaps of width 1/(2l-1).
inline std::vector<double> slab_embed(const std::vector<double>& v, int j, int l) {
    require(l >= 1 && j >= 1 && j <= l, errc::config_error, "slab_embed: need 1 <= j <= l");
    require(!v.empty(), errc::config_error, "slab_embed: empty vector");
    std::vector<double> out = v;
    out[0] = (2.0 * j - 2.0 + v[0]) / (2.0 * l - 1.0);
    return out;
}

struct SlabDecoded {
    std::vector<double> v;
    int symbol = 1;
};

inline SlabDecoded slab_decode(const std::vector<double>& out, int l) {
    require(l >= 1 && !out.empty(), errc::config_error, "slab_decode: bad arguments");
    double t = out[0] * (2.0 * l - 1.0);
    int j = static_cast<int>(std::floor(t)) / 2 + 1;
    j = std::clamp(j, 1, l);
    SlabDecoded d;
    d.v = out;
    d.v[0] = t - (2.0 * j - 2.0);
    d.symbol = j;
    return d;
}

// Windowed image of a point under the composed embedding into ([0,1]^D)^Z:
// coordinate n is slab_embed(g(T^n x), pi(x)_n), |n| <= W. Exactly
// equivariant: the window of Tx is the shifted window of x, bit for bit.
inline std::vector<std::vector<double>> final_embed(const EmbedPipeline& pipe, const Point& x, long W) {
    require(W >= 2 * pipe.L + 1, errc::insufficient_window,
            "final embedding window must cover the tower horizon 2L+1");
    const int l = pipe.Z.alphabet_size();
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(2 * W + 1));
    for (long n = -W; n <= W; ++n) {
        Point xn = apply_shift(pipe.X, x, n);
        int j = symbol_index(x.right().at(n)) + 1;
        rows.push_back(slab_embed(pipe.g.eval(xn), j, l));
    }
    return rows;
}

}  // namespace tde
