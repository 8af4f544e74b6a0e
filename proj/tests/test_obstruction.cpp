#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "tde/obstruction.hpp"
#include "tde/rng.hpp"

using namespace tde;

TEST_CASE("triod metric") {
    SECTION("endpoints of different arms are 2 apart") {
        REQUIRE(triod_distance(TriodPoint::make(0, 1.0), TriodPoint::make(1, 1.0)) == 2.0);
        REQUIRE(triod_distance(TriodPoint::make(1, 1.0), TriodPoint::make(2, 1.0)) == 2.0);
    }
    SECTION("same arm distances") {
        REQUIRE(triod_distance(TriodPoint::make(1, 0.2), TriodPoint::make(1, 0.7)) ==
                Catch::Approx(0.5));
    }
    SECTION("center is t away from (arm, t)") {
        auto center = TriodPoint::make(2, 0.0);  // canonicalizes to arm 0
        REQUIRE(center.arm == 0);
        REQUIRE(triod_distance(center, TriodPoint::make(2, 0.4)) == Catch::Approx(0.4));
    }
    SECTION("product is the componentwise max") {
        std::vector<TriodPoint> p{TriodPoint::make(0, 1.0), TriodPoint::make(1, 0.5)};
        std::vector<TriodPoint> q{TriodPoint::make(1, 1.0), TriodPoint::make(1, 0.0)};
        REQUIRE(triod_product_distance(p, q) == 2.0);
        REQUIRE_THROWS_AS(triod_product_distance(p, {TriodPoint::make(0, 0.1)}), Error);
    }
    SECTION("triangle inequality on mesh points, exact integer arithmetic") {
        // mesh points t = j/m: d * m is |j-j'| (same arm) or j+j' (cross),
        // so the inequality can be checked in integers
        const std::int64_t m = 60;
        Rng rng(99);
        auto dist_num = [&](int arm_a, std::int64_t ja, int arm_b, std::int64_t jb) {
            if (ja == 0) arm_a = 0;
            if (jb == 0) arm_b = 0;
            return (arm_a == arm_b) ? std::llabs(ja - jb) : ja + jb;
        };
        for (int t = 0; t < 10000; ++t) {
            int aa = static_cast<int>(rng.below(3)), ab = static_cast<int>(rng.below(3)),
                ac = static_cast<int>(rng.below(3));
            std::int64_t ja = static_cast<std::int64_t>(rng.below(m + 1)),
                         jb = static_cast<std::int64_t>(rng.below(m + 1)),
                         jc = static_cast<std::int64_t>(rng.below(m + 1));
            REQUIRE(dist_num(aa, ja, ac, jc) <= dist_num(aa, ja, ab, jb) + dist_num(ab, jb, ac, jc));
        }
    }
}

TEST_CASE("fiber collapse search") {
    SECTION("distance-to-center map: three preimages per level, max spread 2") {
        PlTriodMap m;
        m.nodes = 11;
        for (auto& v : m.values) {
            v.resize(11);
            for (int j = 0; j <= 10; ++j) v[static_cast<std::size_t>(j)] = j / 10.0;
        }
        auto w = fiber_collapse_search(m, 0.9);
        REQUIRE(w.has_value());
        REQUIRE(w->distance == Catch::Approx(2.0));
        REQUIRE(w->level >= 0.45);
        REQUIRE(std::fabs(m.eval(w->a) - m.eval(w->b)) <= 1e-6);
    }
    SECTION("constant third arm is a fiber of diameter 1") {
        PlTriodMap m;
        m.nodes = 5;
        for (int j = 0; j < 5; ++j) {
            m.values[0].push_back(0.5 + 0.1 * j);
            m.values[1].push_back(0.5 - 0.1 * j);
            m.values[2].push_back(0.5);
        }
        auto w = fiber_collapse_search(m, 0.9);
        REQUIRE(w.has_value());
        REQUIRE(w->distance >= 1.0);
        REQUIRE(w->level == Catch::Approx(0.5));
    }
    SECTION("100 random PL maps always have a witness at 0.9") {
        Rng rng(2024);
        for (int t = 0; t < 100; ++t) {
            auto m = random_pl_map(61, rng);
            auto w = fiber_collapse_search(m, 0.9);
            REQUIRE(w.has_value());
            REQUIRE(w->distance >= 0.9);
            REQUIRE(std::fabs(m.eval(w->a) - m.eval(w->b)) <= 1e-6);
            REQUIRE(std::fabs(m.eval(w->a) - w->level) <= 1e-9);
        }
    }
    SECTION("higher powers are rejected") {
        PlTriodMap m;
        m.nodes = 5;
        m.power = 2;
        for (auto& v : m.values) v.assign(5, 0.0);
        try {
            fiber_collapse_search(m, 0.5);
            FAIL("expected UnsupportedDimension");
        } catch (const Error& e) {
            REQUIRE(e.code() == errc::unsupported_dimension);
        }
    }
}

TEST_CASE("PL csv round trip") {
    Rng rng(7);
    auto m = random_pl_map(9, rng);
    auto text = pl_to_csv(m);
    auto back = parse_pl_csv(text);
    REQUIRE(back.nodes == m.nodes);
    for (int arm = 0; arm < 3; ++arm) REQUIRE(back.values[arm] == m.values[arm]);

    REQUIRE_THROWS_AS(parse_pl_csv("0,0,1.0\n1,0,2.0\n2,0,1.0\n"), Error);  // centers disagree
    REQUIRE_THROWS_AS(parse_pl_csv("junk\n"), Error);
}

TEST_CASE("counterexample certificate arithmetic") {
    SECTION("first violation at n* = 7 for the linear family") {
        CounterexampleParams params;
        params.D = 2;
        params.L = 3;
        for (long n = 1; n <= 20; ++n) {
            params.b.push_back(n);
            params.c.push_back(2 * n);  // c_n - D b_n / 2 = n
        }
        auto idx = certificate_check(params);
        REQUIRE(idx.has_value());
        REQUIRE(*idx == 7);
    }
    SECTION("boundary sequence never violates") {
        CounterexampleParams params;
        params.D = 2;
        params.L = 3;
        for (long n = 1; n <= 50; ++n) {
            params.b.push_back(n);
            params.c.push_back(n);  // c_n = D b_n / 2
        }
        REQUIRE_FALSE(certificate_check(params).has_value());
    }
    SECTION("L = 0 with a unit excess violates immediately") {
        CounterexampleParams params;
        params.D = 2;
        params.L = 0;
        params.b = {4};
        params.c = {5};  // c_1 = D b_1 / 2 + 1
        auto idx = certificate_check(params);
        REQUIRE(idx.has_value());
        REQUIRE(*idx == 1);
    }
    SECTION("monotone in L: larger L never gives a smaller first index") {
        Rng rng(55);
        for (int trial = 0; trial < 50; ++trial) {
            CounterexampleParams params;
            params.D = 1 + static_cast<long>(rng.below(3));
            params.b.clear();
            params.c.clear();
            for (long n = 1; n <= 30; ++n) {
                params.b.push_back(n);
                params.c.push_back(1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * n))));
            }
            std::size_t prev = 1000;
            for (long L = 0; L <= 8; ++L) {
                params.L = L;
                auto idx = certificate_check(params);
                std::size_t cur = idx ? *idx : 999;
                if (L > 0) REQUIRE(cur >= prev);
                prev = cur;
            }
        }
    }
}
