#include <catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "tde/clopen.hpp"
#include "tde/systems.hpp"

using namespace tde;

namespace {

System fib() { return System::substitution({{'0', "01"}, {'1', "0"}}); }

// Random clopen set over small windows, for law checking.
ClopenSet random_clopen(const System& sys, Rng& rng) {
    long anchor = static_cast<long>(rng.below(5)) - 2;
    int len = 1 + static_cast<int>(rng.below(3));
    const auto& all = admissible_words(sys, len);
    std::vector<std::string> words;
    for (const auto& w : all)
        if (rng.below(2)) words.push_back(w);
    return ClopenSet(sys, anchor, len, std::move(words));
}

}  // namespace

TEST_CASE("refine") {
    SECTION("full shift cylinder grows by all completions") {
        auto sys = System::full_shift(2);
        auto a = ClopenSet::cylinder(sys, "0", 0);
        auto r = a.refined(0, 2);
        REQUIRE(r.words() == std::vector<std::string>{"00", "01"});
    }
    SECTION("forbidden completions are dropped") {
        auto sys = System::sft(2, {"11"});
        auto a = ClopenSet::cylinder(sys, "1", 0);
        auto r = a.refined(0, 2);
        REQUIRE(r.words() == std::vector<std::string>{"10"});
    }
    SECTION("identity refinement") {
        auto sys = System::full_shift(2);
        auto a = ClopenSet(sys, 0, 2, {"01", "10"});
        auto r = a.refined(0, 2);
        REQUIRE(r.anchor() == a.anchor());
        REQUIRE(r.words() == a.words());
    }
    SECTION("bad window rejected") {
        auto sys = System::full_shift(2);
        auto a = ClopenSet::cylinder(sys, "01", 0);
        REQUIRE_THROWS_AS(a.refined(1, 2), Error);
    }
}

TEST_CASE("cylinder intersections") {
    SECTION("concatenation in the full shift") {
        auto sys = System::full_shift(2);
        auto a = ClopenSet::cylinder(sys, "0", 0);
        auto b = ClopenSet::cylinder(sys, "1", 1);
        auto c = set_intersection(a, b);
        REQUIRE(c.equals(ClopenSet::cylinder(sys, "01", 0)));
    }
    SECTION("forbidden overlap is empty") {
        auto sys = System::sft(2, {"11"});
        auto a = ClopenSet::cylinder(sys, "1", 0);
        auto b = ClopenSet::cylinder(sys, "1", 1);
        REQUIRE(set_intersection(a, b).is_empty());
    }
    SECTION("shift overlap computation") {
        auto sys = System::full_shift(2);
        auto a = ClopenSet::cylinder(sys, "0", 0);
        auto c = set_intersection(a, a.shifted(1));
        REQUIRE(c.equals(ClopenSet::cylinder(sys, "00", -1)));
    }
}

TEST_CASE("complement and shift") {
    auto sys = fib();
    auto a = ClopenSet(sys, 0, 2, {"00", "10"});
    SECTION("complement is an involution") { REQUIRE(a.complement().complement().equals(a)); }
    SECTION("shift anchors") {
        // full shift: no coordinate forcing, so the anchor moves verbatim
        auto fs = System::full_shift(2);
        auto s = ClopenSet::cylinder(fs, "01", 0).shifted(3);
        REQUIRE(s.anchor() == -3);
        // Fibonacci: [01]_0 canonicalizes to [1]_1 because x_1 = 1 forces x_0 = 0
        auto c = ClopenSet::cylinder(sys, "01", 0);
        REQUIRE(c.anchor() == 1);
        REQUIRE(c.length() == 1);
        REQUIRE(c.shifted(3).anchor() == -2);
        REQUIRE(a.shifted(2).shifted(-2).equals(a));
    }
    SECTION("complement of empty is full") {
        REQUIRE(ClopenSet::empty_set(sys).complement().is_full());
        REQUIRE(ClopenSet::full_set(sys).complement().is_empty());
    }
}

TEST_CASE("membership") {
    auto sys = fib();
    Rng rng(3);
    auto pts = sample_points(sys, 20, 10, rng);
    SECTION("full and empty") {
        for (const auto& p : pts) {
            REQUIRE(ClopenSet::full_set(sys).member(p));
            REQUIRE_FALSE(ClopenSet::empty_set(sys).member(p));
        }
    }
    SECTION("cylinder membership is coordinate equality") {
        auto c = ClopenSet::cylinder(sys, "01", 0);
        for (const auto& p : pts) {
            bool expect = p.at(0) == '0' && p.at(1) == '1';
            REQUIRE(c.member(p) == expect);
        }
    }
    SECTION("window too small") {
        auto c = ClopenSet::cylinder(sys, "01", 20);
        REQUIRE_THROWS_AS(c.member(pts[0]), Error);
    }
}

TEST_CASE("boolean algebra laws on random instances") {
    std::vector<System> systems{System::full_shift(2), System::sft(2, {"11"}), fib()};
    for (auto& sys : systems) {
        Rng rng(42);
        Rng prng(43);
        auto pts = sample_points(sys, 30, 8, prng);
        for (int trial = 0; trial < 25; ++trial) {
            auto A = random_clopen(sys, rng);
            auto B = random_clopen(sys, rng);
            auto C = random_clopen(sys, rng);

            // De Morgan
            REQUIRE(set_union(A, B).complement().equals(set_intersection(A.complement(), B.complement())));
            // difference as intersection with complement
            REQUIRE(set_difference(A, B).equals(set_intersection(A, B.complement())));
            // associativity
            REQUIRE(set_union(set_union(A, B), C).equals(set_union(A, set_union(B, C))));
            REQUIRE(set_intersection(set_intersection(A, B), C)
                        .equals(set_intersection(A, set_intersection(B, C))));
            // distributivity
            REQUIRE(set_intersection(A, set_union(B, C))
                        .equals(set_union(set_intersection(A, B), set_intersection(A, C))));

            // membership agreement on sampled points
            for (const auto& p : pts) {
                REQUIRE(set_union(A, B).member(p) == (A.member(p) || B.member(p)));
                REQUIRE(set_intersection(A, B).member(p) == (A.member(p) && B.member(p)));
                REQUIRE(A.complement().member(p) == !A.member(p));
            }
        }
    }
}

TEST_CASE("shift is a boolean algebra automorphism") {
    auto sys = fib();
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto A = random_clopen(sys, rng);
        auto B = random_clopen(sys, rng);
        long k = static_cast<long>(rng.below(7)) - 3;
        REQUIRE(set_union(A, B).shifted(k).equals(set_union(A.shifted(k), B.shifted(k))));
        REQUIRE(A.complement().shifted(k).equals(A.shifted(k).complement()));
    }
}

TEST_CASE("member is refinement invariant") {
    auto sys = fib();
    Rng rng(11);
    Rng prng(12);
    auto pts = sample_points(sys, 20, 12, prng);
    for (int trial = 0; trial < 20; ++trial) {
        auto A = random_clopen(sys, rng);
        auto R = A.refined(A.anchor() - 2, A.length() + 3);
        for (const auto& p : pts) REQUIRE(A.member(p) == R.member(p));
    }
}

TEST_CASE("window cap is enforced") {
    SystemOptions opts;
    opts.window_cap = 8;
    auto sys = System::substitution({{'0', "01"}, {'1', "0"}}, opts);
    auto a = ClopenSet::cylinder(sys, "01", 0);
    REQUIRE_THROWS_AS(a.refined(-4, 12), Error);
}

TEST_CASE("dump format") {
    auto sys = System::full_shift(2);
    auto a = ClopenSet(sys, -1, 2, {"10", "01"});
    REQUIRE(a.dump() == "-1:01\n-1:10\n");
    REQUIRE(ClopenSet::empty_set(sys).dump() == "(empty)\n");
}
