#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "tde/errors.hpp"
#include "tde/systems.hpp"

namespace tde {

// ---------------------------------------------------------------------------
// ClopenSet: finite union of cylinders over one symbolic system, stored as a
// sorted word set on a single window [anchor, anchor+len). All Boolean and
// shift operations are exact; results are canonicalized by shrinking the
// window to the smallest one that still determines membership. Window growth
// beyond the system's window_cap is an error, never silent truncation.
// ---------------------------------------------------------------------------
class ClopenSet {
public:
    ClopenSet(System sys, long anchor, int len, std::vector<std::string> words)
        : sys_(std::move(sys)), anchor_(anchor), len_(len), words_(std::move(words)) {
        require(sys_.is_symbolic(), errc::not_symbolic, "clopen sets require a symbolic system");
        require(len_ >= 1, errc::bad_window, "clopen window length must be >= 1");
        std::sort(words_.begin(), words_.end());
        words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
        const auto& all = admissible_words(sys_, len_);
        for (const auto& w : words_) {
            require(static_cast<int>(w.size()) == len_, errc::bad_window, "word length != window length");
            require(std::binary_search(all.begin(), all.end(), w), errc::invariant_violation,
                    "clopen word not admissible: " + w);
        }
        shrink();
    }

    static ClopenSet cylinder(System sys, std::string word, long anchor) {
        int len = static_cast<int>(word.size());
        return ClopenSet(std::move(sys), anchor, len, {std::move(word)});
    }
    static ClopenSet empty_set(System sys) { return ClopenSet(std::move(sys), 0, 1, {}); }
    static ClopenSet full_set(System sys) {
        auto words = admissible_words(sys, 1);
        return ClopenSet(std::move(sys), 0, 1, words);
    }

    const System& system() const { return sys_; }
    long anchor() const { return anchor_; }
    int length() const { return len_; }
    long window_end() const { return anchor_ + len_; }  // exclusive
    const std::vector<std::string>& words() const { return words_; }

    bool is_empty() const { return words_.empty(); }
    bool is_full() const {
        if (words_.empty()) return false;
        return words_.size() == admissible_words(sys_, len_).size();
    }

    // Same set represented on the (finer) window [anchor2, anchor2+len2).
    // The result is intentionally not re-canonicalized, so its window is the
    // requested one.
    ClopenSet refined(long anchor2, int len2) const {
        require(anchor2 <= anchor_ && anchor2 + len2 >= window_end(), errc::bad_window,
                "refinement window does not contain the current window");
        require(len2 <= sys_.options().window_cap, errc::resource_limit,
                "window cap exceeded in refine: " + std::to_string(len2) + " > " +
                    std::to_string(sys_.options().window_cap));
        if (anchor2 == anchor_ && len2 == len_) return *this;
        std::vector<std::string> out;
        if (!words_.empty()) {
            const auto& all = admissible_words(sys_, len2);
            const std::size_t off = static_cast<std::size_t>(anchor_ - anchor2);
            for (const auto& w : all)
                if (std::binary_search(words_.begin(), words_.end(),
                                       w.substr(off, static_cast<std::size_t>(len_))))
                    out.push_back(w);
        }
        return ClopenSet(raw_t{}, sys_, anchor2, len2, std::move(out));
    }

    ClopenSet shifted(long k) const {  // S^k A: words re-anchored at anchor - k
        ClopenSet r = *this;
        r.anchor_ -= k;
        return r;
    }

    ClopenSet complement() const {
        const auto& all = admissible_words(sys_, len_);
        std::vector<std::string> out;
        std::set_difference(all.begin(), all.end(), words_.begin(), words_.end(), std::back_inserter(out));
        return ClopenSet(sys_, anchor_, len_, std::move(out));
    }

    bool member(const Point& p) const {
        if (words_.empty()) return false;
        auto w = p.view(anchor_, len_);  // throws InsufficientWindow if not covered
        auto it = std::lower_bound(words_.begin(), words_.end(), w,
                                   [](const std::string& a, std::string_view b) { return a < b; });
        return it != words_.end() && *it == w;
    }

    bool equals(const ClopenSet& o) const {
        check_same_system(o);
        if (words_.empty() || o.words_.empty()) return words_.empty() && o.words_.empty();
        auto [a, b] = common_refinement(o);
        return a.words_ == b.words_;
    }

    // One line per cylinder, "anchor:word", sorted. Used by golden-file tests.
    std::string dump() const {
        std::string s;
        for (const auto& w : words_) s += std::to_string(anchor_) + ":" + w + "\n";
        if (words_.empty()) s = "(empty)\n";
        return s;
    }

    friend ClopenSet set_union(const ClopenSet& x, const ClopenSet& y) {
        x.check_same_system(y);
        if (x.is_empty()) return y;
        if (y.is_empty()) return x;
        auto [a, b] = x.common_refinement(y);
        std::vector<std::string> out;
        std::set_union(a.words_.begin(), a.words_.end(), b.words_.begin(), b.words_.end(),
                       std::back_inserter(out));
        return ClopenSet(a.sys_, a.anchor_, a.len_, std::move(out));
    }
    friend ClopenSet set_intersection(const ClopenSet& x, const ClopenSet& y) {
        x.check_same_system(y);
        if (x.is_empty() || y.is_empty()) return ClopenSet::empty_set(x.sys_);
        auto [a, b] = x.common_refinement(y);
        std::vector<std::string> out;
        std::set_intersection(a.words_.begin(), a.words_.end(), b.words_.begin(), b.words_.end(),
                              std::back_inserter(out));
        return ClopenSet(a.sys_, a.anchor_, a.len_, std::move(out));
    }
    friend ClopenSet set_difference(const ClopenSet& x, const ClopenSet& y) {
        x.check_same_system(y);
        if (x.is_empty() || y.is_empty()) return x;
        auto [a, b] = x.common_refinement(y);
        std::vector<std::string> out;
        std::set_difference(a.words_.begin(), a.words_.end(), b.words_.begin(), b.words_.end(),
                            std::back_inserter(out));
        return ClopenSet(a.sys_, a.anchor_, a.len_, std::move(out));
    }

    // Both sets on the smallest common window; callers must handle empty sets
    // beforehand (an empty set's canonical window never widens).
    std::pair<ClopenSet, ClopenSet> common_refinement(const ClopenSet& o) const {
        check_same_system(o);
        require(!words_.empty() && !o.words_.empty(), errc::bad_window,
                "common_refinement of an empty set");
        long lo = std::min(anchor_, o.anchor_);
        long hi = std::max(window_end(), o.window_end());
        return {refined(lo, static_cast<int>(hi - lo)), o.refined(lo, static_cast<int>(hi - lo))};
    }

private:
    struct raw_t {};
    // Unvalidated, unshrunk representation (internal refinement paths only).
    ClopenSet(raw_t, System sys, long anchor, int len, std::vector<std::string> words)
        : sys_(std::move(sys)), anchor_(anchor), len_(len), words_(std::move(words)) {}

    void check_same_system(const ClopenSet& o) const {
        require(sys_ == o.sys_, errc::mixed_systems, "clopen operation across different systems");
    }

    // Drop boundary coordinates that do not affect membership: a coordinate can
    // be dropped when the words grouped by the remaining window are either all
    // present or all absent among the admissible completions.
    void shrink() {
        for (;;) {
            if (len_ == 1) return;
            if (words_.empty()) {
                anchor_ = 0;
                len_ = 1;
                return;
            }
            if (try_shrink(true)) continue;
            if (try_shrink(false)) continue;
            return;
        }
    }

    bool try_shrink(bool left) {
        const auto& all = admissible_words(sys_, len_);
        const auto& shorter = admissible_words(sys_, len_ - 1);
        const std::size_t off = left ? 1 : 0;
        std::vector<std::string> kept;
        // For each shorter word, its full-window completions must be all-in or all-out.
        for (const auto& v : shorter) {
            int in = 0, out = 0;
            for (const auto& w : all) {
                if (w.substr(off, static_cast<std::size_t>(len_ - 1)) != v) continue;
                if (std::binary_search(words_.begin(), words_.end(), w))
                    ++in;
                else
                    ++out;
            }
            if (in > 0 && out > 0) return false;
            if (in > 0) kept.push_back(v);
        }
        words_ = std::move(kept);
        len_ -= 1;
        if (left) anchor_ += 1;
        return true;
    }

    System sys_;
    long anchor_;
    int len_;
    std::vector<std::string> words_;  // sorted, unique, admissible
};

}  // namespace tde
