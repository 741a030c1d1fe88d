#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "textilp/logic.hpp"

namespace textilp {

// Fixed-width bitset over example indices.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(int n) : n_(n), words_((n + 63) / 64, 0) {}

    void set(int i) { words_[i >> 6] |= (uint64_t{1} << (i & 63)); }
    bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    int size() const { return n_; }

    int count() const;
    Bitset& operator|=(const Bitset& o);
    friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
    bool subset_of(const Bitset& o) const;
    // |this & ~o|
    int count_and_not(const Bitset& o) const;

    friend bool operator==(const Bitset&, const Bitset&) = default;
    friend auto operator<=>(const Bitset& a, const Bitset& b) {
        if (auto c = a.n_ <=> b.n_; c != 0) return c;
        return a.words_ <=> b.words_;
    }

private:
    int n_ = 0;
    std::vector<uint64_t> words_;
};

struct CoverageVector {
    Clause clause;
    Bitset pos_bits;
    Bitset neg_bits;
    int size = 0;  // literal count, head included
};

struct Hypothesis {
    Program program;
    int cost = 0;
    int fp = 0;
    int fn = 0;
    int size = 0;
    bool optimal = false;
};

struct SearchBudget {
    int max_candidates = 200000;
    double time_limit_s = 60.0;
    int exact_threshold = 5000;
};

struct LearnFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All range-restricted, canonical, mode-respecting clauses under the bias,
// in increasing body-size order, truncated at max_candidates. Bodies with
// duplicate atoms are excluded.
std::vector<Clause> enumerate_candidates(const BiasSpec& bias,
                                         const SearchBudget& budget);

std::vector<CoverageVector> score_candidates(const std::vector<Clause>& candidates,
                                             const FactBase& facts);

struct MdlCost {
    int cost = 0;
    int fp = 0;
    int fn = 0;
    int size = 0;
};
MdlCost mdl_cost(const std::vector<const CoverageVector*>& selection,
                 int n_pos, int n_neg);

Hypothesis search_exact(const std::vector<CoverageVector>& vectors,
                        int n_pos, int n_neg, const BiasSpec& bias,
                        const SearchBudget& budget);

Hypothesis search_greedy(const std::vector<CoverageVector>& vectors,
                         int n_pos, int n_neg, const BiasSpec& bias);

// End-to-end: candidate generation, scoring, then exact search when the
// pool is small enough, greedy otherwise. Candidate generation is pruned
// by coverage: clauses covering no positive example are dropped (and not
// refined), and clauses that already cover no negative example are kept
// but not refined; neither pruning can remove every MDL-optimal solution.
Hypothesis learn(const BiasSpec& bias, const FactBase& facts,
                 const SearchBudget& budget = {});

// The pipeline's restart trigger.
bool is_ilp_failure(const Hypothesis& h, int n_pos);

} // namespace textilp
