#include "textilp/learner.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <functional>
#include <map>
#include <unordered_set>

namespace textilp {

int Bitset::count() const {
    int c = 0;
    for (uint64_t w : words_) c += std::popcount(w);
    return c;
}

Bitset& Bitset::operator|=(const Bitset& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
}

bool Bitset::subset_of(const Bitset& o) const {
    for (size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & ~o.words_[i]) return false;
    return true;
}

int Bitset::count_and_not(const Bitset& o) const {
    int c = 0;
    for (size_t i = 0; i < words_.size(); ++i)
        c += std::popcount(words_[i] & ~o.words_[i]);
    return c;
}

// --- candidate generation ------------------------------------------------

namespace {

std::string fresh_var_name(size_t idx) {
    if (idx < 26) return std::string(1, static_cast<char>('A' + idx));
    return "V" + std::to_string(idx);
}

// One-literal refinements of a working clause under the bias's type and
// direction declarations. "in" arguments take existing variables of the
// right type; "out" arguments take existing variables or a fresh one.
class Refiner {
public:
    explicit Refiner(const BiasSpec& bias) : bias_(bias) {}

    Clause seed() const {
        Clause c;
        c.head.pred = bias_.head.name;
        for (int i = 0; i < bias_.head.arity; ++i)
            c.head.args.push_back(Term::var(fresh_var_name(i)));
        return c;
    }

    std::vector<Clause> extend(const Clause& work) const {
        std::vector<Clause> out;
        if (static_cast<int>(work.body.size()) >= bias_.max_body) return out;

        std::vector<std::pair<std::string, std::string>> vars;  // name, type
        auto note = [&](const Term& t, const std::string& type) {
            if (!t.is_var) return;
            for (auto& [n, _] : vars)
                if (n == t.name) return;
            vars.emplace_back(t.name, type);
        };
        for (size_t i = 0; i < work.head.args.size(); ++i)
            note(work.head.args[i], bias_.head.arg_types[i]);
        for (const Atom& a : work.body) {
            const PredicateSignature* sig = bias_.find(a.pred);
            for (size_t i = 0; i < a.args.size(); ++i)
                note(a.args[i], sig->arg_types[i]);
        }

        for (const PredicateSignature& sig : bias_.body) {
            std::vector<Term> args(sig.arity);
            build(work, sig, 0, vars, static_cast<int>(vars.size()), false, args, out);
        }
        return out;
    }

private:
    void build(const Clause& work, const PredicateSignature& sig, int pos,
               const std::vector<std::pair<std::string, std::string>>& vars,
               int var_count, bool fresh_used, std::vector<Term>& args,
               std::vector<Clause>& out) const {
        if (pos == sig.arity) {
            // The literal must touch an existing variable, else it would be
            // disconnected from the head.
            bool touches = false;
            for (const Term& t : args)
                for (const auto& [n, _] : vars)
                    if (t.name == n) { touches = true; break; }
            if (!touches) return;
            Atom lit{sig.name, args};
            for (const Atom& a : work.body)
                if (a == lit) return;  // duplicate body atom
            Clause next = work;
            next.body.push_back(std::move(lit));
            out.push_back(std::move(next));
            return;
        }
        const std::string& want_type = sig.arg_types[pos];
        for (const auto& [name, type] : vars) {
            if (type != want_type) continue;
            args[pos] = Term::var(name);
            build(work, sig, pos + 1, vars, var_count, fresh_used, args, out);
        }
        if (sig.directions[pos] == ArgDir::Out && var_count < bias_.max_vars) {
            // Fresh variables beyond the existing ones; allowing several fresh
            // variables in one literal adds nothing a two-step refinement
            // cannot reach, except for multi-out predicates, so permit it.
            args[pos] = Term::var(fresh_var_name(var_count));
            build(work, sig, pos + 1, vars_with(vars, var_count, want_type),
                  var_count + 1, true, args, out);
        }
    }

    static std::vector<std::pair<std::string, std::string>> vars_with(
        std::vector<std::pair<std::string, std::string>> vars, int idx,
        const std::string& type) {
        vars.emplace_back(fresh_var_name(idx), type);
        return vars;
    }

    const BiasSpec& bias_;
};

// Level-order refinement with canonical deduplication. The callback sees
// each new clause (canonical form plus working form) and returns whether
// to refine it further. Returns false when the candidate cap was hit.
bool refine_bfs(const BiasSpec& bias, int max_emitted,
                const std::function<bool(const Clause& canon, const Clause& work,
                                         int& emitted)>& visit) {
    Refiner refiner(bias);
    std::unordered_set<std::string> seen;
    // canonical render -> working clause, sorted for deterministic order
    std::map<std::string, Clause> level;
    for (const Clause& c : refiner.extend(refiner.seed())) {
        Clause canon = canonical(c);
        std::string key = render(canon);
        if (seen.insert(key).second) level.emplace(std::move(key), c);
    }
    int emitted = 0;
    while (!level.empty()) {
        std::map<std::string, Clause> next;
        for (const auto& [key, work] : level) {
            if (emitted >= max_emitted) return false;
            Clause canon = canonical(work);
            bool refine = visit(canon, work, emitted);
            if (!refine) continue;
            for (const Clause& child : refiner.extend(work)) {
                Clause child_canon = canonical(child);
                std::string child_key = render(child_canon);
                if (seen.insert(child_key).second)
                    next.emplace(std::move(child_key), child);
            }
        }
        level = std::move(next);
    }
    return true;
}

} // namespace

std::vector<Clause> enumerate_candidates(const BiasSpec& bias,
                                         const SearchBudget& budget) {
    std::vector<Clause> out;
    refine_bfs(bias, budget.max_candidates,
               [&](const Clause& canon, const Clause&, int& emitted) {
                   if (range_restricted(canon)) {
                       out.push_back(canon);
                       ++emitted;
                   }
                   return true;
               });
    if (out.empty())
        throw LearnFailure("bias unusable: no valid single-literal clause exists");
    return out;
}

// --- scoring -------------------------------------------------------------

namespace {

struct ExampleIndex {
    std::vector<Atom> pos;  // sorted
    std::vector<Atom> neg;
    std::map<Atom, int> pos_id;
    std::map<Atom, int> neg_id;

    explicit ExampleIndex(const FactBase& facts)
        : pos(facts.pos.begin(), facts.pos.end()),
          neg(facts.neg.begin(), facts.neg.end()) {
        for (size_t i = 0; i < pos.size(); ++i) pos_id[pos[i]] = static_cast<int>(i);
        for (size_t i = 0; i < neg.size(); ++i) neg_id[neg[i]] = static_cast<int>(i);
    }
};

CoverageVector score_one(const Clause& c, const FactIndex& fi,
                         const ExampleIndex& ei) {
    CoverageVector v;
    v.clause = c;
    v.size = 1 + static_cast<int>(c.body.size());
    v.pos_bits = Bitset(static_cast<int>(ei.pos.size()));
    v.neg_bits = Bitset(static_cast<int>(ei.neg.size()));
    for (const Atom& head : clause_entails(c, fi)) {
        if (auto it = ei.pos_id.find(head); it != ei.pos_id.end())
            v.pos_bits.set(it->second);
        if (auto it = ei.neg_id.find(head); it != ei.neg_id.end())
            v.neg_bits.set(it->second);
    }
    return v;
}

} // namespace

std::vector<CoverageVector> score_candidates(const std::vector<Clause>& candidates,
                                             const FactBase& facts) {
    FactIndex fi(facts);
    ExampleIndex ei(facts);
    std::vector<CoverageVector> out;
    out.reserve(candidates.size());
    for (const Clause& c : candidates) out.push_back(score_one(c, fi, ei));
    return out;
}

MdlCost mdl_cost(const std::vector<const CoverageVector*>& selection,
                 int n_pos, int n_neg) {
    MdlCost m;
    Bitset pos(n_pos), neg(n_neg);
    for (const CoverageVector* v : selection) {
        m.size += v->size;
        pos |= v->pos_bits;
        neg |= v->neg_bits;
    }
    m.fp = neg.count();
    m.fn = n_pos - pos.count();
    m.cost = m.size + m.fp + m.fn;
    return m;
}

// --- subset search ---------------------------------------------------------

namespace {

struct Candidate {
    const CoverageVector* v;
    std::string rendered;
    int pos_count;
    int neg_count;
};

Hypothesis make_hypothesis(const std::vector<const CoverageVector*>& sel,
                           int n_pos, int n_neg, bool optimal) {
    Hypothesis h;
    for (const CoverageVector* v : sel) h.program.add(v->clause);
    MdlCost m = mdl_cost(sel, n_pos, n_neg);
    h.cost = m.cost;
    h.fp = m.fp;
    h.fn = m.fn;
    h.size = m.size;
    h.optimal = optimal;
    return h;
}

// Ties broken by smaller size, then lexicographically least rendering.
bool better(const Hypothesis& a, const Hypothesis& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.size != b.size) return a.size < b.size;
    return render(a.program) < render(b.program);
}

// Keep one representative per coverage signature (smallest size, then
// least rendering), then drop dominated candidates.
std::vector<Candidate> prepare_pool(const std::vector<CoverageVector>& vectors) {
    std::vector<Candidate> pool;
    for (const CoverageVector& v : vectors) {
        int pc = v.pos_bits.count();
        if (pc == 0) continue;  // can only add size and false positives
        pool.push_back({&v, render(v.clause), pc, v.neg_bits.count()});
    }
    std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
        if (auto c = a.v->pos_bits <=> b.v->pos_bits; c != 0) return c < 0;
        if (auto c = a.v->neg_bits <=> b.v->neg_bits; c != 0) return c < 0;
        if (a.v->size != b.v->size) return a.v->size < b.v->size;
        return a.rendered < b.rendered;
    });
    pool.erase(std::unique(pool.begin(), pool.end(),
                           [](const Candidate& a, const Candidate& b) {
                               return a.v->pos_bits == b.v->pos_bits &&
                                      a.v->neg_bits == b.v->neg_bits;
                           }),
               pool.end());

    std::vector<bool> dead(pool.size(), false);
    for (size_t i = 0; i < pool.size(); ++i) {
        if (dead[i]) continue;
        for (size_t j = 0; j < pool.size(); ++j) {
            if (i == j || dead[j]) continue;
            const auto& ci = *pool[i].v;
            const auto& cj = *pool[j].v;
            bool pos_le = cj.pos_bits.subset_of(ci.pos_bits);
            bool neg_ge = ci.neg_bits.subset_of(cj.neg_bits);
            bool size_ge = cj.size >= ci.size;
            bool strict = !(ci.pos_bits == cj.pos_bits) ||
                          !(ci.neg_bits == cj.neg_bits) || cj.size > ci.size;
            if (pos_le && neg_ge && size_ge && strict) dead[j] = true;
        }
    }
    std::vector<Candidate> alive;
    for (size_t i = 0; i < pool.size(); ++i)
        if (!dead[i]) alive.push_back(std::move(pool[i]));

    // Explore high-yield clauses first.
    std::sort(alive.begin(), alive.end(), [](const Candidate& a, const Candidate& b) {
        int ga = a.pos_count - a.v->size - a.neg_count;
        int gb = b.pos_count - b.v->size - b.neg_count;
        if (ga != gb) return ga > gb;
        if (a.v->size != b.v->size) return a.v->size < b.v->size;
        return a.rendered < b.rendered;
    });
    return alive;
}

} // namespace

Hypothesis search_exact(const std::vector<CoverageVector>& vectors,
                        int n_pos, int n_neg, const BiasSpec& bias,
                        const SearchBudget& budget) {
    std::vector<Candidate> pool = prepare_pool(vectors);
    const int n = static_cast<int>(pool.size());

    // suffix_pos[i] = union of pos coverage of pool[i..)
    std::vector<Bitset> suffix_pos(n + 1, Bitset(n_pos));
    for (int i = n - 1; i >= 0; --i)
        suffix_pos[i] = suffix_pos[i + 1] | pool[i].v->pos_bits;

    Hypothesis best = make_hypothesis({}, n_pos, n_neg, false);
    bool completed = true;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(budget.time_limit_s);
    long nodes = 0;

    std::vector<const CoverageVector*> sel;
    std::function<void(int, const Bitset&, const Bitset&, int)> dfs =
        [&](int start, const Bitset& pos_u, const Bitset& neg_u, int size) {
            if (!completed) return;
            if ((++nodes & 4095) == 0 &&
                std::chrono::steady_clock::now() > deadline) {
                completed = false;
                return;
            }
            int cur_cost = size + neg_u.count() + (n_pos - pos_u.count());
            if (cur_cost <= best.cost) {
                Hypothesis cur = make_hypothesis(sel, n_pos, n_neg, false);
                if (better(cur, best)) best = cur;
            }
            if (static_cast<int>(sel.size()) >= bias.max_clauses) return;
            for (int j = start; j < n; ++j) {
                Bitset child_pos = pos_u | pool[j].v->pos_bits;
                Bitset child_neg = neg_u | pool[j].v->neg_bits;
                int child_size = size + pool[j].v->size;
                int child_fp = child_neg.count();
                int child_fn = n_pos - child_pos.count();
                int reachable = suffix_pos[j + 1].count_and_not(child_pos);
                int lb = child_size + child_fp + std::max(0, child_fn - reachable);
                if (lb > best.cost) continue;
                sel.push_back(pool[j].v);
                dfs(j + 1, child_pos, child_neg, child_size);
                sel.pop_back();
                if (!completed) return;
            }
        };
    dfs(0, Bitset(n_pos), Bitset(n_neg), 0);

    best.optimal = completed;
    return best;
}

Hypothesis search_greedy(const std::vector<CoverageVector>& vectors,
                         int n_pos, int n_neg, const BiasSpec& bias) {
    std::vector<Candidate> pool = prepare_pool(vectors);
    std::vector<const CoverageVector*> sel;
    Bitset pos_u(n_pos), neg_u(n_neg);
    int size = 0;
    int cost = n_pos;  // empty program misses every positive
    while (static_cast<int>(sel.size()) < bias.max_clauses) {
        int best_cost = cost;
        const Candidate* pick = nullptr;
        for (const Candidate& c : pool) {
            Bitset p = pos_u | c.v->pos_bits;
            Bitset g = neg_u | c.v->neg_bits;
            int new_cost = size + c.v->size + g.count() + (n_pos - p.count());
            if (new_cost < best_cost ||
                (pick && new_cost == best_cost &&
                 (c.v->size < pick->v->size ||
                  (c.v->size == pick->v->size && c.rendered < pick->rendered)))) {
                best_cost = new_cost;
                pick = &c;
            }
        }
        if (!pick) break;
        sel.push_back(pick->v);
        pos_u |= pick->v->pos_bits;
        neg_u |= pick->v->neg_bits;
        size += pick->v->size;
        cost = best_cost;
    }
    return make_hypothesis(sel, n_pos, n_neg, false);
}

// --- end-to-end ------------------------------------------------------------

Hypothesis learn(const BiasSpec& bias, const FactBase& facts,
                 const SearchBudget& budget) {
    const int n_pos = static_cast<int>(facts.pos.size());
    const int n_neg = static_cast<int>(facts.neg.size());
    if (n_pos == 0 && n_neg == 0) {
        Hypothesis h;
        h.optimal = true;
        return h;
    }

    FactIndex fi(facts);
    ExampleIndex ei(facts);

    // Coverage-guided BFS. Each node carries its coverage; children are
    // scored only on examples the parent covers (anti-monotonicity), with
    // an early-exit per-example join.
    struct Node {
        Clause work;
        Bitset pos, neg;
    };
    auto score_within = [&](const Clause& c, const Bitset& parent_pos,
                            const Bitset& parent_neg) {
        Node node;
        node.work = c;
        node.pos = Bitset(n_pos);
        node.neg = Bitset(n_neg);
        for (int i = 0; i < n_pos; ++i)
            if (parent_pos.test(i) && clause_covers(c, ei.pos[i], fi))
                node.pos.set(i);
        for (int i = 0; i < n_neg; ++i)
            if (parent_neg.test(i) && clause_covers(c, ei.neg[i], fi))
                node.neg.set(i);
        return node;
    };
    Bitset all_pos(n_pos), all_neg(n_neg);
    for (int i = 0; i < n_pos; ++i) all_pos.set(i);
    for (int i = 0; i < n_neg; ++i) all_neg.set(i);

    Refiner refiner(bias);
    std::unordered_set<std::string> seen;
    std::map<std::string, Node> level;  // canonical render -> node
    bool any_size_one = false;
    for (const Clause& c : refiner.extend(refiner.seed())) {
        Clause canon = canonical(c);
        std::string key = render(canon);
        if (!seen.insert(key).second) continue;
        any_size_one = true;
        level.emplace(std::move(key), score_within(c, all_pos, all_neg));
    }
    if (!any_size_one)
        throw LearnFailure("bias unusable: no valid single-literal clause exists");

    std::vector<CoverageVector> pool;
    int emitted = 0;
    while (!level.empty() && emitted < budget.max_candidates) {
        std::map<std::string, Node> next;
        for (const auto& [key, node] : level) {
            if (emitted >= budget.max_candidates) break;
            int pc = node.pos.count();
            if (pc == 0) continue;  // children can only shrink coverage
            if (range_restricted(node.work)) {
                CoverageVector v;
                v.clause = canonical(node.work);
                v.pos_bits = node.pos;
                v.neg_bits = node.neg;
                v.size = 1 + static_cast<int>(node.work.body.size());
                pool.push_back(std::move(v));
                ++emitted;
            }
            if (node.neg.count() == 0 && range_restricted(node.work))
                continue;  // refining cannot lower this clause's cost
            for (const Clause& child : refiner.extend(node.work)) {
                Clause canon = canonical(child);
                std::string child_key = render(canon);
                if (!seen.insert(child_key).second) continue;
                next.emplace(std::move(child_key),
                             score_within(child, node.pos, node.neg));
            }
        }
        level = std::move(next);
    }

    if (static_cast<int>(pool.size()) <= budget.exact_threshold)
        return search_exact(pool, n_pos, n_neg, bias, budget);
    return search_greedy(pool, n_pos, n_neg, bias);
}

bool is_ilp_failure(const Hypothesis& h, int n_pos) {
    if (h.program.empty() && n_pos > 0) return true;
    if (!h.optimal && h.cost >= n_pos) return true;
    return false;
}

} // namespace textilp
