#include "textilp/logic.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <numeric>
#include <sstream>

namespace textilp {

bool Atom::ground() const {
    return std::none_of(args.begin(), args.end(),
                        [](const Term& t) { return t.is_var; });
}

void Program::add(const Clause& c) {
    Clause canon = canonical(c);
    auto it = std::lower_bound(clauses.begin(), clauses.end(), canon);
    if (it != clauses.end() && *it == canon) return;
    clauses.insert(it, canon);
}

void FactBase::merge(const FactBase& other) {
    background.insert(other.background.begin(), other.background.end());
    pos.insert(other.pos.begin(), other.pos.end());
    neg.insert(other.neg.begin(), other.neg.end());
}

const PredicateSignature* BiasSpec::find(const std::string& name) const {
    if (head.name == name) return &head;
    for (const auto& s : body)
        if (s.name == name) return &s;
    return nullptr;
}

// --- rendering ---------------------------------------------------------

std::string render(const Term& t) { return t.name; }

std::string render(const Atom& a) {
    std::string out = a.pred;
    if (!a.args.empty()) {
        out += '(';
        for (size_t i = 0; i < a.args.size(); ++i) {
            if (i) out += ',';
            out += a.args[i].name;
        }
        out += ')';
    }
    return out;
}

std::string render(const Clause& c) {
    std::string out = render(c.head);
    if (!c.body.empty()) {
        out += ":- ";
        for (size_t i = 0; i < c.body.size(); ++i) {
            if (i) out += ',';
            out += render(c.body[i]);
        }
    }
    out += '.';
    return out;
}

std::string render(const Program& p) {
    std::string out;
    for (size_t i = 0; i < p.clauses.size(); ++i) {
        if (i) out += '\n';
        out += render(p.clauses[i]);
    }
    return out;
}

std::string render(const FactBase& f) {
    std::string out;
    for (const auto& a : f.background) out += render(a) + ".\n";
    for (const auto& a : f.pos) out += "pos(" + render(a) + ").\n";
    for (const auto& a : f.neg) out += "neg(" + render(a) + ").\n";
    return out;
}

static std::string render_tuple(const std::vector<std::string>& xs) {
    std::string out = "(";
    for (const auto& x : xs) out += x + ",";
    if (xs.size() > 1) out.pop_back();  // 1-tuples keep the trailing comma
    out += ")";
    return out;
}

static std::string dir_name(ArgDir d) { return d == ArgDir::In ? "in" : "out"; }

std::string render(const BiasSpec& b) {
    std::string out;
    auto emit_sig = [&](const PredicateSignature& s, const char* decl) {
        out += std::string(decl) + "(" + s.name + "," + std::to_string(s.arity) + ").\n";
        out += "type(" + s.name + "," + render_tuple(s.arg_types) + ").\n";
        std::vector<std::string> dirs;
        for (ArgDir d : s.directions) dirs.push_back(dir_name(d));
        out += "direction(" + s.name + "," + render_tuple(dirs) + ").\n";
    };
    emit_sig(b.head, "head_pred");
    for (const auto& s : b.body) emit_sig(s, "body_pred");
    out += "max_vars(" + std::to_string(b.max_vars) + ").\n";
    out += "max_body(" + std::to_string(b.max_body) + ").\n";
    out += "max_clauses(" + std::to_string(b.max_clauses) + ").\n";
    return out;
}

// --- canonical form ----------------------------------------------------

std::vector<std::string> clause_vars(const Clause& c) {
    std::vector<std::string> vars;
    auto scan = [&](const Atom& a) {
        for (const Term& t : a.args)
            if (t.is_var && std::find(vars.begin(), vars.end(), t.name) == vars.end())
                vars.push_back(t.name);
    };
    scan(c.head);
    for (const Atom& a : c.body) scan(a);
    return vars;
}

static std::string var_name_for(size_t idx) {
    if (idx < 26) return std::string(1, static_cast<char>('A' + idx));
    return "V" + std::to_string(idx);
}

// Rename variables in first-occurrence order (head first, then body in
// the given order).
static Clause rename_first_occurrence(const Clause& c) {
    std::map<std::string, std::string> m;
    auto fresh = [&](const std::string& v) -> const std::string& {
        auto it = m.find(v);
        if (it == m.end())
            it = m.emplace(v, var_name_for(m.size())).first;
        return it->second;
    };
    Clause out = c;
    auto apply = [&](Atom& a) {
        for (Term& t : a.args)
            if (t.is_var) t.name = fresh(t.name);
    };
    apply(out.head);
    for (Atom& a : out.body) apply(a);
    return out;
}

Clause canonical(const Clause& c) {
    Clause work = c;
    // Fixed outer order: predicate name, then arity. Only atoms sharing a
    // predicate can trade places, and their order interacts with variable
    // renaming, so we take the minimum rendering over in-group permutations.
    std::stable_sort(work.body.begin(), work.body.end(),
                     [](const Atom& a, const Atom& b) {
                         if (a.pred != b.pred) return a.pred < b.pred;
                         return a.args.size() < b.args.size();
                     });

    std::vector<std::pair<size_t, size_t>> groups;  // [begin, end)
    for (size_t i = 0; i < work.body.size();) {
        size_t j = i + 1;
        while (j < work.body.size() && work.body[j].pred == work.body[i].pred)
            ++j;
        if (j - i > 1) groups.emplace_back(i, j);
        i = j;
    }

    Clause best;
    std::string best_text;
    std::function<void(size_t)> permute = [&](size_t g) {
        if (g == groups.size()) {
            Clause candidate = rename_first_occurrence(work);
            std::string text = render(candidate);
            if (best_text.empty() || text < best_text) {
                best_text = std::move(text);
                best = std::move(candidate);
            }
            return;
        }
        auto [b, e] = groups[g];
        std::sort(work.body.begin() + b, work.body.begin() + e);
        do {
            permute(g + 1);
        } while (std::next_permutation(work.body.begin() + b, work.body.begin() + e));
    };
    permute(0);
    return best;
}

bool range_restricted(const Clause& c) {
    // Every head variable occurs in the body; every body atom's variable
    // component connects to the head.
    std::set<std::string> body_vars;
    for (const Atom& a : c.body)
        for (const Term& t : a.args)
            if (t.is_var) body_vars.insert(t.name);
    for (const Term& t : c.head.args)
        if (t.is_var && !body_vars.count(t.name)) return false;

    if (c.body.empty()) return true;

    // Connectivity: grow the set of reachable variables from head vars.
    std::set<std::string> reached;
    for (const Term& t : c.head.args)
        if (t.is_var) reached.insert(t.name);
    std::vector<bool> used(c.body.size(), false);
    bool progress = true;
    while (progress) {
        progress = false;
        for (size_t i = 0; i < c.body.size(); ++i) {
            if (used[i]) continue;
            bool touches = false;
            for (const Term& t : c.body[i].args)
                if (t.is_var && reached.count(t.name)) { touches = true; break; }
            if (c.body[i].args.empty()) touches = true;
            if (touches) {
                used[i] = true;
                progress = true;
                for (const Term& t : c.body[i].args)
                    if (t.is_var) reached.insert(t.name);
            }
        }
    }
    return std::all_of(used.begin(), used.end(), [](bool b) { return b; });
}

// --- evaluation --------------------------------------------------------

int FactIndex::intern_mut(const std::string& c) {
    auto it = ids_.find(c);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    ids_.emplace(c, id);
    names_.push_back(c);
    return id;
}

int FactIndex::intern(const std::string& c) const {
    auto it = ids_.find(c);
    return it == ids_.end() ? -1 : it->second;
}

FactIndex::FactIndex(const FactBase& facts) {
    for (const Atom& a : facts.background) {
        auto& pf = preds_[a.pred];
        pf.arity = static_cast<int>(a.args.size());
        int offset = static_cast<int>(pf.tuples.size());
        for (const Term& t : a.args) pf.tuples.push_back(intern_mut(t.name));
        if (!a.args.empty())
            pf.by_arg0[pf.tuples[offset]].push_back(offset);
    }
}

const FactIndex::PredFacts* FactIndex::pred(const std::string& name) const {
    auto it = preds_.find(name);
    return it == preds_.end() ? nullptr : &it->second;
}

namespace {

struct CompiledLiteral {
    const FactIndex::PredFacts* facts;  // null if predicate has no facts
    // arg >= 0: variable id; arg < 0: constant id encoded as -(id+1)
    std::vector<int> args;
};

constexpr int kUnbound = -1;

// Backtracking join. Literal order is chosen greedily at each step:
// prefer literals with the most bound arguments.
void join(const std::vector<CompiledLiteral>& body, std::vector<bool>& done,
          std::vector<int>& binding, size_t remaining,
          const std::vector<int>& head_args, std::set<std::vector<int>>& heads) {
    if (remaining == 0) {
        std::vector<int> h;
        h.reserve(head_args.size());
        for (int a : head_args) h.push_back(a >= 0 ? binding[a] : -(a + 1));
        heads.insert(std::move(h));
        return;
    }
    size_t pick = body.size();
    int best_bound = -1;
    for (size_t i = 0; i < body.size(); ++i) {
        if (done[i]) continue;
        int bound = 0;
        for (int a : body[i].args)
            if (a < 0 || binding[a] != kUnbound) ++bound;
        if (bound > best_bound) { best_bound = bound; pick = i; }
    }
    const CompiledLiteral& lit = body[pick];
    done[pick] = true;
    if (lit.facts != nullptr) {
        const auto& pf = *lit.facts;
        const int arity = pf.arity;
        auto try_tuple = [&](int offset) {
            std::vector<std::pair<int, int>> newly;
            bool ok = true;
            for (int k = 0; k < arity && ok; ++k) {
                int want = lit.args[k];
                int got = pf.tuples[offset + k];
                if (want < 0) {
                    ok = (-(want + 1) == got);
                } else if (binding[want] == kUnbound) {
                    binding[want] = got;
                    newly.emplace_back(want, got);
                } else {
                    ok = (binding[want] == got);
                }
            }
            if (ok)
                join(body, done, binding, remaining - 1, head_args, heads);
            for (auto& [v, _] : newly) binding[v] = kUnbound;
        };
        int first = lit.args.empty() ? kUnbound
                    : lit.args[0] < 0 ? -(lit.args[0] + 1)
                                      : binding[lit.args[0]];
        if (arity > 0 && first != kUnbound) {
            if (auto it = pf.by_arg0.find(first); it != pf.by_arg0.end())
                for (int offset : it->second) try_tuple(offset);
        } else {
            for (int offset = 0; offset < static_cast<int>(pf.tuples.size());
                 offset += std::max(arity, 1))
                try_tuple(offset);
        }
    }
    done[pick] = false;
}

// Early-exit variant: true as soon as one grounding of the body exists.
bool join_exists(const std::vector<CompiledLiteral>& body, std::vector<bool>& done,
                 std::vector<int>& binding, size_t remaining) {
    if (remaining == 0) return true;
    size_t pick = body.size();
    int best_bound = -1;
    for (size_t i = 0; i < body.size(); ++i) {
        if (done[i]) continue;
        int bound = 0;
        for (int a : body[i].args)
            if (a < 0 || binding[a] != kUnbound) ++bound;
        if (bound > best_bound) { best_bound = bound; pick = i; }
    }
    const CompiledLiteral& lit = body[pick];
    done[pick] = true;
    bool found = false;
    if (lit.facts != nullptr) {
        const auto& pf = *lit.facts;
        const int arity = pf.arity;
        auto try_tuple = [&](int offset) {
            std::vector<std::pair<int, int>> newly;
            bool ok = true;
            for (int k = 0; k < arity && ok; ++k) {
                int want = lit.args[k];
                int got = pf.tuples[offset + k];
                if (want < 0) {
                    ok = (-(want + 1) == got);
                } else if (binding[want] == kUnbound) {
                    binding[want] = got;
                    newly.emplace_back(want, got);
                } else {
                    ok = (binding[want] == got);
                }
            }
            if (ok && join_exists(body, done, binding, remaining - 1))
                found = true;
            for (auto& [v, _] : newly) binding[v] = kUnbound;
        };
        int first = lit.args.empty() ? kUnbound
                    : lit.args[0] < 0 ? -(lit.args[0] + 1)
                                      : binding[lit.args[0]];
        if (arity > 0 && first != kUnbound) {
            if (auto it = pf.by_arg0.find(first); it != pf.by_arg0.end())
                for (int offset : it->second) {
                    try_tuple(offset);
                    if (found) break;
                }
        } else {
            for (int offset = 0;
                 !found && offset < static_cast<int>(pf.tuples.size());
                 offset += std::max(arity, 1))
                try_tuple(offset);
        }
    }
    done[pick] = false;
    return found;
}

} // namespace

bool clause_covers(const Clause& c, const Atom& head_example, const FactIndex& index) {
    if (c.head.pred != head_example.pred ||
        c.head.args.size() != head_example.args.size())
        return false;

    std::vector<std::string> vars = clause_vars(c);
    std::map<std::string, int> var_id;
    for (size_t i = 0; i < vars.size(); ++i) var_id[vars[i]] = static_cast<int>(i);

    std::vector<int> binding(vars.size(), kUnbound);
    for (size_t i = 0; i < c.head.args.size(); ++i) {
        const Term& h = c.head.args[i];
        const std::string& want = head_example.args[i].name;
        if (!h.is_var) {
            if (h.name != want) return false;
            continue;
        }
        int id = index.intern(want);
        if (id < 0) return false;  // constant absent from the background
        int v = var_id.at(h.name);
        if (binding[v] != kUnbound && binding[v] != id) return false;
        binding[v] = id;
    }

    std::vector<CompiledLiteral> body;
    for (const Atom& a : c.body) {
        CompiledLiteral lit;
        lit.facts = index.pred(a.pred);
        if (lit.facts == nullptr) return false;
        if (lit.facts->arity != static_cast<int>(a.args.size())) return false;
        for (const Term& t : a.args) {
            if (t.is_var) {
                lit.args.push_back(var_id.at(t.name));
            } else {
                int id = index.intern(t.name);
                if (id < 0) return false;
                lit.args.push_back(-(id + 1));
            }
        }
        body.push_back(std::move(lit));
    }

    std::vector<bool> done(body.size(), false);
    return join_exists(body, done, binding, body.size());
}

std::set<Atom> clause_entails(const Clause& c, const FactIndex& index) {
    std::vector<std::string> vars = clause_vars(c);
    std::map<std::string, int> var_id;
    for (size_t i = 0; i < vars.size(); ++i) var_id[vars[i]] = static_cast<int>(i);

    auto compile_args = [&](const Atom& a, bool& has_unknown_const) {
        std::vector<int> out;
        out.reserve(a.args.size());
        for (const Term& t : a.args) {
            if (t.is_var) {
                out.push_back(var_id.at(t.name));
            } else {
                int id = index.intern(t.name);
                if (id < 0) has_unknown_const = true;
                out.push_back(-(id + 1));
            }
        }
        return out;
    };

    std::vector<CompiledLiteral> body;
    for (const Atom& a : c.body) {
        bool unknown = false;
        CompiledLiteral lit;
        lit.args = compile_args(a, unknown);
        lit.facts = index.pred(a.pred);
        if (lit.facts == nullptr || unknown) return {};  // body unsatisfiable
        if (lit.facts->arity != static_cast<int>(a.args.size())) return {};
        body.push_back(std::move(lit));
    }

    std::vector<int> head_vars;  // -1 marks a constant position
    for (const Term& t : c.head.args)
        head_vars.push_back(t.is_var ? var_id.at(t.name) : -1);

    std::set<std::vector<int>> head_tuples;
    std::vector<bool> done(body.size(), false);
    std::vector<int> binding(vars.size(), kUnbound);
    if (body.empty()) {
        head_tuples.insert(std::vector<int>(head_vars.size(), kUnbound));
    } else {
        std::vector<int> head_args;
        for (size_t i = 0; i < head_vars.size(); ++i)
            head_args.push_back(head_vars[i] >= 0 ? head_vars[i] : -1000000 - static_cast<int>(i));
        // Constants in the head pass through untouched below; the join only
        // needs variable positions, so constants are sentinel-encoded.
        join(body, done, binding, body.size(), head_args, head_tuples);
    }

    std::set<Atom> out;
    for (const auto& tuple : head_tuples) {
        Atom a;
        a.pred = c.head.pred;
        bool valid = true;
        for (size_t i = 0; i < tuple.size(); ++i) {
            if (head_vars[i] < 0) {
                a.args.push_back(c.head.args[i]);  // constant position
            } else if (tuple[i] < 0) {
                valid = false;  // unbound head variable (not range-restricted)
                break;
            } else {
                a.args.push_back(Term::constant(index.constant_name(tuple[i])));
            }
        }
        if (valid) out.insert(std::move(a));
    }
    return out;
}

std::set<Atom> clause_entails(const Clause& c, const FactBase& facts) {
    return clause_entails(c, FactIndex(facts));
}

Coverage program_covers(const Program& p, const FactBase& facts) {
    FactIndex index(facts);
    std::set<Atom> entailed;
    for (const Clause& c : p.clauses) {
        auto heads = clause_entails(c, index);
        entailed.insert(heads.begin(), heads.end());
    }
    Coverage cov;
    for (const Atom& a : facts.pos)
        if (entailed.count(a)) cov.covered_pos.insert(a);
    for (const Atom& a : facts.neg)
        if (entailed.count(a)) cov.covered_neg.insert(a);
    return cov;
}

} // namespace textilp
