#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace textilp {

// A term is either a variable (leading uppercase) or a constant
// (leading lowercase or digit). The two namespaces are disjoint.
struct Term {
    bool is_var = false;
    std::string name;

    static Term var(std::string n) { return Term{true, std::move(n)}; }
    static Term constant(std::string n) { return Term{false, std::move(n)}; }

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term& a, const Term& b) {
        if (auto c = a.is_var <=> b.is_var; c != 0) return c;
        return a.name <=> b.name;
    }
};

struct Atom {
    std::string pred;
    std::vector<Term> args;

    bool ground() const;

    friend bool operator==(const Atom&, const Atom&) = default;
    friend auto operator<=>(const Atom& a, const Atom& b) {
        if (auto c = a.pred <=> b.pred; c != 0) return c;
        return a.args <=> b.args;
    }
};

// Horn clause head :- body. Learned clauses are range-restricted:
// every head variable occurs in the body and the body's variable
// graph is connected to the head.
struct Clause {
    Atom head;
    std::vector<Atom> body;

    friend bool operator==(const Clause&, const Clause&) = default;
    friend auto operator<=>(const Clause& a, const Clause& b) {
        if (auto c = a.head <=> b.head; c != 0) return c;
        return a.body <=> b.body;
    }
};

// OR-of-ANDs rule set. Clauses are kept canonical, sorted and unique.
struct Program {
    std::vector<Clause> clauses;

    bool empty() const { return clauses.empty(); }
    void add(const Clause& c);  // canonicalizes, dedups, keeps sorted

    friend bool operator==(const Program&, const Program&) = default;
};

struct FactBase {
    std::set<Atom> background;
    std::set<Atom> pos;
    std::set<Atom> neg;

    void merge(const FactBase& other);
    friend bool operator==(const FactBase&, const FactBase&) = default;
};

enum class ArgDir { In, Out };
enum class PredRole { Head, Body };

struct PredicateSignature {
    std::string name;
    int arity = 0;
    std::vector<std::string> arg_types;
    std::vector<ArgDir> directions;
    PredRole role = PredRole::Body;
};

struct BiasSpec {
    PredicateSignature head;
    std::vector<PredicateSignature> body;
    int max_vars = 6;
    int max_body = 6;
    int max_clauses = 4;

    const PredicateSignature* find(const std::string& name) const;
};

inline constexpr int kDefaultMaxVars = 6;
inline constexpr int kDefaultMaxBody = 6;
inline constexpr int kDefaultMaxClauses = 4;

// --- rendering ---------------------------------------------------------

std::string render(const Term& t);
std::string render(const Atom& a);
std::string render(const Clause& c);   // head(A):- b1(A),b2(A,B).
std::string render(const Program& p);  // one clause per line, "" if empty
std::string render(const FactBase& f); // background, then pos/neg wrappers
std::string render(const BiasSpec& b);

// --- canonical form ----------------------------------------------------

// Body atoms sorted by (predicate, argument pattern), variables renamed
// in first-occurrence order A,B,C,... Ties among same-predicate atoms are
// resolved by the lexicographically least rendering.
Clause canonical(const Clause& c);

// Distinct variables of a clause, head first, in order of appearance.
std::vector<std::string> clause_vars(const Clause& c);

bool range_restricted(const Clause& c);

// --- evaluation --------------------------------------------------------

// Interned, predicate-indexed view of a fact base's background atoms.
// Example atoms are never usable as body facts.
class FactIndex {
public:
    explicit FactIndex(const FactBase& facts);

    int intern(const std::string& c) const;  // -1 if unseen
    const std::string& constant_name(int id) const { return names_[id]; }

    struct PredFacts {
        int arity = 0;
        std::vector<int> tuples;                           // arity-strided
        std::unordered_map<int, std::vector<int>> by_arg0; // first arg -> tuple offsets
    };
    const PredFacts* pred(const std::string& name) const;

private:
    std::unordered_map<std::string, int> ids_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, PredFacts> preds_;
    int intern_mut(const std::string& c);
};

// All ground head instances derivable from the clause over the background
// facts, by backtracking join over the body.
std::set<Atom> clause_entails(const Clause& c, const FactIndex& index);
std::set<Atom> clause_entails(const Clause& c, const FactBase& facts);

// Does the clause derive this specific ground head atom? Head variables are
// pre-bound from the example, so the body join stays local to the example's
// constants and exits on the first witness.
bool clause_covers(const Clause& c, const Atom& head_example, const FactIndex& index);

struct Coverage {
    std::set<Atom> covered_pos;
    std::set<Atom> covered_neg;
};
Coverage program_covers(const Program& p, const FactBase& facts);

} // namespace textilp
