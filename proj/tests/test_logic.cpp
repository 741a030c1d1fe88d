#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "textilp/logic.hpp"
#include "textilp/parser.hpp"

using namespace textilp;

namespace {

// Exhaustive substitution oracle: try every assignment of clause variables
// to constants appearing anywhere in the background.
std::set<Atom> oracle_entails(const Clause& c, const FactBase& facts) {
    std::set<std::string> const_set;
    for (const Atom& a : facts.background)
        for (const Term& t : a.args) const_set.insert(t.name);
    std::vector<std::string> consts(const_set.begin(), const_set.end());
    std::vector<std::string> vars = clause_vars(c);

    std::set<Atom> out;
    std::vector<size_t> pick(vars.size(), 0);
    auto ground = [&](const Atom& a) {
        Atom g;
        g.pred = a.pred;
        for (const Term& t : a.args) {
            if (!t.is_var) {
                g.args.push_back(t);
                continue;
            }
            for (size_t i = 0; i < vars.size(); ++i)
                if (vars[i] == t.name) g.args.push_back(Term::constant(consts[pick[i]]));
        }
        return g;
    };
    size_t total = 1;
    for (size_t i = 0; i < vars.size(); ++i) total *= consts.size();
    if (consts.empty()) return out;
    for (size_t n = 0; n < total; ++n) {
        size_t x = n;
        for (size_t i = 0; i < vars.size(); ++i) {
            pick[i] = x % consts.size();
            x /= consts.size();
        }
        bool ok = true;
        for (const Atom& b : c.body)
            if (!facts.background.count(ground(b))) { ok = false; break; }
        if (ok) {
            Atom h = ground(c.head);
            if (h.ground()) out.insert(h);
        }
    }
    return out;
}

struct RandomGen {
    std::mt19937 rng;
    explicit RandomGen(uint64_t seed) : rng(seed) {}
    int upto(int n) { return static_cast<int>(rng() % n); }

    const std::vector<std::string> unary = {"p", "q", "r"};
    const std::vector<std::string> binary = {"s", "t"};
    const std::vector<std::string> consts = {"a", "b", "c", "d", "e"};

    FactBase facts(int n) {
        FactBase fb;
        for (int i = 0; i < n; ++i) {
            Atom a;
            if (upto(2) == 0) {
                a.pred = unary[upto(3)];
                a.args = {Term::constant(consts[upto(5)])};
            } else {
                a.pred = binary[upto(2)];
                a.args = {Term::constant(consts[upto(5)]),
                          Term::constant(consts[upto(5)])};
            }
            fb.background.insert(a);
        }
        return fb;
    }

    // Range-restricted clause with head h(A) and 1..4 body literals that
    // chain variables so the body stays connected to the head.
    Clause clause(int max_body = 4) {
        Clause c;
        c.head = {"h", {Term::var("A")}};
        std::vector<std::string> vars = {"A"};
        int n = 1 + upto(max_body);
        for (int i = 0; i < n; ++i) {
            Atom b;
            if (upto(2) == 0) {
                b.pred = unary[upto(3)];
                b.args = {Term::var(vars[upto(static_cast<int>(vars.size()))])};
            } else {
                b.pred = binary[upto(2)];
                std::string fresh = std::string(1, static_cast<char>('B' + i));
                b.args = {Term::var(vars[upto(static_cast<int>(vars.size()))]),
                          Term::var(fresh)};
                vars.push_back(fresh);
            }
            c.body.push_back(b);
        }
        return c;
    }
};

} // namespace

TEST_CASE("rendering matches the documented clause format") {
    Clause c = parse_clause(
        "suitable_for_business(A):- expensive(A),formal_shoes(A).");
    CHECK(render(c) == "suitable_for_business(A):- expensive(A),formal_shoes(A).");
    CHECK(render(Program{}) == "");
}

TEST_CASE("parse/render round-trip on 1000 random clauses") {
    RandomGen gen(42);
    for (int i = 0; i < 1000; ++i) {
        Clause c = gen.clause();
        Clause back = parse_clause(render(c));
        CHECK(back == c);
        // idempotence of canonicalization through the text form
        Clause canon = canonical(c);
        CHECK(canonical(parse_clause(render(canon))) == canon);
    }
}

TEST_CASE("canonical form is invariant under renaming and body order") {
    RandomGen gen(7);
    std::mt19937 shuffler(99);
    for (int i = 0; i < 1000; ++i) {
        Clause c = gen.clause();
        Clause variant = c;
        std::shuffle(variant.body.begin(), variant.body.end(), shuffler);
        for (Atom* a : [&] {
                 std::vector<Atom*> all{&variant.head};
                 for (Atom& b : variant.body) all.push_back(&b);
                 return all;
             }())
            for (Term& t : a->args)
                if (t.is_var) t.name = "X" + t.name;
        CHECK(render(canonical(c)) == render(canonical(variant)));
    }
}

TEST_CASE("clause_entails equals the exhaustive substitution oracle") {
    RandomGen gen(2024);
    for (int i = 0; i < 1000; ++i) {
        FactBase fb = gen.facts(4 + gen.upto(17));
        Clause c = gen.clause();
        CHECK(clause_entails(c, fb) == oracle_entails(c, fb));
    }
}

TEST_CASE("clause_covers agrees with clause_entails membership") {
    RandomGen gen(5);
    for (int i = 0; i < 1000; ++i) {
        FactBase fb = gen.facts(4 + gen.upto(17));
        Clause c = gen.clause();
        FactIndex index(fb);
        std::set<Atom> heads = clause_entails(c, index);
        for (const std::string& k : gen.consts) {
            Atom h{"h", {Term::constant(k)}};
            CHECK(clause_covers(c, h, index) == (heads.count(h) > 0));
        }
    }
}

TEST_CASE("anti-monotonicity: extra literal can only shrink entailment") {
    RandomGen gen(11);
    for (int i = 0; i < 1000; ++i) {
        FactBase fb = gen.facts(12);
        Clause c = gen.clause(3);
        Clause longer = c;
        Atom extra{"p", {Term::var("A")}};
        longer.body.push_back(extra);
        auto small = clause_entails(longer, fb);
        auto big = clause_entails(c, fb);
        for (const Atom& a : small) CHECK(big.count(a) == 1);
    }
}

TEST_CASE("monotonicity in clauses and groundness of results") {
    RandomGen gen(13);
    for (int i = 0; i < 200; ++i) {
        FactBase fb = gen.facts(14);
        fb.pos.insert(Atom{"h", {Term::constant("a")}});
        fb.neg.insert(Atom{"h", {Term::constant("b")}});
        Program p;
        p.add(gen.clause());
        Coverage before = program_covers(p, fb);
        p.add(gen.clause());
        Coverage after = program_covers(p, fb);
        for (const Atom& a : before.covered_pos) CHECK(after.covered_pos.count(a) == 1);
        for (const Atom& a : before.covered_neg) CHECK(after.covered_neg.count(a) == 1);
        for (const Clause& c : p.clauses)
            for (const Atom& a : clause_entails(c, fb)) {
                CHECK(a.ground());
                CHECK(a.pred == "h");
            }
    }
}

TEST_CASE("the worked shoe example") {
    FactBase fb = parse_facts(
        "black(shoe_001). formal_shoes(shoe_001). leather(shoe_001). "
        "expensive(shoe_001). very_comfortable(shoe_001). "
        "pos(suitable_for_business(shoe_001)).");
    CHECK(fb.background.size() == 5);
    CHECK(fb.pos.size() == 1);

    Clause rule1 = parse_clause(
        "suitable_for_business(A):- expensive(A),formal_shoes(A).");
    auto heads = clause_entails(rule1, fb);
    REQUIRE(heads.size() == 1);
    CHECK(render(*heads.begin()) == "suitable_for_business(shoe_001)");

    Program p;
    p.add(rule1);
    p.add(parse_clause(
        "suitable_for_business(A):- synthetic_leather(A),very_comfortable(A)."));
    Coverage cov = program_covers(p, fb);
    CHECK(cov.covered_pos.size() == 1);
    CHECK(cov.covered_neg.empty());
}

TEST_CASE("example atoms are not usable as body facts") {
    FactBase fb;
    fb.pos.insert(Atom{"h", {Term::constant("a")}});
    Clause c = parse_clause("h(A):- h(A).");
    CHECK(clause_entails(c, fb).empty());
}

TEST_CASE("body with unsatisfiable literal or unknown constant yields nothing") {
    FactBase fb = parse_facts("expensive(shoe_002).");
    Clause c = parse_clause("suitable_for_business(A):- expensive(A),formal_shoes(A).");
    CHECK(clause_entails(c, fb).empty());
}

TEST_CASE("range restriction checks head variables and connectivity") {
    CHECK(range_restricted(parse_clause("h(A):- p(A).")));
    CHECK(range_restricted(parse_clause("h(A):- s(A,B),p(B).")));
    CHECK_FALSE(range_restricted(parse_clause("h(A):- p(B).")));
    CHECK_FALSE(range_restricted(parse_clause("h(A):- p(A),s(B,C).")));
}

TEST_CASE("zendo-style binary chain matches the oracle on a 3-piece world") {
    FactBase fb = parse_facts(
        "has_piece(w1,p1). has_piece(w1,p2). has_piece(w1,p3). "
        "contacts(p1,p2). contacts(p2,p1). blue(p2).");
    Clause c = parse_clause("zendo(A):- has_piece(A,C),contacts(C,B),blue(B).");
    CHECK(clause_entails(c, fb) == oracle_entails(c, fb));
    REQUIRE(clause_entails(c, fb).size() == 1);
    CHECK(render(*clause_entails(c, fb).begin()) == "zendo(w1)");
}
