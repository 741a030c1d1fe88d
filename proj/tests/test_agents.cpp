#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textilp/agents.hpp"
#include "textilp/parser.hpp"

using namespace textilp;
using json = nlohmann::json;

namespace {

const std::string kShoesBias =
    "head_pred(suitable_for_business,1).\n"
    "type(suitable_for_business,(shoes,)).\n"
    "body_pred(black,1). type(black,(shoes,)). direction(black,(in,)).\n"
    "body_pred(leather,1). type(leather,(shoes,)). direction(leather,(in,)).\n"
    "max_vars(6). max_body(6). max_clauses(4).\n";

const std::string kToyBias =
    "head_pred(target,1). type(target,(item,)).\n"
    "body_pred(red,1). type(red,(item,)). direction(red,(in,)).\n"
    "body_pred(blue,1). type(blue,(item,)). direction(blue,(in,)).\n";

bool has_kind(const std::vector<Violation>& vs, ViolationKind k) {
    return std::any_of(vs.begin(), vs.end(),
                       [&](const Violation& v) { return v.kind == k; });
}

ScriptedBackend::Entry actor(const std::string& response) {
    return {"Design the predicate system", -1, response};
}
ScriptedBackend::Entry critic(const std::string& response) {
    return {"Evaluate the predicate system", -1, response};
}
ScriptedBackend::Entry translator(const std::string& response) {
    return {"Translate every sample", -1, response};
}

// Three red positives and one blue negative, so the MDL optimum is the
// single clause target(A):- red(A).
const std::vector<TextSample> kToyTrain = {
    {"a", "item a is red", true},
    {"b", "item b is red", true},
    {"c", "item c is red", true},
    {"d", "item d is blue", false},
};

const std::string kToyTranslation =
    "%% sample: a\nred(a).\n"
    "%% sample: b\nred(b).\n"
    "%% sample: c\nred(c).\n"
    "%% sample: d\nblue(d).\n";

} // namespace

TEST_CASE("slugify produces lowercase Prolog constants") {
    CHECK(slugify("shoe_001") == "shoe_001");
    CHECK(slugify("World 12!") == "world_12");
    CHECK(slugify("A--B") == "a_b");
    CHECK(slugify("123abc") == "s_123abc");
    CHECK(slugify("") == "s_");
}

TEST_CASE("a well-formed bias yields no violations") {
    CHECK(validate_bias_syntax(kShoesBias).empty());
    CHECK(validate_bias_syntax(kShoesBias, true).empty());
    CHECK(validate_bias_syntax(kToyBias).empty());
}

TEST_CASE("each defect class is detected") {
    SUBCASE("duplicate predicate") {
        auto vs = validate_bias_syntax(kToyBias + "body_pred(red,1).");
        CHECK(has_kind(vs, ViolationKind::DuplicatePredicate));
        vs = validate_bias_syntax(kToyBias + "head_pred(other,1). type(other,(item,)).");
        CHECK(has_kind(vs, ViolationKind::DuplicatePredicate));
    }
    SUBCASE("bad identifier") {
        auto vs = validate_bias_syntax(
            "head_pred(Target,1). type(Target,(item,)).\n"
            "body_pred(red,1). type(red,(item,)). direction(red,(in,)).");
        CHECK(has_kind(vs, ViolationKind::BadIdentifier));
        CHECK(has_kind(validate_bias_syntax(kToyBias + "frobnicate(red,1)."),
                       ViolationKind::BadIdentifier));
        CHECK(has_kind(validate_bias_syntax(kToyBias + "type(ghost,(item,))."),
                       ViolationKind::BadIdentifier));
        CHECK(has_kind(validate_bias_syntax("body_pred(red,1). type(red,(item,)). "
                                            "direction(red,(in,))."),
                       ViolationKind::BadIdentifier));  // no head_pred at all
    }
    SUBCASE("arity mismatch") {
        CHECK(has_kind(validate_bias_syntax(
                           "head_pred(target,1). type(target,(item,item)).\n"
                           "body_pred(red,1). type(red,(item,)). direction(red,(in,))."),
                       ViolationKind::ArityMismatch));
        CHECK(has_kind(validate_bias_syntax(kToyBias + "body_pred(touch,0)."),
                       ViolationKind::ArityMismatch));
        CHECK(has_kind(validate_bias_syntax(
                           kToyBias +
                           "body_pred(near,2). type(near,(item,item)). "
                           "direction(near,(in,))."),
                       ViolationKind::ArityMismatch));
    }
    SUBCASE("missing type declaration") {
        CHECK(has_kind(validate_bias_syntax(kToyBias + "body_pred(green,1). "
                                                       "direction(green,(in,))."),
                       ViolationKind::MissingTypeDecl));
    }
    SUBCASE("missing direction declaration") {
        CHECK(has_kind(validate_bias_syntax(kToyBias + "body_pred(green,1). "
                                                       "type(green,(item,))."),
                       ViolationKind::MissingDirectionDecl));
    }
    SUBCASE("uncovered head type") {
        CHECK(has_kind(validate_bias_syntax(
                           "head_pred(target,1). type(target,(world,)).\n"
                           "body_pred(red,1). type(red,(item,)). direction(red,(in,))."),
                       ViolationKind::HeadTypeUncovered));
    }
    SUBCASE("missing global constraints, only when required") {
        auto vs = validate_bias_syntax(kToyBias, true);
        CHECK(has_kind(vs, ViolationKind::MissingGlobalConstraint));
        CHECK_FALSE(has_kind(validate_bias_syntax(kToyBias, false),
                             ViolationKind::MissingGlobalConstraint));
    }
}

TEST_CASE("no violations exactly when the bias parses") {
    const std::string texts[] = {
        kShoesBias, kToyBias, "garbage", "head_pred(h,1).",
        kToyBias + "max_vars(0).",
    };
    for (const std::string& text : texts) {
        bool parses = true;
        try {
            parse_bias(text);
        } catch (const ParseError&) {
            parses = false;
        }
        CHECK(validate_bias_syntax(text).empty() == parses);
    }
}

TEST_CASE("critic verdict parsing") {
    AgentConfig cfg;
    Transcript tr;
    BiasProposal proposal;
    proposal.bias_text = kToyBias;
    proposal.parsed = parse_bias(kToyBias);
    SUBCASE("accept") {
        ScriptedBackend b({critic("VERDICT: ACCEPT")});
        CritiqueReport r = critic_review(b, proposal, {"sample"}, cfg, 1, tr);
        CHECK(r.accepted);
        CHECK(r.semantic_issues.empty());
    }
    SUBCASE("revise with issues") {
        ScriptedBackend b({critic("VERDICT: REVISE\n- missing a color predicate\n"
                                  "- red and blue overlap")});
        CritiqueReport r = critic_review(b, proposal, {"sample"}, cfg, 1, tr);
        CHECK_FALSE(r.accepted);
        REQUIRE(r.semantic_issues.size() == 2);
        CHECK(r.semantic_issues[0] == "missing a color predicate");
    }
    SUBCASE("unparseable verdict never counts as acceptance") {
        ScriptedBackend b({critic("looks good to me")});
        CritiqueReport r = critic_review(b, proposal, {"sample"}, cfg, 1, tr);
        CHECK_FALSE(r.accepted);
        CHECK_FALSE(r.semantic_issues.empty());
    }
    SUBCASE("acceptance is vetoed by syntactic violations") {
        BiasProposal bad;
        bad.bias_text = "garbage";
        ScriptedBackend b({critic("VERDICT: ACCEPT")});
        CritiqueReport r = critic_review(b, bad, {"sample"}, cfg, 1, tr);
        CHECK_FALSE(r.accepted);
        CHECK_FALSE(r.syntactic_violations.empty());
    }
}

TEST_CASE("refine_loop accepts on the first round with two calls") {
    ScriptedBackend b({actor(kToyBias), critic("VERDICT: ACCEPT")});
    AgentConfig cfg;
    Transcript tr;
    BiasSpec bias = refine_loop(b, {"item a is red"}, cfg, 1, tr);
    CHECK(bias.head.name == "target");
    CHECK(b.calls_made() == 2);
    REQUIRE(tr.size() == 2);
    CHECK(tr[0].role == "actor");
    CHECK(tr[1].role == "critic");
    CHECK(tr[0].iteration == 1);
}

TEST_CASE("refine_loop accepts on the third round after feedback") {
    ScriptedBackend b({
        actor("garbage"),
        critic("VERDICT: REVISE\n- not even parseable"),
        actor(kToyBias),
        critic("VERDICT: REVISE\n- needs a green predicate"),
        actor(kToyBias + "body_pred(green,1). type(green,(item,)). "
                         "direction(green,(in,)).\n"),
        critic("VERDICT: ACCEPT"),
    });
    AgentConfig cfg;
    Transcript tr;
    BiasSpec bias = refine_loop(b, {"item a is red"}, cfg, 1, tr);
    CHECK(bias.body.size() == 3);
    CHECK(b.calls_made() == 6);
    // The second actor prompt must carry the critic's feedback forward.
    CHECK(tr[2].prompt.find("not even parseable") != std::string::npos);
}

TEST_CASE("refine_loop falls back to the last syntactically valid proposal") {
    std::vector<ScriptedBackend::Entry> entries;
    for (int i = 0; i < 5; ++i) {
        entries.push_back(actor(kToyBias));
        entries.push_back(critic("VERDICT: REVISE\n- perpetually unhappy"));
    }
    ScriptedBackend b(entries);
    AgentConfig cfg;
    Transcript tr;
    BiasSpec bias = refine_loop(b, {"item a is red"}, cfg, 1, tr);
    CHECK(bias.head.name == "target");
    CHECK(b.calls_made() == 10);
}

TEST_CASE("refine_loop fails after max_iterations without a valid bias") {
    std::vector<ScriptedBackend::Entry> entries;
    for (int i = 0; i < 5; ++i) {
        entries.push_back(actor("garbage"));
        entries.push_back(critic("VERDICT: ACCEPT"));
    }
    ScriptedBackend b(entries);
    AgentConfig cfg;
    Transcript tr;
    CHECK_THROWS_AS(refine_loop(b, {"item a is red"}, cfg, 1, tr),
                    BiasConstructionFailure);
    CHECK(b.calls_made() == 10);
}

TEST_CASE("translate_batch parses sections and derives labels from the dataset") {
    ScriptedBackend b({translator(
        "%% sample: a\nred(a).\npos(target(a)).\n"
        "%% sample: d\nblue(d).\nneg(target(d)).\n")});
    BiasSpec bias = parse_bias(kToyBias);
    AgentConfig cfg;
    Transcript tr;
    std::vector<std::string> warnings;
    // Sample a is labelled negative here even though the translator tried
    // to emit pos(); the dataset label must win.
    std::vector<TextSample> batch = {{"a", "item a is red", false},
                                     {"d", "item d is blue", true}};
    auto out = translate_batch(b, batch, bias, cfg, 1, tr, warnings);
    REQUIRE(out.size() == 2);
    CHECK(out[0].facts.background.count(Atom{"red", {Term::constant("a")}}) == 1);
    CHECK(out[0].facts.pos.empty());
    CHECK(out[0].facts.neg.count(Atom{"target", {Term::constant("a")}}) == 1);
    CHECK(out[1].facts.pos.count(Atom{"target", {Term::constant("d")}}) == 1);
    CHECK(warnings.empty());
}

TEST_CASE("translate_batch retries once and succeeds") {
    ScriptedBackend b({
        translator("%% sample: a\nnot valid prolog\n"),
        translator("%% sample: a\nred(a).\n"),
    });
    BiasSpec bias = parse_bias(kToyBias);
    AgentConfig cfg;
    Transcript tr;
    std::vector<std::string> warnings;
    auto out = translate_batch(b, {{"a", "item a is red", true}}, bias, cfg, 1,
                               tr, warnings);
    REQUIRE(out.size() == 1);
    CHECK(b.calls_made() == 2);
    CHECK(warnings.empty());
    REQUIRE(tr.size() == 2);
    CHECK(tr[1].iteration == 2);
}

TEST_CASE("translate_batch drops the batch after two failed attempts") {
    SUBCASE("missing section") {
        ScriptedBackend b({translator("%% sample: a\nred(a).\n"),
                           translator("%% sample: a\nred(a).\n")});
        BiasSpec bias = parse_bias(kToyBias);
        AgentConfig cfg;
        Transcript tr;
        std::vector<std::string> warnings;
        std::vector<TextSample> batch = {{"a", "item a is red", true},
                                         {"b", "item b is blue", false}};
        CHECK(translate_batch(b, batch, bias, cfg, 1, tr, warnings).empty());
        CHECK(b.calls_made() == 2);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("a b") != std::string::npos);
    }
    SUBCASE("facts grounded on another sample's constant") {
        ScriptedBackend b({translator("%% sample: a\nred(b).\n"
                                      "%% sample: b\nblue(b).\n"),
                           translator("%% sample: a\nred(b).\n"
                                      "%% sample: b\nblue(b).\n")});
        BiasSpec bias = parse_bias(kToyBias);
        AgentConfig cfg;
        Transcript tr;
        std::vector<std::string> warnings;
        std::vector<TextSample> batch = {{"a", "item a is red", true},
                                         {"b", "item b is blue", false}};
        CHECK(translate_batch(b, batch, bias, cfg, 1, tr, warnings).empty());
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("run_pipeline learns the toy rule end to end") {
    ScriptedBackend b({actor(kToyBias), critic("VERDICT: ACCEPT"),
                       translator(kToyTranslation)});
    AgentConfig cfg;
    auto [hyp, run] = run_pipeline(b, kToyTrain, cfg);
    CHECK(render(hyp.program) == "target(A):- red(A).");
    CHECK(hyp.fp == 0);
    CHECK(hyp.fn == 0);
    CHECK(run.attempt == 1);
    CHECK(run.dropped_sample_ids.empty());
    CHECK(b.calls_made() == 3);

    // Transcript serializes as one JSON object per line.
    std::istringstream lines(transcript_to_jsonl(run.transcript));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        json rec = json::parse(line);
        for (const char* key :
             {"role", "attempt", "iteration", "prompt", "response", "timestamp"})
            CHECK(rec.contains(key));
        ++n;
    }
    CHECK(n == 3);
}

TEST_CASE("run_pipeline restarts when every batch is dropped") {
    ScriptedBackend b({
        actor(kToyBias), critic("VERDICT: ACCEPT"),
        translator("nothing useful"), translator("still nothing"),
        actor(kToyBias), critic("VERDICT: ACCEPT"),
        translator(kToyTranslation),
    });
    AgentConfig cfg;
    auto [hyp, run] = run_pipeline(b, kToyTrain, cfg);
    CHECK(render(hyp.program) == "target(A):- red(A).");
    CHECK(run.attempt == 2);
    CHECK_FALSE(run.warnings.empty());
    CHECK(b.calls_made() == 7);
}

TEST_CASE("run_pipeline fails after exhausting its attempts") {
    AgentConfig cfg;
    cfg.max_iterations = 1;
    ScriptedBackend b({
        actor("garbage"), critic("VERDICT: ACCEPT"),
        actor("garbage"), critic("VERDICT: ACCEPT"),
    });
    CHECK_THROWS_AS(run_pipeline(b, kToyTrain, cfg), PipelineFailure);
    CHECK(b.calls_made() == 4);
}

TEST_CASE("transport failures surface as PipelineError") {
    ScriptedBackend b({});  // any call throws ScriptExhausted, not Transport
    AgentConfig cfg;
    Transcript tr;
    CHECK_THROWS_AS(actor_propose(b, {"x"}, std::nullopt, cfg, 1, 1, tr),
                    ScriptExhausted);
    CHECK_THROWS_AS(actor_propose(b, {}, std::nullopt, cfg, 1, 1, tr),
                    PipelineError);
}
