#include "textilp/agents.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textilp/parser.hpp"
#include "textilp/prompts.hpp"

namespace textilp {

using json = nlohmann::json;

std::string violation_kind_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::HeadTypeUncovered: return "head_type_uncovered";
        case ViolationKind::ArityMismatch: return "arity_mismatch";
        case ViolationKind::MissingTypeDecl: return "missing_type_decl";
        case ViolationKind::MissingDirectionDecl: return "missing_direction_decl";
        case ViolationKind::DuplicatePredicate: return "duplicate_predicate";
        case ViolationKind::BadIdentifier: return "bad_identifier";
        case ViolationKind::MissingGlobalConstraint: return "missing_global_constraint";
    }
    return "unknown";
}

std::string slugify(const std::string& id) {
    std::string out;
    for (char c : id) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])))
        out = "s_" + out;
    return out;
}

static std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string transcript_to_jsonl(const Transcript& t) {
    std::string out;
    for (const TranscriptRecord& r : t) {
        json rec = {{"role", r.role},       {"attempt", r.attempt},
                    {"iteration", r.iteration}, {"prompt", r.prompt},
                    {"response", r.response},   {"timestamp", r.timestamp}};
        out += rec.dump() + "\n";
    }
    return out;
}

// --- syntactic validation --------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool valid_lower_ident(const std::string& s) {
    if (s.empty()) return false;
    if (!std::islower(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

std::string strip_comments(const std::string& text) {
    std::string out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t p = line.find('%');
        out += (p == std::string::npos ? line : line.substr(0, p)) + "\n";
    }
    return out;
}

struct Decl {
    int arity = -1;
    bool is_head = false;
    std::optional<size_t> type_len;
    std::optional<size_t> dir_len;
    std::vector<std::string> types;
};

} // namespace

std::vector<Violation> validate_bias_syntax(const std::string& bias_text,
                                            bool require_global_constraints) {
    std::vector<Violation> out;
    auto add = [&](ViolationKind k, const std::string& d) {
        out.push_back({k, d});
    };

    std::map<std::string, Decl> decls;
    std::string head_name;
    bool has_max_vars = false, has_max_body = false, has_max_clauses = false;

    std::string text = strip_comments(bias_text);
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('.', start);
        std::string stmt = trim(end == std::string::npos
                                    ? text.substr(start)
                                    : text.substr(start, end - start));
        start = end == std::string::npos ? text.size() : end + 1;
        if (stmt.empty()) continue;

        size_t lp = stmt.find('(');
        size_t rp = stmt.rfind(')');
        if (lp == std::string::npos || rp == std::string::npos || rp < lp) {
            add(ViolationKind::BadIdentifier, "malformed statement: " + stmt);
            continue;
        }
        std::string directive = trim(stmt.substr(0, lp));
        std::string args = stmt.substr(lp + 1, rp - lp - 1);

        if (directive == "head_pred" || directive == "body_pred") {
            size_t comma = args.find(',');
            std::string name = trim(comma == std::string::npos ? args : args.substr(0, comma));
            std::string arity_s = comma == std::string::npos ? "" : trim(args.substr(comma + 1));
            if (!valid_lower_ident(name)) {
                add(ViolationKind::BadIdentifier,
                    "predicate name must be a lowercase identifier: " + name);
                continue;
            }
            int arity = -1;
            try { arity = std::stoi(arity_s); } catch (...) {}
            if (arity < 1) {
                add(ViolationKind::ArityMismatch, "bad arity for " + name);
                continue;
            }
            if (decls.count(name) && decls[name].arity >= 0) {
                add(ViolationKind::DuplicatePredicate, "duplicate declaration of " + name);
                continue;
            }
            if (directive == "head_pred" && !head_name.empty()) {
                add(ViolationKind::DuplicatePredicate, "second head predicate " + name);
                continue;
            }
            decls[name].arity = arity;
            decls[name].is_head = directive == "head_pred";
            if (directive == "head_pred") head_name = name;
        } else if (directive == "type" || directive == "direction") {
            size_t comma = args.find(',');
            std::string name = trim(comma == std::string::npos ? args : args.substr(0, comma));
            std::string tuple = comma == std::string::npos ? "" : trim(args.substr(comma + 1));
            if (tuple.size() < 2 || tuple.front() != '(' || tuple.back() != ')') {
                add(ViolationKind::BadIdentifier, "malformed tuple in: " + stmt);
                continue;
            }
            std::vector<std::string> items;
            std::string inner = tuple.substr(1, tuple.size() - 2);
            std::istringstream ss(inner);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) items.push_back(item);
            }
            if (directive == "type") {
                decls[name].type_len = items.size();
                decls[name].types = items;
            } else {
                for (const std::string& d : items)
                    if (d != "in" && d != "out")
                        add(ViolationKind::BadIdentifier, "bad direction '" + d + "' for " + name);
                decls[name].dir_len = items.size();
            }
        } else if (directive == "max_vars" || directive == "max_body" ||
                   directive == "max_clauses") {
            int n = -1;
            try { n = std::stoi(trim(args)); } catch (...) {}
            if (n < 1) {
                add(ViolationKind::BadIdentifier, directive + " needs a positive count");
                continue;
            }
            if (directive == "max_vars") has_max_vars = true;
            else if (directive == "max_body") has_max_body = true;
            else has_max_clauses = true;
        } else {
            add(ViolationKind::BadIdentifier, "unknown directive '" + directive + "'");
        }
    }

    if (head_name.empty())
        add(ViolationKind::BadIdentifier, "no head_pred declaration");

    for (const auto& [name, d] : decls) {
        if (d.arity < 0) {
            add(ViolationKind::BadIdentifier,
                "type/direction given for undeclared predicate " + name);
            continue;
        }
        if (!d.type_len) {
            add(ViolationKind::MissingTypeDecl, "no type declaration for " + name);
        } else if (static_cast<int>(*d.type_len) != d.arity) {
            add(ViolationKind::ArityMismatch,
                "type tuple of " + name + " has " + std::to_string(*d.type_len) +
                    " entries but arity is " + std::to_string(d.arity));
        }
        if (!d.is_head) {
            if (!d.dir_len)
                add(ViolationKind::MissingDirectionDecl,
                    "no direction declaration for " + name);
            else if (static_cast<int>(*d.dir_len) != d.arity)
                add(ViolationKind::ArityMismatch,
                    "direction tuple of " + name + " does not match arity " +
                        std::to_string(d.arity));
        } else if (d.dir_len && static_cast<int>(*d.dir_len) != d.arity) {
            add(ViolationKind::ArityMismatch,
                "direction tuple of " + name + " does not match arity " +
                    std::to_string(d.arity));
        }
    }

    if (!head_name.empty() && decls.count(head_name) && decls[head_name].type_len) {
        for (const std::string& t : decls[head_name].types) {
            bool covered = false;
            for (const auto& [name, d] : decls) {
                if (d.is_head || d.arity < 0) continue;
                if (std::find(d.types.begin(), d.types.end(), t) != d.types.end()) {
                    covered = true;
                    break;
                }
            }
            if (!covered)
                add(ViolationKind::HeadTypeUncovered,
                    "head argument type '" + t + "' is covered by no body predicate");
        }
    }

    if (require_global_constraints) {
        if (!has_max_vars) add(ViolationKind::MissingGlobalConstraint, "max_vars missing");
        if (!has_max_body) add(ViolationKind::MissingGlobalConstraint, "max_body missing");
        if (!has_max_clauses) add(ViolationKind::MissingGlobalConstraint, "max_clauses missing");
    }

    if (out.empty()) {
        // The granular checks above should subsume the parser; keep the
        // equivalence honest by falling back to it.
        try {
            parse_bias(bias_text);
        } catch (const ParseError& e) {
            add(ViolationKind::BadIdentifier, e.what());
        }
    }
    return out;
}

// --- agent operations --------------------------------------------------------

namespace {

LlmResponse call(ChatBackend& backend, const std::string& role,
                 const std::string& system, const std::string& user,
                 const AgentConfig& cfg, int attempt, int iteration,
                 Transcript& transcript) {
    LlmRequest req;
    req.system_prompt = system;
    req.user_prompt = user;
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    req.model = cfg.model;
    LlmResponse res;
    try {
        res = backend.complete(req);
    } catch (const TransportError& e) {
        throw PipelineError(std::string("backend transport failure (") + role +
                            "): " + e.what());
    }
    transcript.push_back({role, attempt, iteration, user, res.text, now_iso8601()});
    return res;
}

std::string feedback_text(const CritiqueReport& report) {
    std::string out;
    for (const Violation& v : report.syntactic_violations)
        out += "- [" + violation_kind_name(v.kind) + "] " + v.detail + "\n";
    for (const std::string& s : report.semantic_issues) out += "- " + s + "\n";
    return out;
}

} // namespace

BiasProposal actor_propose(ChatBackend& backend,
                           const std::vector<std::string>& samples,
                           const std::optional<CritiqueReport>& feedback,
                           const AgentConfig& cfg, int attempt, int iteration,
                           Transcript& transcript) {
    if (samples.empty())
        throw PipelineError("actor needs at least one sample");
    std::vector<std::string> subset(
        samples.begin(),
        samples.begin() + std::min<size_t>(samples.size(), cfg.actor_sample_cap));
    std::string user = prompts::actor_user(
        subset, cfg.fewshots, feedback ? feedback_text(*feedback) : std::string{});
    LlmResponse res = call(backend, "actor", prompts::kActorSystem, user, cfg,
                           attempt, iteration, transcript);
    BiasProposal proposal;
    proposal.bias_text = res.text;
    proposal.iteration = iteration;
    try {
        proposal.parsed = parse_bias(res.text);
    } catch (const ParseError& e) {
        proposal.parse_error = e.what();
    }
    return proposal;
}

CritiqueReport critic_review(ChatBackend& backend, const BiasProposal& proposal,
                             const std::vector<std::string>& samples,
                             const AgentConfig& cfg, int attempt,
                             Transcript& transcript) {
    CritiqueReport report;
    report.syntactic_violations =
        validate_bias_syntax(proposal.bias_text, cfg.require_global_constraints);

    std::vector<std::string> subset(
        samples.begin(),
        samples.begin() + std::min<size_t>(samples.size(), cfg.actor_sample_cap));
    std::string user = prompts::critic_user(proposal.bias_text, subset);
    LlmResponse res = call(backend, "critic", prompts::kCriticSystem, user, cfg,
                           attempt, proposal.iteration, transcript);

    bool llm_accept = false;
    bool verdict_seen = false;
    std::istringstream in(res.text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.rfind("VERDICT:", 0) == 0) {
            verdict_seen = true;
            std::string v = t.substr(8);
            std::transform(v.begin(), v.end(), v.begin(), ::toupper);
            llm_accept = v.find("ACCEPT") != std::string::npos;
        } else if (t.rfind("- ", 0) == 0) {
            report.semantic_issues.push_back(t.substr(2));
        }
    }
    if (!verdict_seen) {
        // Unparseable verdicts never count as acceptance.
        llm_accept = false;
        report.semantic_issues.push_back("critic verdict was unparseable");
    }
    report.accepted = llm_accept && report.syntactic_violations.empty();
    return report;
}

BiasSpec refine_loop(ChatBackend& backend, const std::vector<std::string>& samples,
                     const AgentConfig& cfg, int attempt, Transcript& transcript) {
    std::optional<BiasSpec> last_valid;
    std::optional<CritiqueReport> feedback;
    for (int iteration = 1; iteration <= cfg.max_iterations; ++iteration) {
        BiasProposal proposal =
            actor_propose(backend, samples, feedback, cfg, attempt, iteration, transcript);
        CritiqueReport report =
            critic_review(backend, proposal, samples, cfg, attempt, transcript);
        if (proposal.parsed && report.syntactic_violations.empty())
            last_valid = proposal.parsed;
        if (report.accepted) return *proposal.parsed;
        feedback = report;
    }
    if (last_valid) return *last_valid;
    throw BiasConstructionFailure("no syntactically valid predicate system after " +
                                  std::to_string(cfg.max_iterations) + " iterations");
}

// --- translation ------------------------------------------------------------

namespace {

// Splits a translator response into "%% sample: <slug>" sections.
std::map<std::string, std::string> split_sections(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line, current;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.rfind("%% sample:", 0) == 0) {
            current = trim(t.substr(10));
            out.emplace(current, "");
        } else if (!current.empty()) {
            out[current] += line + "\n";
        }
    }
    return out;
}

} // namespace

std::vector<SampleFacts> translate_batch(ChatBackend& backend,
                                         const std::vector<TextSample>& batch,
                                         const BiasSpec& bias, const AgentConfig& cfg,
                                         int attempt, Transcript& transcript,
                                         std::vector<std::string>& warnings) {
    if (static_cast<int>(batch.size()) > cfg.batch_size)
        throw PipelineError("batch exceeds the configured batch size");

    std::vector<std::pair<std::string, std::string>> items;
    std::set<std::string> slugs;
    for (const TextSample& s : batch) {
        items.emplace_back(slugify(s.id), s.text);
        slugs.insert(slugify(s.id));
    }
    std::string user = prompts::translator_user(render(bias), items);

    for (int try_no = 1; try_no <= cfg.max_translation_attempts; ++try_no) {
        LlmResponse res = call(backend, "translator", prompts::kTranslatorSystem,
                               user, cfg, attempt, try_no, transcript);
        auto sections = split_sections(res.text);
        std::vector<SampleFacts> out;
        bool failed = false;
        for (const TextSample& s : batch) {
            std::string slug = slugify(s.id);
            auto it = sections.find(slug);
            if (it == sections.end()) { failed = true; break; }
            FactBase parsed;
            try {
                parsed = parse_facts(it->second, &bias);
            } catch (const ParseError&) {
                failed = true;
                break;
            }
            // Facts grounded on a different sample's constant are rejected;
            // labels from the LLM are discarded outright.
            FactBase fragment;
            for (const Atom& a : parsed.background) {
                bool foreign = false;
                for (const Term& t : a.args)
                    if (t.name != slug && slugs.count(t.name)) foreign = true;
                if (!foreign) fragment.background.insert(a);
            }
            if (fragment.background.empty()) { failed = true; break; }
            Atom example{bias.head.name, {Term::constant(slug)}};
            if (s.label) fragment.pos.insert(std::move(example));
            else fragment.neg.insert(std::move(example));
            out.push_back({s.id, std::move(fragment)});
        }
        if (!failed) return out;
        if (try_no == cfg.max_translation_attempts) {
            std::string ids;
            for (const TextSample& s : batch) ids += s.id + " ";
            warnings.push_back("translation batch dropped after " +
                               std::to_string(cfg.max_translation_attempts) +
                               " attempts: " + ids);
        }
    }
    return {};
}

// --- pipeline -----------------------------------------------------------------

std::pair<Hypothesis, PipelineRun> run_pipeline(ChatBackend& backend,
                                                const std::vector<TextSample>& train,
                                                const AgentConfig& cfg) {
    PipelineRun run;
    std::vector<std::string> sample_texts;
    for (const TextSample& s : train) sample_texts.push_back(s.text);

    std::vector<TextSample> ordered = train;
    std::sort(ordered.begin(), ordered.end(),
              [](const TextSample& a, const TextSample& b) { return a.id < b.id; });

    std::optional<Hypothesis> best;
    std::string last_failure = "no attempt ran";
    for (int attempt = 1; attempt <= cfg.max_pipeline_attempts; ++attempt) {
        run.attempt = attempt;
        BiasSpec bias;
        try {
            bias = refine_loop(backend, sample_texts, cfg, attempt, run.transcript);
        } catch (const BiasConstructionFailure& e) {
            last_failure = e.what();
            continue;
        }
        run.bias = bias;

        FactBase facts;
        std::vector<std::string> dropped;
        int n_train = 0;
        for (size_t i = 0; i < ordered.size(); i += cfg.batch_size) {
            std::vector<TextSample> batch(
                ordered.begin() + i,
                ordered.begin() + std::min(ordered.size(), i + cfg.batch_size));
            auto fragments = translate_batch(backend, batch, bias, cfg, attempt,
                                             run.transcript, run.warnings);
            if (fragments.empty()) {
                for (const TextSample& s : batch) dropped.push_back(s.id);
                continue;
            }
            for (const SampleFacts& f : fragments) {
                facts.merge(f.facts);
                ++n_train;
            }
        }
        run.facts = facts;
        run.dropped_sample_ids = dropped;
        if (n_train == 0) {
            last_failure = "every translation batch was dropped";
            continue;
        }

        Hypothesis hyp;
        try {
            hyp = learn(bias, facts, cfg.budget);
        } catch (const LearnFailure& e) {
            last_failure = e.what();
            continue;
        }
        if (!best || hyp.cost < best->cost) {
            best = hyp;
            run.hypothesis = hyp;
        }
        if (!is_ilp_failure(hyp, static_cast<int>(facts.pos.size()))) break;
        last_failure = "ILP solving failed (cost " + std::to_string(hyp.cost) + ")";
    }
    if (!best)
        throw PipelineFailure("pipeline failed after " +
                              std::to_string(cfg.max_pipeline_attempts) +
                              " attempts: " + last_failure);
    run.hypothesis = best;
    return {*best, run};
}

} // namespace textilp
