#include "textilp/prompts.hpp"

namespace textilp::prompts {

const std::string kActorSystem = R"(You design predicate systems (language biases) for an inductive logic programming solver.
Given raw text samples of a binary classification task, output a complete predicate system as Prolog-style directives:
  head_pred(name,arity).  body_pred(name,arity).
  type(name,(t1,...,tk)).  direction(name,(d1,...,dk)).
  max_vars(n).  max_body(n).  max_clauses(n).
Rules: exactly one head predicate naming the target concept; lowercase identifiers; every head argument type must be covered by at least one body predicate; directions are in/out per argument.
Output only the directives, one per line, no commentary.)";

const std::string kCriticSystem = R"(You evaluate a proposed predicate system for an inductive logic programming task.
Judge semantic quality only: completeness (are crucial concepts missing?), redundancy (are there semantically overlapping predicates?), and relevance to the target concept.
Answer with a first line of exactly "VERDICT: ACCEPT" or "VERDICT: REVISE", then one issue per line starting with "- ".)";

const std::string kTranslatorSystem = R"(You translate natural-language samples into ground Prolog facts using the given predicate system.
For each sample output a section:
  %% sample: <constant>
followed by one fact per line describing that sample's features, each fact grounded on the sample's constant (for relational tasks, also on entity constants mentioned in the text).
Use only the body predicates of the predicate system. Do not output pos/neg labels. Do not invent features absent from the text.)";

static std::string join_numbered(const std::vector<std::string>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i)
        out += std::to_string(i + 1) + ". " + xs[i] + "\n";
    return out;
}

std::string actor_user(const std::vector<std::string>& samples,
                       const std::vector<std::string>& fewshots,
                       const std::string& feedback) {
    std::string out;
    if (!fewshots.empty()) {
        out += "Examples of predicate abstraction from other tasks:\n";
        for (const std::string& f : fewshots) out += f + "\n";
        out += "\n";
    }
    out += "Task samples:\n" + join_numbered(samples);
    if (!feedback.empty())
        out += "\nFeedback on your previous predicate system:\n" + feedback + "\n";
    out += "\nDesign the predicate system now.";
    return out;
}

std::string critic_user(const std::string& bias_text,
                        const std::vector<std::string>& samples) {
    return "Proposed predicate system:\n" + bias_text +
           "\n\nTask samples:\n" + join_numbered(samples) +
           "\nEvaluate the predicate system.";
}

std::string translator_user(
    const std::string& bias_text,
    const std::vector<std::pair<std::string, std::string>>& batch) {
    std::string out = "Predicate system:\n" + bias_text + "\nSamples:\n";
    for (const auto& [slug, text] : batch)
        out += "constant: " + slug + "\ntext: " + text + "\n";
    out += "\nTranslate every sample.";
    return out;
}

} // namespace textilp::prompts
