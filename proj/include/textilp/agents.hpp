#pragma once

#include <optional>
#include <string>
#include <vector>

#include "textilp/learner.hpp"
#include "textilp/llm.hpp"
#include "textilp/logic.hpp"

namespace textilp {

enum class ViolationKind {
    HeadTypeUncovered,
    ArityMismatch,
    MissingTypeDecl,
    MissingDirectionDecl,
    DuplicatePredicate,
    BadIdentifier,
    MissingGlobalConstraint,
};

std::string violation_kind_name(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string detail;
};

struct BiasProposal {
    std::string bias_text;
    std::optional<BiasSpec> parsed;
    std::string parse_error;
    int iteration = 1;
};

struct CritiqueReport {
    std::vector<std::string> semantic_issues;
    std::vector<Violation> syntactic_violations;
    bool accepted = false;
};

struct TranscriptRecord {
    std::string role;  // actor | critic | translator
    int attempt = 1;
    int iteration = 0;
    std::string prompt;
    std::string response;
    std::string timestamp;
};
using Transcript = std::vector<TranscriptRecord>;

std::string transcript_to_jsonl(const Transcript& t);

struct TextSample {
    std::string id;
    std::string text;
    bool label = false;
};

struct SampleFacts {
    std::string id;
    FactBase facts;  // background plus the label-derived example atom
};

struct PipelineRun {
    int attempt = 1;
    std::optional<BiasSpec> bias;
    FactBase facts;
    std::optional<Hypothesis> hypothesis;
    Transcript transcript;
    std::vector<std::string> warnings;
    std::vector<std::string> dropped_sample_ids;
};

struct AgentConfig {
    int actor_sample_cap = 10;
    int batch_size = 10;
    int max_iterations = 5;           // Actor-Critic rounds
    int max_translation_attempts = 2; // per batch
    int max_pipeline_attempts = 2;
    bool require_global_constraints = false;
    std::string model = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 4096;
    std::vector<std::string> fewshots;
    SearchBudget budget;
};

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BiasConstructionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PipelineFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lowercase identifier used as the sample's Prolog constant.
std::string slugify(const std::string& id);

// Deterministic, programmatic syntactic validation; empty result means
// parse_bias accepts the text and all invariants hold.
std::vector<Violation> validate_bias_syntax(const std::string& bias_text,
                                            bool require_global_constraints = false);

BiasProposal actor_propose(ChatBackend& backend,
                           const std::vector<std::string>& samples,
                           const std::optional<CritiqueReport>& feedback,
                           const AgentConfig& cfg, int attempt, int iteration,
                           Transcript& transcript);

CritiqueReport critic_review(ChatBackend& backend, const BiasProposal& proposal,
                             const std::vector<std::string>& samples,
                             const AgentConfig& cfg, int attempt,
                             Transcript& transcript);

// Alternates Actor and Critic up to max_iterations; returns the first
// accepted bias, falling back to the last syntactically valid proposal.
BiasSpec refine_loop(ChatBackend& backend, const std::vector<std::string>& samples,
                     const AgentConfig& cfg, int attempt, Transcript& transcript);

// One batch of translations (at most two attempts). Returns the fragments,
// or an empty vector when the batch was dropped. Example atoms are derived
// from dataset labels, never from the LLM output.
std::vector<SampleFacts> translate_batch(ChatBackend& backend,
                                         const std::vector<TextSample>& batch,
                                         const BiasSpec& bias, const AgentConfig& cfg,
                                         int attempt, Transcript& transcript,
                                         std::vector<std::string>& warnings);

std::pair<Hypothesis, PipelineRun> run_pipeline(ChatBackend& backend,
                                                const std::vector<TextSample>& train,
                                                const AgentConfig& cfg);

} // namespace textilp
