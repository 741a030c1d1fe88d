#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "textilp/agents.hpp"
#include "textilp/datagen.hpp"
#include "textilp/learner.hpp"
#include "textilp/llm.hpp"
#include "textilp/logic.hpp"

namespace textilp {

struct Prediction {
    std::string sample_id;
    bool predicted = false;
    bool gold = false;  // always the clean label
};

struct Metrics {
    double acc = 0.0;
    double f1 = 0.0;
};

struct EmptyPredictions : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunResult {
    uint64_t seed = 0;
    bool failed = false;
    std::string failure_reason;
    double acc = 0.0;
    double f1 = 0.0;
    std::string hypothesis_text;
    int cost = 0, size = 0, fp = 0, fn = 0;
    bool optimal = false;
    double wall_time_s = 0.0;
    Transcript transcript;
    std::vector<std::string> warnings;
};

struct EvalReport {
    GenConfig config;
    std::vector<RunResult> per_run;  // sorted by seed
    double mean_acc = 0.0;           // over non-failed runs
    double mean_f1 = 0.0;
    int n_failed = 0;
};

struct EvalOptions {
    bool symbolic_only = true;
    int n_seeds = 3;
    ChatBackend* backend = nullptr;  // required unless symbolic_only
    AgentConfig agent;
    SearchBudget budget;
};

// True iff the program derives the sample's head atom from its background.
bool predict(const Program& program, const Atom& head_example, const FactBase& facts);

// Positive-class F1; f1 = 0 when TP = 0. Throws EmptyPredictions on [].
Metrics metrics(const std::vector<Prediction>& preds);

// One full train/test pass over an existing dataset.
RunResult run_on_dataset(const Dataset& dataset, const EvalOptions& opt);

// Seeds config.seed .. config.seed + n_seeds - 1, one dataset each.
EvalReport run_experiment(const GenConfig& config, const EvalOptions& opt);

struct InvalidAxis : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// axis in {rule_num, template_num, sample_size, positive_ratio, noise_ratio}.
std::vector<EvalReport> sweep(const GenConfig& base, const std::string& axis,
                              const std::vector<double>& values,
                              const EvalOptions& opt);

std::string report_to_json(const EvalReport& report);
std::string reports_to_csv(const std::vector<EvalReport>& reports);

} // namespace textilp
