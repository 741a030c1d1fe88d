#include "textilp/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace textilp {

using json = nlohmann::json;

bool predict(const Program& program, const Atom& head_example, const FactBase& facts) {
    FactBase bg;
    bg.background = facts.background;
    FactIndex index(bg);
    for (const Clause& c : program.clauses)
        if (clause_entails(c, index).count(head_example)) return true;
    return false;
}

Metrics metrics(const std::vector<Prediction>& preds) {
    if (preds.empty()) throw EmptyPredictions("metrics over zero predictions");
    int tp = 0, fp = 0, fn = 0, tn = 0;
    for (const Prediction& p : preds) {
        if (p.predicted && p.gold) ++tp;
        else if (p.predicted && !p.gold) ++fp;
        else if (!p.predicted && p.gold) ++fn;
        else ++tn;
    }
    Metrics m;
    m.acc = static_cast<double>(tp + tn) / static_cast<double>(preds.size());
    m.f1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    return m;
}

namespace {

Atom example_atom_of(const FactBase& fragment) {
    if (!fragment.pos.empty()) return *fragment.pos.begin();
    return *fragment.neg.begin();
}

RunResult run_symbolic(const Dataset& d, const EvalOptions& opt) {
    const GenConfig& cfg = d.config;
    RunResult r;
    r.seed = cfg.seed;
    BiasSpec bias = ground_truth_bias(cfg);

    FactBase train;
    for (int i : d.train_idx)
        train.merge(ground_truth_encode(d.samples[i], cfg, d.samples[i].noisy_label));

    Hypothesis hyp;
    try {
        hyp = learn(bias, train, opt.budget);
    } catch (const LearnFailure& e) {
        r.failed = true;
        r.failure_reason = e.what();
        return r;
    }
    r.hypothesis_text = render(hyp.program);
    r.cost = hyp.cost;
    r.size = hyp.size;
    r.fp = hyp.fp;
    r.fn = hyp.fn;
    r.optimal = hyp.optimal;

    std::vector<Prediction> preds;
    for (int i : d.test_idx) {
        const SampleRecord& s = d.samples[i];
        FactBase fragment = ground_truth_encode(s, cfg, s.clean_label);
        Atom head = example_atom_of(fragment);
        preds.push_back({s.id, predict(hyp.program, head, fragment), s.clean_label});
    }
    Metrics m = metrics(preds);
    r.acc = m.acc;
    r.f1 = m.f1;
    return r;
}

RunResult run_llm(const Dataset& d, const EvalOptions& opt) {
    RunResult r;
    r.seed = d.config.seed;

    std::vector<TextSample> train;
    for (int i : d.train_idx)
        train.push_back({d.samples[i].id, d.samples[i].text, d.samples[i].noisy_label});

    AgentConfig agent = opt.agent;
    agent.budget = opt.budget;

    Hypothesis hyp;
    BiasSpec bias;
    try {
        auto [h, run] = run_pipeline(*opt.backend, train, agent);
        hyp = h;
        bias = *run.bias;
        r.transcript = run.transcript;
        r.warnings = run.warnings;
    } catch (const std::runtime_error& e) {
        r.failed = true;
        r.failure_reason = e.what();
        return r;
    }
    r.hypothesis_text = render(hyp.program);
    r.cost = hyp.cost;
    r.size = hyp.size;
    r.fp = hyp.fp;
    r.fn = hyp.fn;
    r.optimal = hyp.optimal;

    // Test samples take the same translation path as training; gold labels
    // stay clean. Samples in dropped batches default to a negative prediction.
    std::vector<TextSample> test;
    for (int i : d.test_idx)
        test.push_back({d.samples[i].id, d.samples[i].text, d.samples[i].clean_label});
    std::sort(test.begin(), test.end(),
              [](const TextSample& a, const TextSample& b) { return a.id < b.id; });

    std::map<std::string, bool> predicted;
    const size_t bsz = static_cast<size_t>(agent.batch_size);
    for (size_t i = 0; i < test.size(); i += bsz) {
        std::vector<TextSample> batch(
            test.begin() + i, test.begin() + std::min(test.size(), i + bsz));
        std::vector<SampleFacts> fragments;
        try {
            Transcript scratch;
            fragments = translate_batch(*opt.backend, batch, bias, agent, 1,
                                        scratch, r.warnings);
            r.transcript.insert(r.transcript.end(), scratch.begin(), scratch.end());
        } catch (const std::runtime_error& e) {
            r.failed = true;
            r.failure_reason = e.what();
            return r;
        }
        for (const SampleFacts& f : fragments)
            predicted[f.id] = predict(hyp.program, example_atom_of(f.facts), f.facts);
    }

    std::vector<Prediction> preds;
    for (int i : d.test_idx) {
        const SampleRecord& s = d.samples[i];
        auto it = predicted.find(s.id);
        preds.push_back({s.id, it != predicted.end() && it->second, s.clean_label});
    }
    Metrics m = metrics(preds);
    r.acc = m.acc;
    r.f1 = m.f1;
    return r;
}

} // namespace

RunResult run_on_dataset(const Dataset& dataset, const EvalOptions& opt) {
    if (!opt.symbolic_only && opt.backend == nullptr)
        throw std::invalid_argument("LLM mode needs a backend");
    auto start = std::chrono::steady_clock::now();
    RunResult r = opt.symbolic_only ? run_symbolic(dataset, opt)
                                    : run_llm(dataset, opt);
    r.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return r;
}

EvalReport run_experiment(const GenConfig& config, const EvalOptions& opt) {
    if (!opt.symbolic_only && opt.backend == nullptr)
        throw std::invalid_argument("LLM mode needs a backend");
    EvalReport report;
    report.config = config;
    double sum_acc = 0.0, sum_f1 = 0.0;
    int ok = 0;
    for (int k = 0; k < opt.n_seeds; ++k) {
        GenConfig cfg = config;
        cfg.seed = config.seed + static_cast<uint64_t>(k);
        RunResult r = run_on_dataset(generate(cfg), opt);
        if (r.failed) {
            ++report.n_failed;
        } else {
            sum_acc += r.acc;
            sum_f1 += r.f1;
            ++ok;
        }
        report.per_run.push_back(std::move(r));
    }
    if (ok > 0) {
        report.mean_acc = sum_acc / ok;
        report.mean_f1 = sum_f1 / ok;
    }
    return report;
}

std::vector<EvalReport> sweep(const GenConfig& base, const std::string& axis,
                              const std::vector<double>& values,
                              const EvalOptions& opt) {
    std::vector<EvalReport> out;
    for (double v : values) {
        GenConfig cfg = base;
        if (axis == "rule_num") cfg.rule_num = static_cast<int>(std::lround(v));
        else if (axis == "template_num") cfg.template_num = static_cast<int>(std::lround(v));
        else if (axis == "sample_size") cfg.sample_size = static_cast<int>(std::lround(v));
        else if (axis == "positive_ratio") cfg.positive_ratio = v;
        else if (axis == "noise_ratio") cfg.noise_ratio = v;
        else throw InvalidAxis("unknown sweep axis: " + axis);
        out.push_back(run_experiment(cfg, opt));
    }
    return out;
}

namespace {

json config_json(const GenConfig& c) {
    return {{"task", task_name(c.task)},
            {"rule_num", c.rule_num},
            {"template_num", c.template_num},
            {"sample_size", c.sample_size},
            {"positive_ratio", c.positive_ratio},
            {"noise_ratio", c.noise_ratio},
            {"seed", c.seed}};
}

} // namespace

std::string report_to_json(const EvalReport& report) {
    json runs = json::array();
    for (const RunResult& r : report.per_run) {
        runs.push_back({{"seed", r.seed},
                        {"failed", r.failed},
                        {"failure_reason", r.failure_reason},
                        {"acc", r.acc},
                        {"f1", r.f1},
                        {"hypothesis", r.hypothesis_text},
                        {"cost_report",
                         {{"cost", r.cost},
                          {"size", r.size},
                          {"fp", r.fp},
                          {"fn", r.fn},
                          {"optimal", r.optimal},
                          {"wall_time_s", r.wall_time_s}}},
                        {"warnings", r.warnings}});
    }
    json out = {{"config", config_json(report.config)},
                {"per_run", runs},
                {"mean_acc", report.mean_acc},
                {"mean_f1", report.mean_f1},
                {"n_failed", report.n_failed}};
    return out.dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "task,rule_num,template_num,sample_size,positive_ratio,noise_ratio,"
           "seed,acc,f1,cost,optimal,failed\n";
    for (const EvalReport& rep : reports) {
        const GenConfig& c = rep.config;
        for (const RunResult& r : rep.per_run) {
            out << task_name(c.task) << ',' << c.rule_num << ',' << c.template_num
                << ',' << c.sample_size << ',' << c.positive_ratio << ','
                << c.noise_ratio << ',' << r.seed << ',' << r.acc << ',' << r.f1
                << ',' << r.cost << ',' << (r.optimal ? 1 : 0) << ','
                << (r.failed ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

} // namespace textilp
