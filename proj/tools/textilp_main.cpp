#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "textilp/agents.hpp"
#include "textilp/datagen.hpp"
#include "textilp/eval.hpp"
#include "textilp/learner.hpp"
#include "textilp/llm.hpp"
#include "textilp/parser.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace textilp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;   // pipeline / learn failure
constexpr int kExitTransport = 3; // transport / auth failure

struct CommonOpts {
    std::string task = "shoes";
    int rules = 2;
    int templates = 2;
    int samples = 100;
    double pos_ratio = 0.5;
    double noise = 0.1;
    uint64_t seed = 1;
    std::string out_dir = ".";
};

GenConfig to_gen_config(const CommonOpts& o) {
    GenConfig c;
    c.task = parse_task(o.task);
    c.rule_num = o.rules;
    c.template_num = o.templates;
    c.sample_size = o.samples;
    c.positive_ratio = o.pos_ratio;
    c.noise_ratio = o.noise;
    c.seed = o.seed;
    return c;
}

void add_gen_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--task", o.task, "Task: shoes or zendo")
        ->check(CLI::IsMember({"shoes", "zendo"}))
        ->capture_default_str();
    cmd->add_option("--rules", o.rules, "Number of ground-truth rules (1-3)")
        ->check(CLI::Range(1, 3))
        ->capture_default_str();
    cmd->add_option("--templates", o.templates, "Number of text templates (1-3)")
        ->check(CLI::Range(1, 3))
        ->capture_default_str();
    cmd->add_option("--samples", o.samples, "Dataset size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--pos-ratio", o.pos_ratio, "Positive sample ratio")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--noise", o.noise, "Train label-flip ratio")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
}

struct BackendOpts {
    bool symbolic_only = false;
    std::string script;
    std::string endpoint;
    std::string model = "gpt-4o";
    std::string api_key_env = "LLM_API_KEY";
    double timeout_s = 60.0;
};

void add_backend_flags(CLI::App* cmd, BackendOpts& b) {
    auto* sym = cmd->add_flag("--symbolic-only", b.symbolic_only,
                              "Ground-truth encoder + learner, no LLM");
    auto* scr = cmd->add_option("--scripted", b.script,
                                "Scripted backend JSON file (offline)");
    auto* live = cmd->add_option("--endpoint", b.endpoint,
                                 "Live chat-completions base URL");
    scr->excludes(live);
    live->excludes(scr);
    sym->excludes(scr)->excludes(live);
    cmd->add_option("--model", b.model, "Model identifier")->capture_default_str();
    cmd->add_option("--api-key-env", b.api_key_env,
                    "Environment variable holding the API key")
        ->capture_default_str();
    cmd->add_option("--timeout", b.timeout_s, "HTTP timeout (seconds)")
        ->capture_default_str();
}

std::unique_ptr<ChatBackend> open_backend(const BackendOpts& b) {
    BackendConfig cfg;
    if (!b.script.empty()) {
        cfg.kind = BackendKind::Scripted;
        cfg.script_path = b.script;
    } else {
        if (b.endpoint.empty())
            throw CLI::ValidationError(
                "backend", "one of --symbolic-only, --scripted, --endpoint is required");
        cfg.kind = BackendKind::HttpChat;
        cfg.endpoint = b.endpoint;
        cfg.api_key_env = b.api_key_env;
        cfg.timeout_s = b.timeout_s;
    }
    return make_backend(cfg);
}

void add_budget_flags(CLI::App* cmd, SearchBudget& budget) {
    cmd->add_option("--max-candidates", budget.max_candidates)
        ->capture_default_str();
    cmd->add_option("--time-limit", budget.time_limit_s, "Search time limit (s)")
        ->capture_default_str();
    cmd->add_option("--exact-threshold", budget.exact_threshold,
                    "Pool size above which greedy search is used")
        ->capture_default_str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void echo_config(const CLI::App& cmd) {
    std::cout << "# effective config\n";
    for (const CLI::Option* opt : cmd.get_options()) {
        std::string name = opt->get_name();
        if (name.empty() || name == "--help" || name == "--config") continue;
        std::string value = opt->count() > 0 ? opt->as<std::string>()
                                             : opt->get_default_str();
        std::cout << "#   " << name << " = " << value << "\n";
    }
}

// --- subcommands -----------------------------------------------------------

int cmd_generate(const CommonOpts& o) {
    GenConfig cfg = to_gen_config(o);
    Dataset d = generate(cfg);
    fs::create_directories(o.out_dir);
    fs::path dir(o.out_dir);

    write_file(dir / "dataset.jsonl", dataset_to_jsonl(d));
    write_file(dir / "bias.pl", render(ground_truth_bias(cfg)));

    FactBase train;
    for (int i : d.train_idx)
        train.merge(ground_truth_encode(d.samples[i], cfg, d.samples[i].noisy_label));
    std::string bk, exs;
    for (const Atom& a : train.background) bk += render(a) + ".\n";
    for (const Atom& a : train.pos) exs += "pos(" + render(a) + ").\n";
    for (const Atom& a : train.neg) exs += "neg(" + render(a) + ").\n";
    write_file(dir / "bk.pl", bk);
    write_file(dir / "exs.pl", exs);

    int n_pos = 0, n_flipped = 0;
    for (const SampleRecord& s : d.samples) {
        n_pos += s.clean_label;
        n_flipped += s.noise_flag;
    }
    std::cout << "wrote " << (dir / "dataset.jsonl").string() << " ("
              << d.samples.size() << " samples, " << n_pos << " positives, "
              << n_flipped << " flipped train labels, " << d.train_idx.size()
              << " train / " << d.test_idx.size() << " test)\n";
    return kExitOk;
}

int cmd_learn(const std::string& bias_path, const std::string& bk_path,
              const std::string& exs_path, const std::string& out_dir,
              const SearchBudget& budget) {
    BiasSpec bias;
    FactBase facts;
    try {
        bias = parse_bias(read_file(bias_path));
        FactBase bk = parse_facts(read_file(bk_path), &bias);
        FactBase exs = parse_facts(read_file(exs_path), &bias);
        facts.background = bk.background;
        facts.pos = exs.pos;
        facts.neg = exs.neg;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }

    auto start = std::chrono::steady_clock::now();
    Hypothesis hyp;
    try {
        hyp = learn(bias, facts, budget);
    } catch (const LearnFailure& e) {
        std::cerr << "learn failure: " << e.what() << "\n";
        return kExitFailure;
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                start)
                      .count();

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_file(dir / "program.pl", render(hyp.program) + "\n");
    json cost = {{"cost", hyp.cost}, {"size", hyp.size},       {"fp", hyp.fp},
                 {"fn", hyp.fn},     {"optimal", hyp.optimal}, {"wall_time_s", wall}};
    write_file(dir / "cost.json", cost.dump(2) + "\n");
    std::cout << render(hyp.program) << "\n"
              << "cost=" << hyp.cost << " size=" << hyp.size << " fp=" << hyp.fp
              << " fn=" << hyp.fn << " optimal=" << (hyp.optimal ? "true" : "false")
              << "\n";
    return kExitOk;
}

int cmd_pipeline(const std::string& dataset_path, const std::string& out_dir,
                 const BackendOpts& b, const SearchBudget& budget) {
    Dataset d = dataset_from_jsonl(read_file(dataset_path));

    EvalOptions opt;
    opt.symbolic_only = b.symbolic_only;
    opt.budget = budget;
    opt.agent.model = b.model;
    opt.agent.budget = budget;
    std::unique_ptr<ChatBackend> backend;
    if (!b.symbolic_only) {
        backend = open_backend(b);
        opt.backend = backend.get();
    }

    RunResult r;
    try {
        r = run_on_dataset(d, opt);
    } catch (const AuthError& e) {
        std::cerr << "auth error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    }

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_file(dir / "transcript.jsonl", transcript_to_jsonl(r.transcript));

    EvalReport report;
    report.config = d.config;
    report.per_run.push_back(r);
    if (!r.failed) {
        report.mean_acc = r.acc;
        report.mean_f1 = r.f1;
    } else {
        report.n_failed = 1;
    }
    write_file(dir / "report.json", report_to_json(report));
    write_file(dir / "program.pl", r.hypothesis_text + "\n");

    if (r.failed) {
        // Transport problems surface through the pipeline's failure reason.
        std::cerr << "pipeline failure: " << r.failure_reason << "\n";
        bool transport = r.failure_reason.find("transport") != std::string::npos ||
                         r.failure_reason.find("API key") != std::string::npos;
        return transport ? kExitTransport : kExitFailure;
    }
    std::cout << "acc=" << r.acc << " f1=" << r.f1 << " cost=" << r.cost
              << " program:\n" << r.hypothesis_text << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonOpts& o, const std::string& axis,
              const std::vector<double>& values, int n_seeds,
              const BackendOpts& b, const SearchBudget& budget) {
    EvalOptions opt;
    opt.symbolic_only = b.symbolic_only;
    opt.n_seeds = n_seeds;
    opt.budget = budget;
    opt.agent.model = b.model;
    std::unique_ptr<ChatBackend> backend;
    if (!b.symbolic_only) {
        backend = open_backend(b);
        opt.backend = backend.get();
    }

    std::vector<EvalReport> reports;
    try {
        reports = sweep(to_gen_config(o), axis, values, opt);
    } catch (const InvalidAxis& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const AuthError& e) {
        std::cerr << "auth error: " << e.what() << "\n";
        return kExitTransport;
    }

    fs::create_directories(o.out_dir);
    fs::path dir(o.out_dir);
    write_file(dir / "sweep.csv", reports_to_csv(reports));
    json all = json::array();
    for (const EvalReport& r : reports) all.push_back(json::parse(report_to_json(r)));
    write_file(dir / "sweep.json", all.dump(2) + "\n");
    std::cout << "wrote " << (dir / "sweep.csv").string() << " ("
              << reports.size() << " axis values x " << n_seeds << " seeds)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"textilp: Horn-clause rule learning from text via LLM agents + MDL ILP"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file (CLI flags take precedence)");

    CommonOpts gen_opts;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
    add_gen_flags(generate_cmd, gen_opts);

    std::string bias_path = "bias.pl", bk_path = "bk.pl", exs_path = "exs.pl";
    std::string learn_out = ".";
    SearchBudget learn_budget;
    auto* learn_cmd = app.add_subcommand("learn", "Run the ILP learner on Prolog files");
    learn_cmd->add_option("--bias", bias_path)->capture_default_str();
    learn_cmd->add_option("--bk", bk_path)->capture_default_str();
    learn_cmd->add_option("--exs", exs_path)->capture_default_str();
    learn_cmd->add_option("--out", learn_out)->capture_default_str();
    add_budget_flags(learn_cmd, learn_budget);

    std::string dataset_path;
    std::string pipeline_out = ".";
    BackendOpts pipeline_backend;
    SearchBudget pipeline_budget;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "Full agents + learner + eval pipeline");
    pipeline_cmd->add_option("--dataset", dataset_path, "dataset.jsonl")->required();
    pipeline_cmd->add_option("--out", pipeline_out)->capture_default_str();
    add_backend_flags(pipeline_cmd, pipeline_backend);
    add_budget_flags(pipeline_cmd, pipeline_budget);

    CommonOpts sweep_opts;
    std::string axis;
    std::vector<double> values;
    int n_seeds = 3;
    BackendOpts sweep_backend;
    SearchBudget sweep_budget;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one experimental variable");
    add_gen_flags(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--axis", axis,
                          "rule_num | template_num | sample_size | positive_ratio | noise_ratio")
        ->required();
    sweep_cmd->add_option("--values", values, "Axis values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--seeds", n_seeds, "Seeds per report")->capture_default_str();
    add_backend_flags(sweep_cmd, sweep_backend);
    add_budget_flags(sweep_cmd, sweep_budget);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        echo_config(*sub);
        if (sub == generate_cmd) return cmd_generate(gen_opts);
        if (sub == learn_cmd)
            return cmd_learn(bias_path, bk_path, exs_path, learn_out, learn_budget);
        if (sub == pipeline_cmd)
            return cmd_pipeline(dataset_path, pipeline_out, pipeline_backend,
                                pipeline_budget);
        if (sub == sweep_cmd)
            return cmd_sweep(sweep_opts, axis, values, n_seeds, sweep_backend,
                             sweep_budget);
    } catch (const AuthError& e) {
        std::cerr << "auth error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
