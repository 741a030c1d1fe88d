// Regenerates tests/data/golden_shoes.json: a scripted backend transcript
// that drives the full pipeline on the SHOES rule-1 reference dataset
// (n = 50, positive ratio 0.3, no noise, seed 1) to perfect test accuracy.
#include <algorithm>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "textilp/datagen.hpp"
#include "textilp/parser.hpp"

using namespace textilp;
using json = nlohmann::json;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_golden <output.json>\n";
        return 1;
    }

    GenConfig cfg;
    cfg.task = Task::Shoes;
    cfg.rule_num = 1;
    cfg.template_num = 2;
    cfg.sample_size = 50;
    cfg.positive_ratio = 0.3;
    cfg.noise_ratio = 0.0;
    cfg.seed = 1;
    Dataset d = generate(cfg);

    json entries = json::array();
    entries.push_back({{"match", "Design the predicate system"},
                       {"response", render(ground_truth_bias(cfg))}});
    entries.push_back({{"match", "Evaluate the predicate system"},
                       {"response", "VERDICT: ACCEPT"}});

    auto section = [](const SampleRecord& s) {
        std::string out = "%% sample: " + s.id + "\n";
        for (const std::string& v : {s.shoes.color, s.shoes.material,
                                     s.shoes.style, s.shoes.price, s.shoes.comfort})
            out += v + "(" + s.id + ").\n";
        return out;
    };
    auto add_batches = [&](std::vector<int> idx, int batch_size) {
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return d.samples[a].id < d.samples[b].id; });
        for (size_t i = 0; i < idx.size(); i += batch_size) {
            std::string reply;
            for (size_t j = i; j < std::min(idx.size(), i + batch_size); ++j)
                reply += section(d.samples[idx[j]]);
            entries.push_back({{"match", "Translate every sample"},
                               {"response", reply}});
        }
    };
    add_batches(d.train_idx, 10);
    add_batches(d.test_idx, 10);

    std::ofstream out(argv[1]);
    if (!out) {
        std::cerr << "cannot write " << argv[1] << "\n";
        return 1;
    }
    out << entries.dump(2) << "\n";
    return 0;
}
