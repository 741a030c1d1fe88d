#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "textilp/datagen.hpp"
#include "textilp/parser.hpp"

using namespace textilp;

namespace {

GenConfig make_cfg(Task task, int rules, int n, double pos, double noise,
                   uint64_t seed, int templates = 3) {
    GenConfig cfg;
    cfg.task = task;
    cfg.rule_num = rules;
    cfg.template_num = templates;
    cfg.sample_size = n;
    cfg.positive_ratio = pos;
    cfg.noise_ratio = noise;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("positive quota is met exactly on the clean labels") {
    for (double ratio : {0.2, 0.3, 0.5}) {
        for (int n : {50, 100}) {
            GenConfig cfg = make_cfg(Task::Shoes, 2, n, ratio, 0.1, 3);
            Dataset d = generate(cfg);
            REQUIRE(static_cast<int>(d.samples.size()) == n);
            int pos = 0;
            for (const SampleRecord& s : d.samples) pos += s.clean_label ? 1 : 0;
            CHECK(pos == static_cast<int>(std::lround(ratio * n)));
        }
    }
}

TEST_CASE("train/test split is 80:20 with the test share rounded down") {
    for (int n : {50, 99, 100}) {
        GenConfig cfg = make_cfg(Task::Shoes, 1, n, 0.3, 0.0, 7);
        Dataset d = generate(cfg);
        int test_count = static_cast<int>(0.2 * n);
        CHECK(static_cast<int>(d.test_idx.size()) == test_count);
        CHECK(static_cast<int>(d.train_idx.size()) == n - test_count);
        std::set<int> seen(d.train_idx.begin(), d.train_idx.end());
        for (int i : d.test_idx) CHECK(seen.insert(i).second);
        CHECK(static_cast<int>(seen.size()) == n);
        for (int i : d.test_idx) CHECK(d.samples[i].is_test);
        for (int i : d.train_idx) CHECK_FALSE(d.samples[i].is_test);
    }
}

TEST_CASE("label noise flips an exact count of train samples only") {
    for (double noise : {0.0, 0.1, 0.2}) {
        GenConfig cfg = make_cfg(Task::Shoes, 2, 100, 0.5, noise, 11);
        Dataset d = generate(cfg);
        int train_count = static_cast<int>(d.train_idx.size());
        int want = static_cast<int>(std::lround(noise * train_count));
        int flipped = 0;
        for (const SampleRecord& s : d.samples) {
            CHECK(s.noise_flag == (s.noisy_label != s.clean_label));
            if (s.noise_flag) {
                ++flipped;
                CHECK_FALSE(s.is_test);
            }
        }
        CHECK(flipped == want);
    }
}

TEST_CASE("generation is deterministic: same config gives identical JSONL") {
    for (Task task : {Task::Shoes, Task::Zendo}) {
        GenConfig cfg = make_cfg(task, 2, 60, 0.5, 0.1, 42);
        CHECK(dataset_to_jsonl(generate(cfg)) == dataset_to_jsonl(generate(cfg)));
        GenConfig other = cfg;
        other.seed = 43;
        CHECK(dataset_to_jsonl(generate(other)) != dataset_to_jsonl(generate(cfg)));
    }
}

TEST_CASE("clean labels agree with ground-truth program coverage") {
    for (Task task : {Task::Shoes, Task::Zendo}) {
        for (int rules : {1, 2, 3}) {
            GenConfig cfg = make_cfg(task, rules, 40, 0.5, 0.0, 5);
            Dataset d = generate(cfg);
            Program truth = ground_truth_program(cfg);
            for (const SampleRecord& s : d.samples) {
                FactBase fb = ground_truth_encode(s, cfg, s.clean_label);
                Coverage cov = program_covers(truth, fb);
                if (s.clean_label) {
                    CHECK(cov.covered_pos.size() == 1);
                } else {
                    CHECK(cov.covered_neg.empty());
                }
            }
        }
    }
}

TEST_CASE("sample text matches its template and shows the serving label") {
    for (Task task : {Task::Shoes, Task::Zendo}) {
        GenConfig cfg = make_cfg(task, 2, 60, 0.5, 0.2, 9);
        Dataset d = generate(cfg);
        for (const SampleRecord& s : d.samples) {
            CHECK(s.template_id >= 0);
            CHECK(s.template_id < cfg.template_num);
            bool shown = s.is_test ? s.clean_label : s.noisy_label;
            CHECK(s.text == render_text(s, task, s.template_id, shown));
            bool says_not = s.text.find("not suitable") != std::string::npos ||
                            s.text.find("is not Zendo") != std::string::npos;
            CHECK(says_not == !shown);
        }
    }
}

TEST_CASE("template_num 1 pins every sample to template 0") {
    GenConfig cfg = make_cfg(Task::Shoes, 1, 30, 0.3, 0.0, 2, 1);
    for (const SampleRecord& s : generate(cfg).samples) CHECK(s.template_id == 0);
}

TEST_CASE("contacts are the Chebyshev-adjacent unordered pairs") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Piece> pieces(2 + rng() % 3);
        for (size_t i = 0; i < pieces.size(); ++i) {
            pieces[i].pid = "p" + std::to_string(i);
            pieces[i].x = static_cast<int>(rng() % 8);
            pieces[i].y = static_cast<int>(rng() % 8);
        }
        auto got = contacts_of(pieces);
        for (size_t i = 0; i < pieces.size(); ++i)
            for (size_t j = i + 1; j < pieces.size(); ++j) {
                bool close = std::abs(pieces[i].x - pieces[j].x) <= 1 &&
                             std::abs(pieces[i].y - pieces[j].y) <= 1;
                CHECK(got.count({static_cast<int>(i), static_cast<int>(j)}) ==
                      (close ? 1u : 0u));
            }
        for (const auto& [i, j] : got) CHECK(i < j);
    }
}

TEST_CASE("zendo worlds stay on the 8x8 grid with 2 to 4 pieces") {
    GenConfig cfg = make_cfg(Task::Zendo, 3, 80, 0.5, 0.0, 21);
    Dataset d = generate(cfg);
    for (const SampleRecord& s : d.samples) {
        CHECK(s.zendo.pieces.size() >= 2);
        CHECK(s.zendo.pieces.size() <= 4);
        for (const Piece& p : s.zendo.pieces) {
            CHECK(p.x >= 0);
            CHECK(p.x <= 7);
            CHECK(p.y >= 0);
            CHECK(p.y <= 7);
            CHECK(p.size_num >= 1);
            CHECK(p.size_num <= 3);
        }
        CHECK(s.zendo.contacts == contacts_of(s.zendo.pieces));
    }
}

TEST_CASE("shoe labels match the rule definitions") {
    ShoeAttrs business{"black", "leather", "formal_shoes", "expensive",
                       "fairly_comfortable"};
    ShoeAttrs comfy{"red", "synthetic_leather", "casual_shoes", "cheap",
                    "very_comfortable"};
    ShoeAttrs dressy{"white", "leather", "formal_shoes", "moderate",
                     "very_comfortable"};
    for (int rules = 1; rules <= 3; ++rules) {
        CHECK(label_shoes(business, rules));
        CHECK(label_shoes(comfy, rules) == (rules >= 2));
        CHECK(label_shoes(dressy, rules) == (rules >= 3));
    }
    ShoeAttrs plain{"gray", "mesh", "sneakers", "cheap", "moderately_comfortable"};
    CHECK_FALSE(label_shoes(plain, 3));
}

TEST_CASE("zendo1 holds exactly when a small blue piece touches a red one") {
    ZendoWorld w;
    w.pieces = {{"p1_0", 3, 3, 1, "blue", "upright"},
                {"p1_1", 4, 3, 2, "red", "lhs"}};
    w.contacts = contacts_of(w.pieces);
    CHECK(label_zendo(w, "world_1", 1));
    w.pieces[1].x = 6;  // break the contact
    w.contacts = contacts_of(w.pieces);
    CHECK_FALSE(label_zendo(w, "world_1", 1));
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(generate(make_cfg(Task::Shoes, 0, 50, 0.5, 0.1, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate(make_cfg(Task::Shoes, 1, 0, 0.5, 0.1, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate(make_cfg(Task::Shoes, 1, 50, 1.5, 0.1, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate(make_cfg(Task::Shoes, 1, 50, 0.5, -0.1, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate(make_cfg(Task::Shoes, 1, 50, 0.5, 0.1, 1, 4)),
                    std::invalid_argument);
}

TEST_CASE("JSONL round-trips samples and splits") {
    for (Task task : {Task::Shoes, Task::Zendo}) {
        GenConfig cfg = make_cfg(task, 2, 50, 0.3, 0.1, 13);
        Dataset d = generate(cfg);
        std::string jsonl = dataset_to_jsonl(d);
        Dataset back = dataset_from_jsonl(jsonl);
        REQUIRE(back.samples.size() == d.samples.size());
        CHECK(back.train_idx == d.train_idx);
        CHECK(back.test_idx == d.test_idx);
        CHECK(back.config.task == task);
        for (size_t i = 0; i < d.samples.size(); ++i) {
            const SampleRecord& a = d.samples[i];
            const SampleRecord& b = back.samples[i];
            CHECK(a.id == b.id);
            CHECK(a.text == b.text);
            CHECK(a.clean_label == b.clean_label);
            CHECK(a.noisy_label == b.noisy_label);
            CHECK(a.is_test == b.is_test);
            CHECK(a.template_id == b.template_id);
            CHECK(a.noise_flag == b.noise_flag);
        }
        CHECK(dataset_to_jsonl(back) == jsonl);
    }
}

TEST_CASE("ids are sequential and encodings use them consistently") {
    GenConfig cfg = make_cfg(Task::Zendo, 1, 25, 0.2, 0.0, 4);
    Dataset d = generate(cfg);
    for (size_t i = 0; i < d.samples.size(); ++i) {
        const SampleRecord& s = d.samples[i];
        CHECK(s.seq == static_cast<int>(i) + 1);
        CHECK(s.id == "world_" + std::to_string(s.seq));
        for (size_t j = 0; j < s.zendo.pieces.size(); ++j)
            CHECK(s.zendo.pieces[j].pid ==
                  "p" + std::to_string(s.seq) + "_" + std::to_string(j));
        FactBase fb = ground_truth_encode(s, cfg, true);
        CHECK(fb.pos.count(Atom{"zendo1", {Term::constant(s.id)}}) == 1);
    }
}
