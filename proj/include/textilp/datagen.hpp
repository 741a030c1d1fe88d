#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "textilp/logic.hpp"

namespace textilp {

enum class Task { Shoes, Zendo };

std::string task_name(Task t);
Task parse_task(const std::string& name);

struct GenConfig {
    Task task = Task::Shoes;
    int rule_num = 2;       // {1,2,3}
    int template_num = 2;   // {1,2,3}
    int sample_size = 100;  // {50,100,200}
    double positive_ratio = 0.5;  // {0.2,0.3,0.5}
    double noise_ratio = 0.1;     // {0,0.1,0.2}
    uint64_t seed = 1;
};

struct ShoeAttrs {
    std::string color;     // red, blue, black, white, gray
    std::string material;  // leather, canvas, mesh, synthetic_leather
    std::string style;     // sneakers, casual_shoes, formal_shoes, skateboard_shoes
    std::string price;     // cheap, moderate, expensive
    std::string comfort;   // very_comfortable, fairly_comfortable, moderately_comfortable
};

struct Piece {
    std::string pid;  // p{world}_{index}
    int x = 0, y = 0;  // grid [0,7]
    int size_num = 1;  // 1..3 -> small/medium/large
    std::string color;        // red, blue, green
    std::string orientation;  // lhs, rhs, upright, strange
};

struct ZendoWorld {
    std::vector<Piece> pieces;  // 2..4
    std::set<std::pair<int, int>> contacts;  // piece index pairs, i < j
};

struct SampleRecord {
    std::string id;
    int seq = 0;  // 1-based generation index
    std::string text;
    bool clean_label = false;
    bool noisy_label = false;
    bool noise_flag = false;
    int template_id = 0;  // 0-based
    bool is_test = false;
    ShoeAttrs shoes;
    ZendoWorld zendo;
};

struct Dataset {
    GenConfig config;
    std::vector<SampleRecord> samples;
    std::vector<int> train_idx;
    std::vector<int> test_idx;
};

struct QuotaUnreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

extern const std::vector<std::string> kShoeColors;
extern const std::vector<std::string> kShoeMaterials;
extern const std::vector<std::string> kShoeStyles;
extern const std::vector<std::string> kShoePrices;
extern const std::vector<std::string> kShoeComforts;

std::string size_category(int size_num);  // 1..3 -> small/medium/large

// Direct attribute check against the first rule_num appendix rules.
bool label_shoes(const ShoeAttrs& s, int rule_num);

// Evaluates the zendo{rule_num} configuration's clauses over the world's
// ground-truth facts via the logic core.
bool label_zendo(const ZendoWorld& w, const std::string& world_id, int rule_num);

// Chebyshev distance <= 1 and p != q; returns unordered index pairs.
std::set<std::pair<int, int>> contacts_of(const std::vector<Piece>& pieces);

Dataset generate(const GenConfig& config);

// Natural-language rendering; the conclusion sentence reflects `label`
// (noisy label for train text, clean label for test text).
std::string render_text(const SampleRecord& s, Task task, int template_id, bool label);

std::string head_pred_name(const GenConfig& cfg);
BiasSpec ground_truth_bias(const GenConfig& cfg);
Program ground_truth_program(const GenConfig& cfg);

// Symbolic encoding of one sample (background facts plus a pos/neg example
// atom for `label`), bypassing the LLM entirely.
FactBase ground_truth_encode(const SampleRecord& s, const GenConfig& cfg, bool label);

// JSONL, one record per sample.
std::string dataset_to_jsonl(const Dataset& d);
Dataset dataset_from_jsonl(const std::string& text);

} // namespace textilp
