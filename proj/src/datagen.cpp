#include "textilp/datagen.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "textilp/parser.hpp"

namespace textilp {

using json = nlohmann::json;

const std::vector<std::string> kShoeColors = {"red", "blue", "black", "white", "gray"};
const std::vector<std::string> kShoeMaterials = {"leather", "canvas", "mesh", "synthetic_leather"};
const std::vector<std::string> kShoeStyles = {"sneakers", "casual_shoes", "formal_shoes", "skateboard_shoes"};
const std::vector<std::string> kShoePrices = {"cheap", "moderate", "expensive"};
const std::vector<std::string> kShoeComforts = {"very_comfortable", "fairly_comfortable", "moderately_comfortable"};

static const std::vector<std::string> kPieceColors = {"red", "blue", "green"};
static const std::vector<std::string> kPieceOrientations = {"lhs", "rhs", "upright", "strange"};

std::string task_name(Task t) { return t == Task::Shoes ? "shoes" : "zendo"; }

Task parse_task(const std::string& name) {
    if (name == "shoes") return Task::Shoes;
    if (name == "zendo") return Task::Zendo;
    throw std::invalid_argument("unknown task '" + name + "'");
}

std::string size_category(int size_num) {
    switch (size_num) {
        case 1: return "small";
        case 2: return "medium";
        default: return "large";
    }
}

// Engine output used directly so datasets are bit-identical across
// standard libraries (std distributions are implementation-defined).
static uint32_t rand_below(std::mt19937& rng, uint32_t n) { return rng() % n; }

static const std::string& pick(std::mt19937& rng, const std::vector<std::string>& xs) {
    return xs[rand_below(rng, static_cast<uint32_t>(xs.size()))];
}

bool label_shoes(const ShoeAttrs& s, int rule_num) {
    bool r1 = s.material == "leather" && s.color == "black" &&
              s.style == "formal_shoes" && s.price == "expensive";
    if (rule_num >= 1 && r1) return true;
    bool r2 = s.material == "synthetic_leather" && s.style == "casual_shoes" &&
              s.comfort == "very_comfortable";
    if (rule_num >= 2 && r2) return true;
    bool r3 = s.material == "leather" && s.style == "formal_shoes" &&
              (s.color == "white" || s.color == "blue") && s.price == "moderate" &&
              s.comfort == "very_comfortable";
    if (rule_num >= 3 && r3) return true;
    return false;
}

std::set<std::pair<int, int>> contacts_of(const std::vector<Piece>& pieces) {
    std::set<std::pair<int, int>> out;
    for (size_t i = 0; i < pieces.size(); ++i)
        for (size_t j = i + 1; j < pieces.size(); ++j) {
            int d = std::max(std::abs(pieces[i].x - pieces[j].x),
                             std::abs(pieces[i].y - pieces[j].y));
            if (d <= 1) out.emplace(static_cast<int>(i), static_cast<int>(j));
        }
    return out;
}

std::string head_pred_name(const GenConfig& cfg) {
    if (cfg.task == Task::Shoes) return "suitable_for_business";
    return "zendo" + std::to_string(cfg.rule_num);
}

Program ground_truth_program(const GenConfig& cfg) {
    Program p;
    if (cfg.task == Task::Shoes) {
        p.add(parse_clause("suitable_for_business(A):- "
                           "leather(A),black(A),formal_shoes(A),expensive(A)."));
        if (cfg.rule_num >= 2)
            p.add(parse_clause("suitable_for_business(A):- "
                               "synthetic_leather(A),casual_shoes(A),very_comfortable(A)."));
        if (cfg.rule_num >= 3) {
            p.add(parse_clause("suitable_for_business(A):- "
                               "leather(A),formal_shoes(A),white(A),moderate(A),very_comfortable(A)."));
            p.add(parse_clause("suitable_for_business(A):- "
                               "leather(A),formal_shoes(A),blue(A),moderate(A),very_comfortable(A)."));
        }
        return p;
    }
    switch (cfg.rule_num) {
        case 1:
            p.add(parse_clause("zendo1(A):- piece(A,C),size(C,B),blue(C),small(B),"
                               "contact(C,D),red(D)."));
            break;
        case 2:
            p.add(parse_clause("zendo2(A):- piece(A,B),piece(A,C),piece(A,D),"
                               "green(D),red(B),blue(C)."));
            p.add(parse_clause("zendo2(A):- piece(A,B),coord1(B,C),green(D),"
                               "lhs(B),coord1(D,C)."));
            break;
        default:
            p.add(parse_clause("zendo3(A):- piece(A,D),blue(D),coord1(D,B),"
                               "piece(A,C),coord1(C,B),red(C)."));
            p.add(parse_clause("zendo3(A):- piece(A,D),contact(D,C),rhs(D),"
                               "size(C,B),large(B)."));
            p.add(parse_clause("zendo3(A):- piece(A,B),upright(B),contact(B,D),"
                               "blue(D),size(D,C),large(C)."));
            break;
    }
    return p;
}

static FactBase encode_zendo_background(const ZendoWorld& w, const std::string& world_id) {
    FactBase fb;
    auto c = [](const std::string& s) { return Term::constant(s); };
    for (const Piece& p : w.pieces) {
        fb.background.insert({"piece", {c(world_id), c(p.pid)}});
        fb.background.insert({"coord1", {c(p.pid), c(std::to_string(p.x))}});
        fb.background.insert({"coord2", {c(p.pid), c(std::to_string(p.y))}});
        std::string cat = size_category(p.size_num);
        fb.background.insert({"size", {c(p.pid), c(cat)}});
        fb.background.insert({cat, {c(cat)}});
        fb.background.insert({p.color, {c(p.pid)}});
        fb.background.insert({p.orientation, {c(p.pid)}});
    }
    for (const auto& [i, j] : w.contacts) {
        fb.background.insert({"contact", {c(w.pieces[i].pid), c(w.pieces[j].pid)}});
        fb.background.insert({"contact", {c(w.pieces[j].pid), c(w.pieces[i].pid)}});
    }
    return fb;
}

bool label_zendo(const ZendoWorld& w, const std::string& world_id, int rule_num) {
    GenConfig cfg;
    cfg.task = Task::Zendo;
    cfg.rule_num = rule_num;
    Program truth = ground_truth_program(cfg);
    FactBase fb = encode_zendo_background(w, world_id);
    FactIndex fi(fb);
    Atom head{head_pred_name(cfg), {Term::constant(world_id)}};
    for (const Clause& c : truth.clauses)
        if (clause_entails(c, fi).count(head)) return true;
    return false;
}

BiasSpec ground_truth_bias(const GenConfig& cfg) {
    BiasSpec b;
    auto unary = [](const std::string& name, const std::string& type) {
        return PredicateSignature{name, 1, {type}, {ArgDir::In}, PredRole::Body};
    };
    if (cfg.task == Task::Shoes) {
        b.head = {"suitable_for_business", 1, {"shoes"}, {ArgDir::In}, PredRole::Head};
        for (const auto* values : {&kShoeColors, &kShoeMaterials, &kShoeStyles,
                                   &kShoePrices, &kShoeComforts})
            for (const std::string& v : *values) b.body.push_back(unary(v, "shoes"));
        return b;
    }
    b.head = {head_pred_name(cfg), 1, {"world"}, {ArgDir::In}, PredRole::Head};
    auto binary = [](const std::string& name, const std::string& t1,
                     const std::string& t2) {
        return PredicateSignature{name, 2, {t1, t2}, {ArgDir::In, ArgDir::Out},
                                  PredRole::Body};
    };
    b.body.push_back(binary("piece", "world", "object"));
    b.body.push_back(binary("coord1", "object", "coord"));
    b.body.push_back(binary("coord2", "object", "coord"));
    b.body.push_back(binary("size", "object", "sizecat"));
    b.body.push_back(binary("contact", "object", "object"));
    for (const std::string& v : kPieceColors) b.body.push_back(unary(v, "object"));
    for (const std::string& v : kPieceOrientations) b.body.push_back(unary(v, "object"));
    for (const std::string& v : {"small", "medium", "large"}) b.body.push_back(unary(v, "sizecat"));
    return b;
}

FactBase ground_truth_encode(const SampleRecord& s, const GenConfig& cfg, bool label) {
    FactBase fb;
    auto c = [](const std::string& x) { return Term::constant(x); };
    if (cfg.task == Task::Shoes) {
        for (const std::string& v : {s.shoes.color, s.shoes.material, s.shoes.style,
                                     s.shoes.price, s.shoes.comfort})
            fb.background.insert({v, {c(s.id)}});
    } else {
        fb = encode_zendo_background(s.zendo, s.id);
    }
    Atom example{head_pred_name(cfg), {c(s.id)}};
    if (label) fb.pos.insert(std::move(example));
    else fb.neg.insert(std::move(example));
    return fb;
}

// --- text templates ------------------------------------------------------

static std::string despace(const std::string& v) {
    std::string out = v;
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

static std::string shoe_text(const ShoeAttrs& s, int template_id, bool label) {
    std::string color = despace(s.color), material = despace(s.material),
                style = despace(s.style), price = despace(s.price),
                comfort = despace(s.comfort);
    std::string conclusion = label ? "suitable for business" : "not suitable for business";
    switch (template_id) {
        case 0:
            return "This is a " + color + " " + style + " made of " + material +
                   ", " + price + " in price and " + comfort +
                   " to wear. This shoe is " + conclusion + ".";
        case 1:
            return "This " + style + " is made of " + material + ", comes in " +
                   color + ", positioned at a " + price +
                   " price point, and is " + comfort + ". It is " + conclusion + ".";
        default:
            return "A " + color + " " + material + " " + style + ", priced " +
                   price + ", and " + comfort + " when worn. The shoe is " +
                   conclusion + ".";
    }
}

static std::string piece_text(const Piece& p, int template_id) {
    std::string xy = "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
    switch (template_id) {
        case 0:
            return "piece " + p.pid + " is a " + size_category(p.size_num) + " " +
                   p.color + " piece at " + xy + " oriented " + p.orientation;
        case 1:
            return "piece " + p.pid + " is " + p.orientation + "-oriented, " +
                   size_category(p.size_num) + " and " + p.color + ", located at " + xy;
        default:
            return "at " + xy + " sits piece " + p.pid + ", a " +
                   size_category(p.size_num) + " " + p.color + " piece oriented " +
                   p.orientation;
    }
}

static std::string zendo_text(const SampleRecord& s, int template_id, bool label) {
    std::string n = std::to_string(s.seq);
    std::string out = "World " + n + ": ";
    bool first = true;
    for (const Piece& p : s.zendo.pieces) {
        if (!first) out += "; ";
        out += piece_text(p, template_id);
        first = false;
    }
    for (const auto& [i, j] : s.zendo.contacts) {
        out += "; piece " + s.zendo.pieces[i].pid + " contacts piece " +
               s.zendo.pieces[j].pid;
    }
    out += ". World " + n + (label ? " is Zendo" : " is not Zendo");
    return out;
}

std::string render_text(const SampleRecord& s, Task task, int template_id, bool label) {
    return task == Task::Shoes ? shoe_text(s.shoes, template_id, label)
                               : zendo_text(s, template_id, label);
}

// --- generation ------------------------------------------------------------

static std::string pad3(int n) {
    std::string s = std::to_string(n);
    while (s.size() < 3) s = "0" + s;
    return s;
}

Dataset generate(const GenConfig& cfg) {
    if (cfg.sample_size < 1) throw std::invalid_argument("sample_size must be >= 1");
    if (cfg.rule_num < 1 || cfg.rule_num > 3)
        throw std::invalid_argument("rule_num must be in {1,2,3}");
    if (cfg.template_num < 1 || cfg.template_num > 3)
        throw std::invalid_argument("template_num must be in {1,2,3}");
    if (cfg.positive_ratio < 0 || cfg.positive_ratio > 1)
        throw std::invalid_argument("positive_ratio must be in [0,1]");
    if (cfg.noise_ratio < 0 || cfg.noise_ratio > 1)
        throw std::invalid_argument("noise_ratio must be in [0,1]");

    std::mt19937 rng(static_cast<uint32_t>(cfg.seed));
    const int n = cfg.sample_size;
    const int pos_quota = static_cast<int>(std::lround(cfg.positive_ratio * n));
    const int neg_quota = n - pos_quota;

    Dataset d;
    d.config = cfg;
    int n_pos = 0, n_neg = 0, rejections = 0;
    while (n_pos + n_neg < n) {
        SampleRecord s;
        s.seq = n_pos + n_neg + 1;
        if (cfg.task == Task::Shoes) {
            s.shoes.color = pick(rng, kShoeColors);
            s.shoes.material = pick(rng, kShoeMaterials);
            s.shoes.style = pick(rng, kShoeStyles);
            s.shoes.price = pick(rng, kShoePrices);
            s.shoes.comfort = pick(rng, kShoeComforts);
            s.id = "shoe_" + pad3(s.seq);
            s.clean_label = label_shoes(s.shoes, cfg.rule_num);
        } else {
            int n_pieces = 2 + static_cast<int>(rand_below(rng, 3));
            for (int j = 0; j < n_pieces; ++j) {
                Piece p;
                p.pid = "p" + std::to_string(s.seq) + "_" + std::to_string(j);
                p.x = static_cast<int>(rand_below(rng, 8));
                p.y = static_cast<int>(rand_below(rng, 8));
                p.size_num = 1 + static_cast<int>(rand_below(rng, 3));
                p.color = pick(rng, kPieceColors);
                p.orientation = pick(rng, kPieceOrientations);
                s.zendo.pieces.push_back(std::move(p));
            }
            s.zendo.contacts = contacts_of(s.zendo.pieces);
            s.id = "world_" + std::to_string(s.seq);
            s.clean_label = label_zendo(s.zendo, s.id, cfg.rule_num);
        }

        bool accept = s.clean_label ? n_pos < pos_quota : n_neg < neg_quota;
        if (!accept) {
            if (++rejections >= 100000)
                throw QuotaUnreachable("100000 consecutive rejections while filling the " +
                                       std::string(s.clean_label ? "positive" : "negative") +
                                       " quota");
            continue;
        }
        rejections = 0;
        (s.clean_label ? n_pos : n_neg) += 1;
        s.template_id = static_cast<int>(rand_below(rng, static_cast<uint32_t>(cfg.template_num)));
        s.noisy_label = s.clean_label;
        d.samples.push_back(std::move(s));
    }

    // Re-number by accepted order (rejections left gaps in seq).
    for (size_t i = 0; i < d.samples.size(); ++i) {
        SampleRecord& s = d.samples[i];
        s.seq = static_cast<int>(i) + 1;
        if (cfg.task == Task::Shoes) {
            s.id = "shoe_" + pad3(s.seq);
        } else {
            s.id = "world_" + std::to_string(s.seq);
            for (size_t j = 0; j < s.zendo.pieces.size(); ++j)
                s.zendo.pieces[j].pid =
                    "p" + std::to_string(s.seq) + "_" + std::to_string(j);
        }
    }

    // 80:20 split, test rounded down.
    const int test_count = static_cast<int>(0.2 * n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rand_below(rng, static_cast<uint32_t>(i + 1))]);
    for (int i = 0; i < n; ++i) {
        if (i < test_count) {
            d.samples[order[i]].is_test = true;
            d.test_idx.push_back(order[i]);
        } else {
            d.train_idx.push_back(order[i]);
        }
    }
    std::sort(d.train_idx.begin(), d.train_idx.end());
    std::sort(d.test_idx.begin(), d.test_idx.end());

    // Exact-count label flips, train only.
    const int train_count = n - test_count;
    const int flips = static_cast<int>(std::lround(cfg.noise_ratio * train_count));
    std::vector<int> train_order = d.train_idx;
    for (int i = train_count - 1; i > 0; --i)
        std::swap(train_order[i], train_order[rand_below(rng, static_cast<uint32_t>(i + 1))]);
    for (int i = 0; i < flips; ++i) {
        SampleRecord& s = d.samples[train_order[i]];
        s.noise_flag = true;
        s.noisy_label = !s.clean_label;
    }

    for (SampleRecord& s : d.samples)
        s.text = render_text(s, cfg.task, s.template_id,
                             s.is_test ? s.clean_label : s.noisy_label);
    return d;
}

// --- serialization -----------------------------------------------------------

std::string dataset_to_jsonl(const Dataset& d) {
    std::string out;
    for (const SampleRecord& s : d.samples) {
        json meta;
        if (d.config.task == Task::Shoes) {
            meta = {{"color", s.shoes.color},     {"material", s.shoes.material},
                    {"style", s.shoes.style},     {"price", s.shoes.price},
                    {"comfort", s.shoes.comfort}};
        } else {
            json pieces = json::array();
            for (const Piece& p : s.zendo.pieces)
                pieces.push_back({{"pid", p.pid},
                                  {"x", p.x},
                                  {"y", p.y},
                                  {"size_num", p.size_num},
                                  {"color", p.color},
                                  {"orientation", p.orientation}});
            json contacts = json::array();
            for (const auto& [i, j] : s.zendo.contacts)
                contacts.push_back({i, j});
            meta = {{"pieces", pieces}, {"contacts", contacts}};
        }
        json rec = {{"id", s.id},
                    {"seq", s.seq},
                    {"text", s.text},
                    {"label", s.is_test ? s.clean_label : s.noisy_label},
                    {"clean_label", s.clean_label},
                    {"split", s.is_test ? "test" : "train"},
                    {"template_id", s.template_id},
                    {"noise_flag", s.noise_flag},
                    {"meta", meta}};
        out += rec.dump() + "\n";
    }
    return out;
}

Dataset dataset_from_jsonl(const std::string& text) {
    Dataset d;
    size_t start = 0;
    int idx = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        json rec = json::parse(line);
        SampleRecord s;
        s.id = rec.at("id").get<std::string>();
        s.seq = rec.value("seq", idx + 1);
        s.text = rec.at("text").get<std::string>();
        s.clean_label = rec.at("clean_label").get<bool>();
        s.is_test = rec.at("split").get<std::string>() == "test";
        s.noisy_label = s.is_test ? s.clean_label : rec.at("label").get<bool>();
        s.template_id = rec.value("template_id", 0);
        s.noise_flag = rec.value("noise_flag", false);
        if (rec.contains("meta") && rec["meta"].contains("color")) {
            const json& m = rec["meta"];
            s.shoes = {m.at("color"), m.at("material"), m.at("style"),
                       m.at("price"), m.at("comfort")};
            d.config.task = Task::Shoes;
        } else if (rec.contains("meta") && rec["meta"].contains("pieces")) {
            const json& m = rec["meta"];
            for (const json& pj : m.at("pieces")) {
                Piece p;
                p.pid = pj.at("pid");
                p.x = pj.at("x");
                p.y = pj.at("y");
                p.size_num = pj.at("size_num");
                p.color = pj.at("color");
                p.orientation = pj.at("orientation");
                s.zendo.pieces.push_back(std::move(p));
            }
            for (const json& cj : m.at("contacts"))
                s.zendo.contacts.emplace(cj.at(0).get<int>(), cj.at(1).get<int>());
            d.config.task = Task::Zendo;
        }
        (s.is_test ? d.test_idx : d.train_idx).push_back(idx);
        d.samples.push_back(std::move(s));
        ++idx;
    }
    return d;
}

} // namespace textilp
