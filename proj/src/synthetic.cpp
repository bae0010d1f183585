#include "hyst/synthetic.hpp"

#include "hyst/text.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>

namespace hyst {

using nlohmann::json;

namespace {

const std::vector<std::string> kBrands = {"Spyder", "3Skull",   "Halex",   "Sufix",    "Martin",  "ORCA",
                                          "Zumba",  "Columbia", "Coleman", "Rawlings", "Tasco",   "Wilson"};
const std::vector<std::string> kCategories = {"ski jackets", "fishing line", "hunting bows", "swim caps",
                                              "leggings",    "socks",        "table tennis", "tents",
                                              "headlamps",   "yoga mats"};
const std::vector<std::string> kAspects = {"lightweight", "waterproof", "durable",   "breathable", "insulated",
                                           "compact",     "affordable", "precise",   "comfortable", "stylish",
                                           "quiet",       "sturdy",     "flexible",  "reflective", "padded",
                                           "adjustable"};
const std::vector<std::string> kFiller = {"design", "material", "daily",  "outdoor", "training", "season",
                                          "fit",    "color",    "finish", "trail",   "weekend",  "travel"};

// Deterministic across standard libraries: only raw mt19937_64 output is used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }
    // Two distinct aspects, neither in `avoid`.
    std::pair<std::string, std::string> aspects(const std::set<std::string>& avoid = {}) {
        std::vector<std::string> pool;
        for (const auto& a : kAspects) {
            if (!avoid.count(a)) pool.push_back(a);
        }
        shuffle(pool);
        return {pool[0], pool[1]};
    }

private:
    std::mt19937_64 gen_;
};

Schema catalog_schema() {
    return Schema({{"BRAND", ColumnKind::Single, kBrands},
                   {"CATEGORY", ColumnKind::Multiple, kCategories},
                   {"PRICE", ColumnKind::Numeric, std::nullopt}});
}

json product_row(const std::string& brand, std::vector<std::string> categories, double price, std::string title,
                 std::string description, std::string reviews) {
    return json{{"BRAND", brand},       {"CATEGORY", std::move(categories)}, {"PRICE", price},
                {"title", std::move(title)}, {"description", std::move(description)}, {"reviews", std::move(reviews)}};
}

std::string filler_sentence(Rng& rng) {
    const auto& a = rng.pick(kFiller);
    const auto& b = rng.pick(kFiller);
    const auto& c = rng.pick(kFiller);
    return "Good " + a + " and " + b + " for " + c + " use.";
}

bool contains_token(const std::string& text, const std::string& word) {
    auto tokens = tokenize(text);
    return std::find(tokens.begin(), tokens.end(), word) != tokens.end();
}

struct QuerySpec {
    std::string brand;
    std::string category;
    std::string a1;
    std::string a2;
    std::optional<double> max_price;
};

// Assigns ids after shuffling, ingests, and judges every record against each query spec.
void finalize(SyntheticBenchmark& bench, std::vector<json> rows, const std::vector<QuerySpec>& specs, Rng& rng) {
    rng.shuffle(rows);
    std::ostringstream jsonl;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "p%04zu", i + 1);
        json row = {{"id", id}};
        for (auto& [k, v] : rows[i].items()) row[k] = v;
        jsonl << row.dump() << '\n';
        bench.rows.push_back(std::move(row));
    }
    std::istringstream in(jsonl.str());
    bench.records = ingest(in, bench.schema, kSyntheticTextFields).records;

    for (std::size_t qi = 0; qi < specs.size(); ++qi) {
        const auto& s = specs[qi];
        const auto& qid = bench.queries[qi].id;
        for (const auto& r : bench.records) {
            const auto& brand = std::get<std::string>(r.attrs.at("BRAND"));
            const auto& cats = std::get<std::vector<std::string>>(r.attrs.at("CATEGORY"));
            const double price = std::get<double>(r.attrs.at("PRICE"));
            if (brand != s.brand || std::find(cats.begin(), cats.end(), s.category) == cats.end()) continue;
            if (s.max_price && !(price < *s.max_price)) continue;
            if (!contains_token(r.text, s.a1) || !contains_token(r.text, s.a2)) continue;
            if (bench.qrels.judgments[qid].size() < kMaxRelevantPerQuery) bench.qrels.judgments[qid].insert(r.id);
        }
    }
}

}  // namespace

SyntheticBenchmark make_synthetic_benchmark(const SyntheticOptions& options) {
    Rng rng(options.seed);
    SyntheticBenchmark bench;
    bench.schema = catalog_schema();

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& b : kBrands) {
        for (const auto& c : kCategories) pairs.emplace_back(b, c);
    }
    rng.shuffle(pairs);

    std::vector<json> rows;
    std::vector<QuerySpec> specs;
    auto price_below = [&](double ceiling) { return static_cast<double>(10 + rng.below(static_cast<std::size_t>(ceiling) - 10)); };
    auto any_price = [&] { return static_cast<double>(10 + rng.below(390)); };

    for (std::size_t qi = 0; qi < options.queries; ++qi) {
        const auto& [brand, category] = pairs[qi % pairs.size()];
        auto [a1, a2] = rng.aspects();
        QuerySpec spec{brand, category, a1, a2, std::nullopt};
        if (options.price_every && qi % options.price_every == options.price_every - 1) {
            spec.max_price = static_cast<double>(100 + 50 * rng.below(3));
        }

        std::string text;
        switch (qi % 3) {
            case 0: text = "Can you suggest " + a1 + " and " + a2 + " " + category + " from " + brand + "?"; break;
            case 1: text = "Are there " + category + " from " + brand + " that are " + a1 + " and " + a2 + "?"; break;
            default: text = "Recommend " + brand + " " + category + " that feel " + a1 + " and really " + a2 + "."; break;
        }
        if (spec.max_price) text += " Something under $" + format_number(*spec.max_price) + " please.";
        char qid[16];
        std::snprintf(qid, sizeof qid, "q%03zu", qi + 1);
        bench.queries.push_back({qid, text});
        const bool adversarial = options.adversarial_every && qi % options.adversarial_every == 0;
        if (adversarial) bench.adversarial.insert(qid);

        auto in_range = [&] { return spec.max_price ? price_below(*spec.max_price) : any_price(); };
        for (int t = 0; t < 2; ++t) {
            const double price = in_range();
            const auto f1 = filler_sentence(rng);
            const auto f2 = filler_sentence(rng);
            rows.push_back(product_row(brand, {category}, price, brand + " " + a1 + " " + category,
                                       "Reliable " + category + " with a " + a1 + " build. " + f1,
                                       "Owners call it " + a2 + ". " + f2));
        }
        for (int d = 0; d < 2; ++d) {
            auto [o1, o2] = rng.aspects({a1, a2});
            const double price = in_range();
            const auto f1 = filler_sentence(rng);
            const auto f2 = filler_sentence(rng);
            rows.push_back(product_row(brand, {category}, price, brand + " " + o1 + " " + category,
                                       "Classic " + category + " with a " + o1 + " build. " + f1,
                                       "Owners call it " + o2 + ". " + f2));
        }
        if (adversarial) {
            for (int d = 0; d < 2; ++d) {
                std::string other;
                do {
                    other = rng.pick(kBrands);
                } while (other == brand);
                std::string echo = text;
                auto pos = echo.find(brand);
                if (pos != std::string::npos) echo.erase(pos, brand.size());
                const double price = in_range();
                rows.push_back(product_row(other, {category}, price, a1 + " " + a2 + " " + category,
                                           echo + " " + a1 + " and " + a2 + " " + category + ".",
                                           "So " + a1 + " and so " + a2 + "."));
            }
        }
        specs.push_back(std::move(spec));
    }
    for (std::size_t f = 0; f < options.filler_records; ++f) {
        auto [o1, o2] = rng.aspects();
        const auto& brand = rng.pick(kBrands);
        const auto& category = rng.pick(kCategories);
        std::vector<std::string> cats{category};
        if (rng.below(4) == 0) {
            const auto& extra = rng.pick(kCategories);
            if (extra != category) cats.push_back(extra);
        }
        const double price = any_price();
        const auto f1 = filler_sentence(rng);
        const auto f2 = filler_sentence(rng);
        rows.push_back(product_row(brand, cats, price, o1 + " " + category, "A " + o1 + " pick. " + f1,
                                   "Reviewers mention it is " + o2 + ". " + f2));
    }
    finalize(bench, std::move(rows), specs, rng);
    return bench;
}

SyntheticBenchmark make_case_study(std::uint64_t seed) {
    Rng rng(seed);
    SyntheticBenchmark bench;
    bench.schema = catalog_schema();
    std::vector<json> rows;
    std::vector<QuerySpec> specs;
    for (std::size_t qi = 0; qi < 10; ++qi) {
        const auto& brand = kBrands[qi];
        const auto& category = kCategories[qi];
        const auto& decoy_brand = kBrands[(qi + 1) % 10];
        auto [a1, a2] = rng.aspects();
        specs.push_back({brand, category, a1, a2, std::nullopt});
        const std::string text = "Can you recommend " + category + " from " + brand + " that are " + a1 + " and " + a2 + "?";
        char qid[16];
        std::snprintf(qid, sizeof qid, "c%02zu", qi + 1);
        bench.queries.push_back({qid, text});
        bench.adversarial.insert(qid);

        auto price = [&] { return static_cast<double>(20 + rng.below(300)); };
        const double target_price = price();
        rows.push_back(product_row(brand, {category}, target_price, brand + " " + category,
                                   "Reliable " + category + " with a " + a1 + " build.",
                                   "Customers say it is " + a2 + "."));
        auto [o1, o2] = rng.aspects({a1, a2});
        const double distractor_price = price();
        rows.push_back(product_row(brand, {category}, distractor_price, brand + " " + category,
                                   "Classic " + category + " with a " + o1 + " build.",
                                   "Customers say it is " + o2 + "."));
        const double decoy_price = price();
        rows.push_back(product_row(decoy_brand, {category}, decoy_price, a1 + " and " + a2 + " " + category,
                                   "Can you recommend " + category + " that are " + a1 + " and " + a2 + "? These " +
                                       category + " are " + a1 + " and " + a2 + ".",
                                   "So " + a1 + " and " + a2 + "."));
        for (int f = 0; f < 2; ++f) {
            auto [f1, f2] = rng.aspects({a1, a2});
            const auto& fb = kBrands[10 + rng.below(2)];
            const auto& fc = rng.pick(kCategories);
            const double fp = price();
            const auto fs = filler_sentence(rng);
            rows.push_back(product_row(fb, {fc}, fp, f1 + " gear", "A " + f1 + " pick. " + fs,
                                       "Reviewers mention it is " + f2 + "."));
        }
    }
    finalize(bench, std::move(rows), specs, rng);
    return bench;
}

void write_benchmark(const SyntheticBenchmark& bench, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);
    write_file((base / "schema.json").string(), bench.schema.to_json().dump(2) + "\n");
    std::string corpus;
    for (const auto& row : bench.rows) corpus += row.dump() + "\n";
    write_file((base / "corpus.jsonl").string(), corpus);
    std::string queries;
    for (const auto& q : bench.queries) queries += q.id + "\t" + q.text + "\n";
    write_file((base / "queries.tsv").string(), queries);
    std::string qrels;
    for (const auto& [qid, docs] : bench.qrels.judgments) {
        for (const auto& d : docs) qrels += qid + "\t" + d + "\n";
    }
    write_file((base / "qrels.tsv").string(), qrels);
    json config = {{"schema", "schema.json"},
                   {"corpus", "corpus.jsonl"},
                   {"index_dir", "index"},
                   {"cache_dir", "cache"},
                   {"queries", "queries.tsv"},
                   {"qrels", "qrels.tsv"},
                   {"text_fields", kSyntheticTextFields},
                   {"embedder", {{"type", "hashed"}, {"dim", 512}, {"seed", 42}}},
                   {"planner", {{"type", "rules"}}},
                   {"defaults", {{"k", 10}, {"lambda", 0.5}, {"refine", false}, {"rrf_c", 60}}}};
    write_file((base / "config.json").string(), config.dump(2) + "\n");
}

}  // namespace hyst
