#pragma once

// Direct transcription of the Okapi BM25 formula, with its own tokenizer and statistics.

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::string w;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            w += static_cast<char>(std::tolower(c));
        } else if (!w.empty()) {
            out.push_back(w);
            w.clear();
        }
    }
    if (!w.empty()) out.push_back(w);
    return out;
}

struct Bm25Oracle {
    std::vector<std::vector<std::string>> docs;
    double k1 = 1.2;
    double b = 0.75;

    double avg_len() const {
        double total = 0;
        for (const auto& d : docs) total += static_cast<double>(d.size());
        return docs.empty() ? 0 : total / static_cast<double>(docs.size());
    }

    double df(const std::string& t) const {
        double n = 0;
        for (const auto& d : docs) {
            for (const auto& w : d) {
                if (w == t) {
                    n += 1;
                    break;
                }
            }
        }
        return n;
    }

    double score(const std::string& query, std::size_t doc) const {
        std::vector<std::string> terms;
        for (const auto& t : words(query)) {
            bool seen = false;
            for (const auto& u : terms) seen = seen || u == t;
            if (!seen) terms.push_back(t);
        }
        const double N = static_cast<double>(docs.size());
        const double avgdl = avg_len();
        const double len = static_cast<double>(docs[doc].size());
        double s = 0;
        for (const auto& t : terms) {
            double tf = 0;
            for (const auto& w : docs[doc]) tf += (w == t);
            if (tf == 0) continue;
            const double n = df(t);
            const double idf = std::log(1.0 + (N - n + 0.5) / (n + 0.5));
            s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avgdl));
        }
        return s;
    }
};

}  // namespace oracle
