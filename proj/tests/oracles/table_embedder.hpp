#pragma once

// Embedder with hand-assigned vectors for chosen texts; anything else falls back to hashing.

#include "hyst/dense.hpp"

#include <map>

namespace oracle {

class TableEmbedder final : public hyst::EmbeddingProvider {
public:
    TableEmbedder(std::size_t dim, std::map<std::string, hyst::Vector> table) : dim_(dim), table_(std::move(table)) {}

    std::vector<hyst::Vector> embed(std::span<const std::string> texts) const override {
        std::vector<hyst::Vector> out;
        for (const auto& t : texts) {
            auto it = table_.find(t);
            out.push_back(it != table_.end() ? it->second : hyst::embed_hashed(std::span(&t, 1), dim_, 1).front());
        }
        return out;
    }
    std::size_t dimension() const override { return dim_; }
    std::string id() const override { return "table"; }

private:
    std::size_t dim_;
    std::map<std::string, hyst::Vector> table_;
};

}  // namespace oracle
