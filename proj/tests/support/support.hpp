#pragma once

#include "inspire/chat.hpp"
#include "inspire/corpus.hpp"
#include "inspire/embedding.hpp"
#include "inspire/vectorindex.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using inspire::io::json;

// Deletes itself on scope exit.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

private:
    std::filesystem::path path_;
};

// Mock provider driven by a callback; records every request.
class ScriptedProvider : public inspire::llm::ChatProvider {
public:
    using Handler = std::function<std::string(const inspire::llm::ChatRequest&, std::size_t call)>;
    explicit ScriptedProvider(Handler h) : handler_(std::move(h)) {}

    std::string complete(const inspire::llm::ChatRequest& request) override;
    std::string id() const override { return "scripted"; }

    std::vector<inspire::llm::ChatRequest> requests() const;
    std::size_t calls() const { return calls_; }

private:
    Handler handler_;
    mutable std::mutex mutex_;
    std::vector<inspire::llm::ChatRequest> requests_;
    std::atomic<std::size_t> calls_{0};
};

// JSON list text in the shape the prompts ask for.
std::string feature_list(const std::vector<std::pair<std::string, std::string>>& items,
                         const std::vector<std::string>& source_ids = {});

// Number following marker in text, or nullopt.
std::optional<std::size_t> number_after(const std::string& text, const std::string& marker);

// Compliant mock written independently of the engine's synthetic provider:
// refinement prompts get exactly n items, extraction prompts two items per
// description, selection prompts the first n distinct candidates with their
// ids. With hallucinate_every > 0 every such selected item gets a bogus id.
class CompliantMock : public inspire::llm::ChatProvider {
public:
    explicit CompliantMock(std::size_t hallucinate_every = 0) : hallucinate_every_(hallucinate_every) {}
    std::string complete(const inspire::llm::ChatRequest& request) override;
    std::string id() const override { return "compliant-mock"; }

    std::size_t hallucinated() const { return hallucinated_; }

private:
    std::size_t hallucinate_every_;
    std::atomic<std::size_t> counter_{0};
    std::atomic<std::size_t> hallucinated_{0};
};

// Deterministic English app records with descriptions of 200..max_chars
// characters. Every dup_every-th app copies an earlier description so that
// score ties occur.
std::vector<inspire::corpus::AppRecord> fixture_corpus(std::size_t count, std::uint32_t seed,
                                                       std::size_t max_chars = 5000, std::size_t dup_every = 17);

std::string random_words(std::mt19937& rng, std::size_t min_chars, std::size_t max_chars);

std::string to_jsonl(const std::vector<inspire::corpus::AppRecord>& records);

// Exhaustive reference ranking: every chunk embedded on its own, per-app best
// chunk, full sort by score descending then app id ascending.
std::vector<inspire::vectorindex::QueryHit> brute_force_query(
    const std::vector<inspire::corpus::AppRecord>& records, const std::string& query, std::size_t k,
    const inspire::vectorindex::EmbeddingProvider& embedder, const inspire::vectorindex::IndexConfig& config);

}  // namespace testing_support
