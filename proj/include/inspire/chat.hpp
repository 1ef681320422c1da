#pragma once

#include "inspire/fileio.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace inspire::llm {

// Deterministic-leaning defaults; every exchange records what was used.
struct SamplingParams {
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 2048;
    int seed = 0;

    friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

struct ChatRequest {
    std::string system;
    std::string user;
    SamplingParams sampling;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    // Returns the raw assistant text. Throws on failure. Must be safe to call
    // from several threads.
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct ChatExchange {
    std::string exchange_id;  // content hash of the request
    std::string system;
    std::string user;
    std::string response;
    std::string provider;
    SamplingParams sampling;
    double latency_ms = 0.0;
    int retries = 0;
};

std::string exchange_id(const ChatRequest& request);
io::json to_json(const ChatExchange& exchange);
ChatExchange exchange_from_json(const io::json& j);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// First successful attempt wins; throws Error(provider_failure) carrying the
// last cause once every attempt has failed.
ChatExchange complete_with_retry(ChatProvider& provider, const ChatRequest& request,
                                 const RetryPolicy& policy, const Sleeper& sleep = {});

// Append-only transcript of exchanges, one JSON object per line.
class Transcript {
public:
    explicit Transcript(std::filesystem::path path) : log_(std::move(path)) {}

    void append(const ChatExchange& exchange) { log_.append(to_json(exchange)); }
    const std::filesystem::path& path() const { return log_.path(); }

    // A torn final line (interrupted append) is ignored.
    static std::vector<ChatExchange> load(const std::filesystem::path& path);

private:
    io::LineLog log_;
};

// Serves recorded responses keyed by (system, user). Repeated identical
// requests walk the recorded responses in order and then stay on the last.
class ReplayProvider : public ChatProvider {
public:
    explicit ReplayProvider(const std::vector<ChatExchange>& exchanges);
    static std::unique_ptr<ReplayProvider> from_file(const std::filesystem::path& path);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "replay"; }

private:
    struct Entry {
        std::vector<std::string> responses;
        std::size_t cursor = 0;
    };
    std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, Entry> entries_;
};

// OpenAI-compatible chat-completions endpoint.
struct HttpProviderConfig {
    std::string url;  // e.g. https://api.openai.com/v1/chat/completions
    std::string api_key;
    std::string model = "gpt-4";
    std::chrono::seconds timeout{120};

    // INSPIRE_PROVIDER_URL, INSPIRE_PROVIDER_KEY, INSPIRE_PROVIDER_MODEL.
    static std::optional<HttpProviderConfig> from_env();
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpProviderConfig config);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "http:" + config_.model; }

private:
    HttpProviderConfig config_;
    std::string origin_;
    std::string path_;
};

// Offline provider that answers the engine's own prompts deterministically:
// refinements get n templated sub-features, extractions quote sentences of
// the app description, selections merge candidate lists by name. Meant for
// demos, golden transcripts and CI, never for real elicitation.
class SyntheticProvider : public ChatProvider {
public:
    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "synthetic"; }
};

}  // namespace inspire::llm
