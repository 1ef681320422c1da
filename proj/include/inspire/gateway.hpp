#pragma once

#include "inspire/chat.hpp"
#include "inspire/error.hpp"
#include "inspire/feature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace inspire::llm {

struct ParsedFeatureList {
    std::vector<SubFeature> items;
    std::vector<std::string> warnings;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::string raw)
        : Error(ErrorCode::parse, message), raw_(std::move(raw)) {}

    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

// Takes the first well-formed JSON array in the text, so code fences and
// surrounding prose are tolerated. Keys: "sub-feature" -> name,
// "description", "source-app-id". Items without a name are skipped with a
// warning; a count different from expected_n is a warning, not an error.
// Throws ParseError when no JSON array is present.
ParsedFeatureList parse_feature_list(const std::string& raw, std::optional<std::size_t> expected_n = std::nullopt);

struct GatewayOptions {
    RetryPolicy retry;
    SamplingParams sampling;
    Sleeper sleep;  // empty: real sleeping
};

struct FeatureListResult {
    std::vector<SubFeature> items;
    std::vector<std::string> warnings;
    std::vector<std::string> exchange_ids;
};

// Provider access for the pipelines: retries, transcript recording, parsing,
// and one corrective re-ask when the list is unparseable or the wrong size.
class Gateway {
public:
    Gateway(ChatProvider& provider, GatewayOptions options = {}, Transcript* transcript = nullptr);

    ChatExchange complete(const std::string& system, const std::string& user);

    FeatureListResult request_features(const std::string& system, const std::string& user,
                                       std::optional<std::size_t> expected_n);

    ChatProvider& provider() { return provider_; }

private:
    ChatProvider& provider_;
    GatewayOptions options_;
    Transcript* transcript_;
};

}  // namespace inspire::llm
