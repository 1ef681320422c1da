#include "inspire/gateway.hpp"
#include "inspire/text.hpp"

namespace inspire::llm {

namespace {

constexpr std::size_t kMaxArrayCandidates = 256;

// End (exclusive) of the bracket group opening at text[open], honouring JSON
// string literals; npos when unbalanced.
std::size_t matching_bracket(const std::string& text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '[') ++depth;
        else if (c == ']' && --depth == 0) return i + 1;
    }
    return std::string::npos;
}

std::optional<io::json> first_array(const std::string& text) {
    std::size_t pos = 0;
    for (std::size_t tries = 0; tries < kMaxArrayCandidates; ++tries) {
        pos = text.find('[', pos);
        if (pos == std::string::npos) return std::nullopt;
        const auto end = matching_bracket(text, pos);
        if (end == std::string::npos) return std::nullopt;
        auto j = io::json::parse(text.begin() + static_cast<std::ptrdiff_t>(pos),
                                 text.begin() + static_cast<std::ptrdiff_t>(end), nullptr, false);
        if (!j.is_discarded() && j.is_array()) return j;
        ++pos;
    }
    return std::nullopt;
}

std::string scalar_text(const io::json& v) {
    return v.is_string() ? v.get<std::string>() : io::dump(v);
}

std::string reask_suffix(std::optional<std::size_t> expected_n, std::optional<std::size_t> got) {
    std::string s = "\n\n";
    if (!got) {
        s += "Your previous answer did not contain a JSON list. ";
        s += "The output should be a list of JSON formatted objects.";
    } else {
        s += "Your previous answer contained " + std::to_string(*got) + " sub-features. ";
        s += "Ensure that the number of sub-features is " + std::to_string(*expected_n) + ".";
    }
    return s;
}

}  // namespace

ParsedFeatureList parse_feature_list(const std::string& raw, std::optional<std::size_t> expected_n) {
    const auto array = first_array(raw);
    if (!array) throw ParseError("no JSON array found in model output", raw);

    ParsedFeatureList out;
    std::size_t index = 0;
    for (const auto& item : *array) {
        const auto where = "item " + std::to_string(index++);
        if (!item.is_object()) {
            out.warnings.push_back(where + ": not a JSON object, skipped");
            continue;
        }
        const auto name_it = item.find("sub-feature");
        std::string name = name_it == item.end() || name_it->is_null() ? "" : text::trim(scalar_text(*name_it));
        if (name.empty()) {
            out.warnings.push_back(where + ": missing \"sub-feature\" name, skipped");
            continue;
        }
        SubFeature sf;
        sf.name = std::move(name);
        if (const auto d = item.find("description"); d != item.end() && !d->is_null()) {
            sf.description = scalar_text(*d);
        }
        if (sf.description.empty()) out.warnings.push_back(where + " (" + sf.name + "): empty description");
        if (const auto s = item.find("source-app-id"); s != item.end() && !s->is_null()) {
            sf.source_app_id = scalar_text(*s);
        }
        out.items.push_back(std::move(sf));
    }
    if (expected_n && out.items.size() != *expected_n) {
        out.warnings.push_back("expected " + std::to_string(*expected_n) + " sub-features, got " +
                               std::to_string(out.items.size()));
    }
    return out;
}

Gateway::Gateway(ChatProvider& provider, GatewayOptions options, Transcript* transcript)
    : provider_(provider), options_(std::move(options)), transcript_(transcript) {}

ChatExchange Gateway::complete(const std::string& system, const std::string& user) {
    auto exchange = complete_with_retry(provider_, {system, user, options_.sampling}, options_.retry, options_.sleep);
    if (transcript_) transcript_->append(exchange);
    return exchange;
}

FeatureListResult Gateway::request_features(const std::string& system, const std::string& user,
                                            std::optional<std::size_t> expected_n) {
    FeatureListResult result;
    auto first = complete(system, user);
    result.exchange_ids.push_back(first.exchange_id);

    std::optional<ParsedFeatureList> parsed;
    std::optional<ParseError> first_error;
    try {
        parsed = parse_feature_list(first.response, expected_n);
    } catch (const ParseError& e) {
        first_error = e;
    }
    const bool count_ok = parsed && (!expected_n || parsed->items.size() == *expected_n);
    if (!count_ok) {
        const auto got = parsed ? std::optional<std::size_t>(parsed->items.size()) : std::nullopt;
        auto second = complete(system, user + reask_suffix(expected_n, got));
        result.exchange_ids.push_back(second.exchange_id);
        try {
            auto retried = parse_feature_list(second.response, expected_n);
            retried.warnings.insert(retried.warnings.begin(), "re-asked once after a malformed answer");
            parsed = std::move(retried);
        } catch (const ParseError&) {
            if (!parsed) throw *first_error;
            parsed->warnings.push_back("re-ask did not return a JSON list; kept the first answer");
        }
    }
    result.items = std::move(parsed->items);
    result.warnings = std::move(parsed->warnings);
    return result;
}

}  // namespace inspire::llm
