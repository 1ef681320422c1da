#include "inspire/chat.hpp"
#include "inspire/error.hpp"
#include "inspire/text.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <set>
#include <thread>

namespace inspire::llm {

namespace {

io::json sampling_json(const SamplingParams& s) {
    return {{"temperature", s.temperature}, {"top_p", s.top_p}, {"max_tokens", s.max_tokens}, {"seed", s.seed}};
}

SamplingParams sampling_from_json(const io::json& j) {
    SamplingParams s;
    if (!j.is_object()) return s;
    s.temperature = j.value("temperature", s.temperature);
    s.top_p = j.value("top_p", s.top_p);
    s.max_tokens = j.value("max_tokens", s.max_tokens);
    s.seed = j.value("seed", s.seed);
    return s;
}

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

}  // namespace

std::string exchange_id(const ChatRequest& request) {
    auto h = text::fnv1a(request.system);
    h = text::fnv1a("\x1f", h);
    h = text::fnv1a(request.user, h);
    h = text::fnv1a("\x1f", h);
    h = text::fnv1a(io::dump(sampling_json(request.sampling)), h);
    return text::hex64(h);
}

io::json to_json(const ChatExchange& e) {
    return {
        {"exchange_id", e.exchange_id}, {"provider", e.provider},     {"system", e.system},
        {"user", e.user},               {"response", e.response},     {"sampling", sampling_json(e.sampling)},
        {"latency_ms", e.latency_ms},   {"retries", e.retries},
    };
}

ChatExchange exchange_from_json(const io::json& j) {
    if (!j.is_object() || !j.contains("user") || !j.contains("response")) {
        throw Error(ErrorCode::validation, "transcript entry needs 'user' and 'response'");
    }
    ChatExchange e;
    e.system = j.value("system", "");
    e.user = j.at("user").get<std::string>();
    e.response = j.at("response").get<std::string>();
    e.provider = j.value("provider", "");
    e.sampling = sampling_from_json(j.value("sampling", io::json::object()));
    e.latency_ms = j.value("latency_ms", 0.0);
    e.retries = j.value("retries", 0);
    e.exchange_id = j.value("exchange_id", exchange_id({e.system, e.user, e.sampling}));
    return e;
}

ChatExchange complete_with_retry(ChatProvider& provider, const ChatRequest& request, const RetryPolicy& policy,
                                 const Sleeper& sleep) {
    if (policy.max_attempts < 1) throw Error(ErrorCode::validation, "retry policy needs at least one attempt");
    auto backoff = policy.initial_backoff;
    std::string last_cause;
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
        if (attempt > 0) {
            if (sleep) sleep(backoff);
            else std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(static_cast<long long>(backoff.count() * policy.multiplier));
        }
        const auto started = std::chrono::steady_clock::now();
        try {
            auto response = provider.complete(request);
            const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
            return {exchange_id(request), request.system, request.user, std::move(response),
                    provider.id(),        request.sampling, elapsed.count(), attempt};
        } catch (const std::exception& e) {
            last_cause = e.what();
        }
    }
    throw Error(ErrorCode::provider_failure, "provider " + provider.id() + " failed after " +
                                                 std::to_string(policy.max_attempts) + " attempts: " + last_cause);
}

std::vector<ChatExchange> Transcript::load(const std::filesystem::path& path) {
    const auto content = io::read_file(path);
    auto lines = io::parse_json_lines(content);
    for (const auto& err : lines.errors) {
        const bool last_line = lines.line_numbers.empty() || err.line > lines.line_numbers.back();
        const bool unterminated = !content.empty() && content.back() != '\n';
        if (!(last_line && unterminated)) {
            throw Error(ErrorCode::validation,
                        "transcript line " + std::to_string(err.line) + ": " + err.message);
        }
    }
    std::vector<ChatExchange> out;
    for (const auto& obj : lines.objects) out.push_back(exchange_from_json(obj));
    return out;
}

ReplayProvider::ReplayProvider(const std::vector<ChatExchange>& exchanges) {
    for (const auto& e : exchanges) entries_[{e.system, e.user}].responses.push_back(e.response);
}

std::unique_ptr<ReplayProvider> ReplayProvider::from_file(const std::filesystem::path& path) {
    return std::make_unique<ReplayProvider>(Transcript::load(path));
}

std::string ReplayProvider::complete(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find({request.system, request.user});
    if (it == entries_.end()) {
        throw Error(ErrorCode::provider_failure,
                    "no recorded exchange for request " + exchange_id(request));
    }
    auto& entry = it->second;
    const auto& response = entry.responses[entry.cursor];
    if (entry.cursor + 1 < entry.responses.size()) ++entry.cursor;
    return response;
}

std::optional<HttpProviderConfig> HttpProviderConfig::from_env() {
    HttpProviderConfig c;
    c.url = env_or_empty("INSPIRE_PROVIDER_URL");
    if (c.url.empty()) return std::nullopt;
    c.api_key = env_or_empty("INSPIRE_PROVIDER_KEY");
    if (auto model = env_or_empty("INSPIRE_PROVIDER_MODEL"); !model.empty()) c.model = model;
    return c;
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::validation, "provider URL must include a scheme: " + config_.url);
    }
    const auto path_start = config_.url.find('/', scheme_end + 3);
    origin_ = config_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : config_.url.substr(path_start);
}

std::string HttpChatProvider::complete(const ChatRequest& request) {
    httplib::Client client(origin_);
    if (!client.is_valid()) throw Error(ErrorCode::provider_failure, "unsupported provider URL " + config_.url);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    io::json body = {
        {"model", config_.model},
        {"messages", {{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", request.user}}}},
        {"temperature", request.sampling.temperature},
        {"top_p", request.sampling.top_p},
        {"max_tokens", request.sampling.max_tokens},
        {"seed", request.sampling.seed},
    };
    auto res = client.Post(path_, headers, io::dump(body), "application/json");
    if (!res) {
        throw Error(ErrorCode::provider_failure, "provider request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(ErrorCode::provider_failure,
                    "provider returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512));
    }
    auto j = io::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::provider_failure, "provider returned non-JSON body");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const io::json::exception&) {
        throw Error(ErrorCode::provider_failure, "provider response has no choices[0].message.content");
    }
}

namespace {

constexpr std::string_view kAspects[] = {
    "Setup",   "Tracking", "Insights", "Sharing", "Reminders",
    "Personalization", "History", "Alerts", "Sync", "Reports",
};

std::string between(const std::string& s, std::string_view open, std::string_view close, std::size_t from = 0) {
    const auto b = s.find(open, from);
    if (b == std::string::npos) return {};
    const auto start = b + open.size();
    const auto e = s.find(close, start);
    return s.substr(start, e == std::string::npos ? std::string::npos : e - start);
}

std::size_t number_after(const std::string& s, std::string_view marker, std::size_t fallback) {
    const auto pos = s.rfind(marker);
    if (pos == std::string::npos) return fallback;
    std::size_t n = 0;
    bool any = false;
    for (auto i = pos + marker.size(); i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) {
        n = n * 10 + static_cast<std::size_t>(s[i] - '0');
        any = true;
    }
    return any ? n : fallback;
}

std::string target_feature_name(const std::string& user) {
    const std::string marker = "**Feature**\n\n```\n";
    const auto pos = user.rfind(marker);
    if (pos == std::string::npos) return "Feature";
    const auto line = between(user, marker, "\n", pos);
    const auto colon = line.find(": ");
    return text::trim(line.substr(0, colon));
}

std::string title_words(const std::string& sentence, std::size_t count) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : sentence) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
        if (words.size() == count) break;
    }
    if (!cur.empty() && words.size() < count) words.push_back(cur);
    for (auto& w : words) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return text::join(words, " ");
}

std::string synthesize_extraction(const std::string& user) {
    const auto description = between(user, "**App description**\n\n```\n", "\n```\n\nFrom the app description");
    io::json out = io::json::array();
    std::string sentence;
    auto flush = [&] {
        auto s = text::trim(sentence);
        sentence.clear();
        if (out.size() >= 3 || text::tokenize(s).size() < 4) return;
        out.push_back({{"sub-feature", title_words(s, 3)}, {"description", s}});
    };
    for (char c : description) {
        sentence.push_back(c);
        if (c == '.' || c == '!' || c == '?' || c == '\n') flush();
    }
    flush();
    return io::dump(out, 2);
}

std::string synthesize_selection(const std::string& user) {
    const auto payload = between(user, "```json\n", "\n```\n\nGiven the JSON lists");
    const auto n = number_after(user, "You should only keep ", 5);
    auto lists = io::json::parse(payload, nullptr, false);
    io::json out = io::json::array();
    if (lists.is_discarded() || !lists.is_array()) return io::dump(out);
    if (!lists.empty() && !lists.front().is_array()) lists = io::json::array({lists});

    std::set<std::string> seen;
    bool progressed = true;
    for (std::size_t round = 0; progressed && out.size() < n; ++round) {
        progressed = false;
        for (const auto& list : lists) {
            if (!list.is_array() || round >= list.size() || out.size() >= n) continue;
            progressed = true;
            const auto& item = list[round];
            if (!item.is_object() || !item.contains("sub-feature") || !item["sub-feature"].is_string()) continue;
            if (!seen.insert(text::ascii_lower(item["sub-feature"].get<std::string>())).second) continue;
            out.push_back(item);
        }
    }
    return io::dump(out, 2);
}

std::string synthesize_refinement(const std::string& user) {
    const auto n = number_after(user, "Ensure that the number of sub-features is ", 5);
    const auto name = target_feature_name(user);
    io::json out = io::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const auto aspect = std::string(kAspects[i % std::size(kAspects)]);
        auto sub = name + " " + aspect;
        if (i >= std::size(kAspects)) sub += " " + std::to_string(i / std::size(kAspects) + 1);
        out.push_back({{"sub-feature", sub},
                       {"description", aspect + " capability supporting " + name + "."}});
    }
    return "```json\n" + io::dump(out, 2) + "\n```";
}

}  // namespace

std::string SyntheticProvider::complete(const ChatRequest& request) {
    const auto& user = request.user;
    if (user.find("**App description**") != std::string::npos) return synthesize_extraction(user);
    if (user.rfind("```json\n", 0) == 0) return synthesize_selection(user);
    return synthesize_refinement(user);
}

}  // namespace inspire::llm
