#include "support.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace testing_support {

namespace fs = std::filesystem;
using inspire::corpus::AppRecord;

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("inspire-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string ScriptedProvider::complete(const inspire::llm::ChatRequest& request) {
    const auto call = calls_++;
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
    }
    return handler_(request, call);
}

std::vector<inspire::llm::ChatRequest> ScriptedProvider::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::string feature_list(const std::vector<std::pair<std::string, std::string>>& items,
                         const std::vector<std::string>& source_ids) {
    json out = json::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        json o = {{"sub-feature", items[i].first}, {"description", items[i].second}};
        if (i < source_ids.size()) o["source-app-id"] = source_ids[i];
        out.push_back(o);
    }
    return out.dump(2);
}

std::optional<std::size_t> number_after(const std::string& text, const std::string& marker) {
    const auto pos = text.find(marker);
    if (pos == std::string::npos) return std::nullopt;
    std::size_t i = pos + marker.size();
    std::size_t v = 0;
    bool any = false;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
        v = v * 10 + static_cast<std::size_t>(text[i++] - '0');
        any = true;
    }
    return any ? std::optional<std::size_t>(v) : std::nullopt;
}

namespace {

std::string block_after(const std::string& text, const std::string& marker) {
    const auto start = text.find(marker);
    if (start == std::string::npos) return {};
    const auto body = start + marker.size();
    const auto end = text.find("\n```", body);
    return text.substr(body, end == std::string::npos ? std::string::npos : end - body);
}

}  // namespace

std::string CompliantMock::complete(const inspire::llm::ChatRequest& request) {
    const auto& user = request.user;
    // Selection first: a re-asked selection also carries the count sentence.
    if (const auto n = number_after(user, "You should only keep ")) {
        const auto lists = json::parse(block_after(user, "```json\n"), nullptr, false);
        std::vector<json> picked;
        std::set<std::string> seen;
        if (lists.is_array()) {
            for (const auto& list : lists) {
                for (const auto& item : list) {
                    if (picked.size() < *n && seen.insert(item.value("sub-feature", "")).second) picked.push_back(item);
                }
            }
        }
        json out = json::array();
        for (auto item : picked) {
            if (hallucinate_every_ && ++counter_ % hallucinate_every_ == 0) {
                item["source-app-id"] = "com.invented.app" + std::to_string(counter_.load());
                ++hallucinated_;
            }
            out.push_back(item);
        }
        return out.dump();
    }
    if (const auto n = number_after(user, "Ensure that the number of sub-features is ")) {
        // Name the items after the target so that every call yields distinct names.
        const auto target_block = user.rfind("**Feature**\n\n```\n");
        auto target = block_after(user.substr(target_block), "**Feature**\n\n```\n");
        target = target.substr(0, target.find(':'));
        std::vector<std::pair<std::string, std::string>> items;
        for (std::size_t i = 0; i < *n; ++i) {
            items.emplace_back(target + " / part " + std::to_string(i + 1), "Part " + std::to_string(i + 1) + " of " + target);
        }
        return "Here you go:\n```json\n" + feature_list(items) + "\n```\n";
    }
    // Extraction: two items quoting the description's first words.
    const auto description = block_after(user, "**App description**\n\n```\n");
    const auto words = description.substr(0, std::min<std::size_t>(40, description.size()));
    const auto target_block = user.rfind("**Feature**\n\n```\n");
    auto target = block_after(user.substr(target_block), "**Feature**\n\n```\n");
    target = target.substr(0, target.find(':'));
    // Carry a fingerprint of the description so names differ across apps.
    const auto tag = std::to_string(std::hash<std::string>{}(description) % 100000);
    return feature_list({{target + " from " + tag + " a", "Quoted: " + words},
                         {target + " from " + tag + " b", "Also quoted: " + words}},
                        {"com.model.guess"});
}

namespace {

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w = {
            "sleep",    "tracking", "alarm",     "travel",   "flight",   "hotel",     "budget",   "expense",
            "photo",    "editor",   "filter",    "music",    "playlist", "podcast",   "workout",  "running",
            "steps",    "calorie",  "recipe",    "grocery",  "shopping", "delivery",  "weather",  "forecast",
            "calendar", "reminder", "notes",     "document", "scanner",  "translate", "language", "learning",
            "quiz",     "flashcard", "meditation", "breathing", "habit",  "journal",   "mood",     "therapy",
            "chat",     "message",  "video",     "call",     "group",    "share",     "friends",  "family",
            "map",      "route",    "traffic",   "parking",  "taxi",     "bike",      "bank",     "payment",
            "wallet",   "invoice",  "crypto",    "stock",    "news",     "reader",    "book",     "library",
            "camera",   "scan",     "barcode",   "coupon",   "deal",     "sync",      "cloud",    "backup",
            "offline",  "privacy",  "security",  "password", "login",    "profile",   "report",   "chart",
            "statistics", "export", "import",    "widget",   "theme",    "dark",      "mode",     "voice",
            "assistant", "timer",   "focus",     "limit",    "screen",   "usage",     "parental", "control"};
        const std::vector<std::string> glue = {"the", "and", "with", "for", "your", "to", "of", "in", "a", "you"};
        w.insert(w.end(), glue.begin(), glue.end());
        return w;
    }();
    return words;
}

}  // namespace

std::string random_words(std::mt19937& rng, std::size_t min_chars, std::size_t max_chars) {
    const auto& vocab = vocabulary();
    std::uniform_int_distribution<std::size_t> len(min_chars, max_chars);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    const auto target = len(rng);
    std::string out;
    std::size_t since_period = 0;
    while (out.size() < target) {
        if (!out.empty()) out += (since_period > 8 && rng() % 4 == 0) ? ". " : " ";
        since_period = out.size() >= 2 && out[out.size() - 2] == '.' ? 0 : since_period + 1;
        out += vocab[pick(rng)];
    }
    if (out.size() > target) out.resize(target);
    if (!out.empty() && out.back() == ' ') out.back() = '.';
    return out;
}

std::vector<AppRecord> fixture_corpus(std::size_t count, std::uint32_t seed, std::size_t max_chars,
                                      std::size_t dup_every) {
    std::mt19937 rng(seed);
    std::vector<AppRecord> out;
    const std::vector<std::string> categories = {"HEALTH_AND_FITNESS", "TRAVEL_AND_LOCAL", "PRODUCTIVITY",
                                                 "FINANCE", "EDUCATION", "SOCIAL", "TOOLS"};
    for (std::size_t i = 0; i < count; ++i) {
        AppRecord r;
        char id[48];
        std::snprintf(id, sizeof id, "com.fixture.app%04zu", i);
        r.app_id = id;
        r.title = "Fixture App " + std::to_string(i);
        if (dup_every && i > 0 && i % dup_every == 0) r.description = out[i / 2].description;
        else r.description = random_words(rng, 200, max_chars);
        r.category = categories[i % categories.size()];
        r.language = "en";
        r.collected_at = "2024-03-01T00:00:00Z";
        out.push_back(std::move(r));
    }
    return out;
}

std::string to_jsonl(const std::vector<AppRecord>& records) {
    std::string out;
    for (const auto& r : records) out += inspire::corpus::to_json(r).dump() + "\n";
    return out;
}

std::vector<inspire::vectorindex::QueryHit> brute_force_query(
    const std::vector<AppRecord>& records, const std::string& query, std::size_t k,
    const inspire::vectorindex::EmbeddingProvider& embedder, const inspire::vectorindex::IndexConfig& config) {
    const auto q = embedder.embed(query).values;
    std::map<std::string, inspire::vectorindex::QueryHit> best;
    for (const auto& r : records) {
        const auto chunks = inspire::vectorindex::chunk_description(r.description, config, r.app_id);
        for (const auto& c : chunks) {
            const auto v = embedder.embed(c.text).values;
            double s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<double>(v[i]) * static_cast<double>(q[i]);
            auto [it, inserted] = best.try_emplace(r.app_id, inspire::vectorindex::QueryHit{r.app_id, s, c.chunk_index});
            if (!inserted && s > it->second.score) it->second = {r.app_id, s, c.chunk_index};
        }
    }
    std::vector<inspire::vectorindex::QueryHit> all;
    for (auto& [_, h] : best) all.push_back(h);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.app_id < b.app_id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

}  // namespace testing_support
