#include "inspire/corpus.hpp"
#include "inspire/error.hpp"
#include "inspire/text.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace inspire::corpus {

namespace {

std::string optional_string(const io::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw Error(ErrorCode::validation, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> string_list(const io::json& j) {
    std::vector<std::string> out;
    if (!j.is_array()) return out;
    for (const auto& v : j) {
        if (v.is_string()) out.push_back(v.get<std::string>());
    }
    return out;
}

struct StopwordSet {
    const char* lang;
    std::unordered_set<std::string> words;
};

const std::vector<StopwordSet>& stopwords() {
    static const std::vector<StopwordSet> sets = {
        {"en", {"the", "and", "to", "of", "with", "for", "your", "you", "is", "in", "on", "it",
                "this", "that", "are", "be", "can", "from", "our", "all", "an", "or", "by", "app"}},
        {"de", {"und", "der", "die", "das", "mit", "für", "ist", "nicht", "sie", "ein", "eine",
                "auf", "zu", "den", "ihre", "ihr", "dem", "wird", "oder"}},
        {"fr", {"le", "la", "les", "et", "des", "une", "pour", "avec", "est", "vous", "dans",
                "du", "sur", "votre", "vos", "au", "aux", "qui"}},
        {"es", {"el", "los", "las", "y", "para", "con", "es", "por", "del", "tu", "su", "que",
                "una", "al", "lo", "más"}},
        {"pt", {"o", "os", "com", "não", "você", "seu", "sua", "do", "da", "dos", "das", "em",
                "um", "uma", "ao"}},
    };
    return sets;
}

}  // namespace

io::json to_json(const AppRecord& record) {
    io::json j = {
        {"app_id", record.app_id},
        {"title", record.title},
        {"description", record.description},
        {"category", record.category},
        {"collected_at", record.collected_at},
    };
    if (record.language) j["language"] = *record.language;
    return j;
}

AppRecord record_from_json(const io::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::validation, "record must be a JSON object");
    AppRecord r;
    r.app_id = optional_string(j, "app_id");
    if (r.app_id.empty()) throw Error(ErrorCode::validation, "field 'app_id' is required");
    const auto desc = j.find("description");
    if (desc == j.end() || !desc->is_string()) {
        throw Error(ErrorCode::validation, "field 'description' is required");
    }
    r.description = desc->get<std::string>();
    r.title = optional_string(j, "title");
    r.category = optional_string(j, "category");
    r.collected_at = optional_string(j, "collected_at");
    auto lang = optional_string(j, "language");
    if (!lang.empty()) r.language = std::move(lang);
    return r;
}

FileGraphSource::FileGraphSource(const io::json& graph) {
    if (const auto it = graph.find("search"); it != graph.end() && it->is_object()) {
        for (const auto& [word, ids] : it->items()) search_[word] = string_list(ids);
    }
    if (const auto it = graph.find("neighbors"); it != graph.end() && it->is_object()) {
        for (const auto& [id, ids] : it->items()) neighbors_[id] = string_list(ids);
    }
    if (const auto it = graph.find("fail"); it != graph.end()) {
        for (auto& id : string_list(*it)) failing_.insert(std::move(id));
    }
}

FileGraphSource FileGraphSource::load(const std::filesystem::path& path) {
    auto j = io::json::parse(io::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::validation, "graph file " + path.string() + " is not a JSON object");
    }
    return FileGraphSource(j);
}

std::vector<std::string> FileGraphSource::search(const std::string& word) {
    if (failing_.count(word)) throw Error(ErrorCode::provider_failure, "search failed for '" + word + "'");
    const auto it = search_.find(word);
    if (it == search_.end()) return {};
    auto ids = it->second;
    if (ids.size() > kMaxSearchResults) ids.resize(kMaxSearchResults);
    return ids;
}

std::vector<std::string> FileGraphSource::neighbors(const std::string& app_id) {
    if (failing_.count(app_id)) throw Error(ErrorCode::provider_failure, "neighbors failed for '" + app_id + "'");
    const auto it = neighbors_.find(app_id);
    return it == neighbors_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> crawl_plan(AppGraphSource& source, const std::vector<std::string>& seed_words,
                                    std::size_t max_apps, const CrawlLogger& log) {
    if (seed_words.empty()) throw Error(ErrorCode::validation, "crawl needs at least one seed word");
    if (max_apps < 1) throw Error(ErrorCode::validation, "max_apps must be at least 1");

    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    auto discover = [&](const std::string& id) {
        if (order.size() >= max_apps || !seen.insert(id).second) return;
        order.push_back(id);
    };

    for (const auto& word : seed_words) {
        if (order.size() >= max_apps) break;
        try {
            for (const auto& id : source.search(word)) discover(id);
        } catch (const std::exception& e) {
            if (log) log("search '" + word + "' skipped: " + e.what());
        }
    }

    // order doubles as the FIFO queue: everything before `next` is expanded.
    for (std::size_t next = 0; next < order.size() && order.size() < max_apps; ++next) {
        const auto id = order[next];
        try {
            for (const auto& n : source.neighbors(id)) discover(n);
        } catch (const std::exception& e) {
            if (log) log("neighbors of '" + id + "' skipped: " + e.what());
        }
    }
    return order;
}

std::string MarkerLanguageDetector::detect(std::string_view text) const {
    const auto marker = text.find("[lang:");
    if (marker != std::string_view::npos) {
        const auto close = text.find(']', marker);
        if (close != std::string_view::npos) {
            return text::ascii_lower(text.substr(marker + 6, close - marker - 6));
        }
    }
    const auto& sets = stopwords();
    std::vector<std::size_t> hits(sets.size(), 0);
    for (const auto& tok : text::tokenize(text)) {
        for (std::size_t i = 0; i < sets.size(); ++i) {
            if (sets[i].words.count(tok)) ++hits[i];
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < sets.size(); ++i) {
        if (hits[i] > hits[best]) best = i;
    }
    return hits[best] == 0 ? "und" : sets[best].lang;
}

std::string_view to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::game: return "game";
        case RejectReason::non_english: return "non_english";
        case RejectReason::too_short: return "too_short";
    }
    return "unknown";
}

std::set<std::string> FilterConfig::default_game_categories() {
    return {"GAME",           "GAME_ACTION",    "GAME_ADVENTURE", "GAME_ARCADE",
            "GAME_BOARD",     "GAME_CARD",      "GAME_CASINO",    "GAME_CASUAL",
            "GAME_EDUCATIONAL", "GAME_MUSIC",   "GAME_PUZZLE",    "GAME_RACING",
            "GAME_ROLE_PLAYING", "GAME_SIMULATION", "GAME_SPORTS", "GAME_STRATEGY",
            "GAME_TRIVIA",    "GAME_WORD"};
}

FilterDecision filter_record(const AppRecord& record, const LanguageDetector& detector,
                             const FilterConfig& config) {
    FilterDecision d;
    if (config.game_categories.count(record.category)) {
        d.keep = false;
        d.reason = RejectReason::game;
        return d;
    }
    std::string lang;
    if (record.language) {
        lang = *record.language;
    } else {
        try {
            lang = detector.detect(record.description);
        } catch (const std::exception& e) {
            d.keep = false;
            d.reason = RejectReason::non_english;
            d.note = std::string("language detection failed: ") + e.what();
            return d;
        }
    }
    d.language = lang;
    const auto primary = text::ascii_lower(lang.substr(0, lang.find('-')));
    if (primary != "en") {
        d.keep = false;
        d.reason = RejectReason::non_english;
        return d;
    }
    if (text::char_count(record.description) < kMinDescriptionChars) {
        d.keep = false;
        d.reason = RejectReason::too_short;
    }
    return d;
}

io::json to_json(const FilterReport& r) {
    return {
        {"examined", r.examined},
        {"kept", r.kept},
        {"rejected", {{"game", r.game}, {"non_english", r.non_english}, {"too_short", r.too_short}}},
        {"malformed", r.malformed},
        {"diagnostics", r.diagnostics},
    };
}

Corpus::Corpus(const Corpus& other) {
    std::shared_lock lock(other.mutex_);
    records_ = other.records_;
}

Corpus& Corpus::operator=(const Corpus& other) {
    if (this != &other) {
        std::map<std::string, AppRecord> copy;
        {
            std::shared_lock lock(other.mutex_);
            copy = other.records_;
        }
        std::unique_lock lock(mutex_);
        records_ = std::move(copy);
    }
    return *this;
}

FilterReport Corpus::ingest(const std::vector<AppRecord>& records, const LanguageDetector& detector,
                            const FilterConfig& config) {
    // Last occurrence of an id wins; position is that of its first occurrence.
    std::vector<const AppRecord*> unique;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& r : records) {
        const auto [it, inserted] = slot.try_emplace(r.app_id, unique.size());
        if (inserted) unique.push_back(&r);
        else unique[it->second] = &r;
    }

    FilterReport report;
    std::unique_lock lock(mutex_);
    for (const auto* r : unique) {
        ++report.examined;
        const auto d = filter_record(*r, detector, config);
        if (!d.note.empty()) report.diagnostics.push_back(r->app_id + ": " + d.note);
        if (d.keep) {
            ++report.kept;
            auto stored = *r;
            if (!stored.language) stored.language = d.language;
            records_[stored.app_id] = std::move(stored);
            continue;
        }
        records_.erase(r->app_id);
        switch (*d.reason) {
            case RejectReason::game: ++report.game; break;
            case RejectReason::non_english: ++report.non_english; break;
            case RejectReason::too_short: ++report.too_short; break;
        }
    }
    return report;
}

FilterReport Corpus::ingest_lines(std::string_view content, const LanguageDetector& detector,
                                  const FilterConfig& config) {
    auto lines = io::parse_json_lines(content);
    std::vector<AppRecord> records;
    std::vector<std::string> diagnostics;
    for (const auto& e : lines.errors) {
        diagnostics.push_back("line " + std::to_string(e.line) + ": " + e.message);
    }
    std::size_t malformed = lines.errors.size();
    for (std::size_t i = 0; i < lines.objects.size(); ++i) {
        const auto& obj = lines.objects[i];
        if (obj.contains("format")) continue;  // persisted-corpus header
        try {
            records.push_back(record_from_json(obj));
        } catch (const Error& e) {
            ++malformed;
            diagnostics.push_back("line " + std::to_string(lines.line_numbers[i]) + ": " + e.what());
        }
    }
    auto report = ingest(records, detector, config);
    report.malformed = malformed;
    diagnostics.insert(diagnostics.end(), report.diagnostics.begin(), report.diagnostics.end());
    report.diagnostics = std::move(diagnostics);
    return report;
}

std::optional<AppRecord> Corpus::find(const std::string& app_id) const {
    std::shared_lock lock(mutex_);
    const auto it = records_.find(app_id);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

bool Corpus::contains(const std::string& app_id) const {
    std::shared_lock lock(mutex_);
    return records_.count(app_id) > 0;
}

std::size_t Corpus::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::vector<AppRecord> Corpus::records() const {
    std::shared_lock lock(mutex_);
    std::vector<AppRecord> out;
    out.reserve(records_.size());
    for (const auto& [_, r] : records_) out.push_back(r);
    return out;
}

std::string Corpus::serialize() const {
    std::string out = io::dump({{"format", "inspire.corpus"}, {"format_version", io::kFormatVersion}});
    out += '\n';
    std::shared_lock lock(mutex_);
    for (const auto& [_, r] : records_) {
        out += io::dump(to_json(r));
        out += '\n';
    }
    return out;
}

Corpus Corpus::deserialize(std::string_view content) {
    auto lines = io::parse_json_lines(content);
    if (!lines.errors.empty()) {
        throw Error(ErrorCode::validation,
                    "corpus line " + std::to_string(lines.errors.front().line) + ": " + lines.errors.front().message);
    }
    Corpus c;
    for (const auto& obj : lines.objects) {
        if (obj.contains("format")) {
            io::check_format_version(obj, "corpus");
            continue;
        }
        auto r = record_from_json(obj);
        c.records_[r.app_id] = std::move(r);
    }
    return c;
}

void Corpus::save(const std::filesystem::path& path) const { io::write_atomic(path, serialize()); }

Corpus Corpus::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return {};
    return deserialize(io::read_file(path));
}

io::json Corpus::stats() const {
    std::shared_lock lock(mutex_);
    std::map<std::string, std::size_t> categories;
    std::map<std::string, std::size_t> languages;
    std::size_t total_chars = 0;
    std::size_t min_chars = 0;
    std::size_t max_chars = 0;
    bool first = true;
    for (const auto& [_, r] : records_) {
        ++categories[r.category];
        ++languages[r.language.value_or("und")];
        const auto n = text::char_count(r.description);
        total_chars += n;
        min_chars = first ? n : std::min(min_chars, n);
        max_chars = std::max(max_chars, n);
        first = false;
    }
    return {
        {"apps", records_.size()},
        {"categories", categories},
        {"languages", languages},
        {"description_chars", {{"total", total_chars}, {"min", min_chars}, {"max", max_chars}}},
    };
}

}  // namespace inspire::corpus
