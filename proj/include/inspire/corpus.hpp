#pragma once

#include "inspire/fileio.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace inspire::corpus {

// Descriptions shorter than this many characters are dropped.
inline constexpr std::size_t kMinDescriptionChars = 200;

struct AppRecord {
    std::string app_id;
    std::string title;
    std::string description;
    std::string category;
    std::optional<std::string> language;  // detected when absent
    std::string collected_at;             // ISO-8601

    friend bool operator==(const AppRecord&, const AppRecord&) = default;
};

io::json to_json(const AppRecord& record);
// Throws Error(validation) naming the offending key.
AppRecord record_from_json(const io::json& j);

// Crawl source: keyword search plus the similar-app / same-developer graph.
class AppGraphSource {
public:
    virtual ~AppGraphSource() = default;
    virtual std::vector<std::string> search(const std::string& word) = 0;
    virtual std::vector<std::string> neighbors(const std::string& app_id) = 0;
};

inline constexpr std::size_t kMaxSearchResults = 30;

// Fixture-backed source: {"search": {word: [ids]}, "neighbors": {id: [ids]},
// "fail": [ids or words]}. Search results are capped at 30 like the store.
class FileGraphSource : public AppGraphSource {
public:
    explicit FileGraphSource(const io::json& graph);
    static FileGraphSource load(const std::filesystem::path& path);

    std::vector<std::string> search(const std::string& word) override;
    std::vector<std::string> neighbors(const std::string& app_id) override;

private:
    std::map<std::string, std::vector<std::string>> search_;
    std::map<std::string, std::vector<std::string>> neighbors_;
    std::set<std::string> failing_;
};

using CrawlLogger = std::function<void(const std::string&)>;

// Dictionary-seeded search followed by breadth-first expansion. Ids come back
// in discovery order, each once, at most max_apps of them.
std::vector<std::string> crawl_plan(AppGraphSource& source,
                                    const std::vector<std::string>& seed_words,
                                    std::size_t max_apps,
                                    const CrawlLogger& log = {});

class LanguageDetector {
public:
    virtual ~LanguageDetector() = default;
    // Returns a BCP-47 style tag ("en", "de", "und"). May throw.
    virtual std::string detect(std::string_view text) const = 0;
};

// Deterministic stopword-vote detector. An explicit "[lang:xx]" marker wins;
// otherwise the language with the most stopword hits, "und" when none hit.
class MarkerLanguageDetector : public LanguageDetector {
public:
    std::string detect(std::string_view text) const override;
};

enum class RejectReason { game, non_english, too_short };
std::string_view to_string(RejectReason reason);

struct FilterDecision {
    bool keep = true;
    std::optional<RejectReason> reason;
    std::string language;  // tag used for the language check
    std::string note;      // set when the detector failed
};

struct FilterConfig {
    std::set<std::string> game_categories = default_game_categories();
    static std::set<std::string> default_game_categories();
};

// First hit wins: game, then language, then length.
FilterDecision filter_record(const AppRecord& record, const LanguageDetector& detector,
                             const FilterConfig& config = {});

struct FilterReport {
    std::size_t examined = 0;
    std::size_t kept = 0;
    std::size_t game = 0;
    std::size_t non_english = 0;
    std::size_t too_short = 0;
    std::size_t malformed = 0;  // lines that never became records
    std::vector<std::string> diagnostics;

    std::size_t rejected() const { return game + non_english + too_short; }
};

io::json to_json(const FilterReport& report);

// Filtered app-description store. Concurrent readers, exclusive writer.
class Corpus {
public:
    Corpus() = default;
    Corpus(const Corpus& other);
    Corpus& operator=(const Corpus& other);

    // Ingests a stream of records (already deduplicated by the caller or not:
    // a repeated app_id replaces the prior record and is examined once).
    FilterReport ingest(const std::vector<AppRecord>& records, const LanguageDetector& detector,
                        const FilterConfig& config = {});

    // Parses line-delimited JSON records, then ingests them.
    FilterReport ingest_lines(std::string_view content, const LanguageDetector& detector,
                              const FilterConfig& config = {});

    std::optional<AppRecord> find(const std::string& app_id) const;
    bool contains(const std::string& app_id) const;
    std::size_t size() const;
    std::vector<AppRecord> records() const;  // sorted by app_id

    std::string serialize() const;
    static Corpus deserialize(std::string_view content);
    void save(const std::filesystem::path& path) const;
    static Corpus load(const std::filesystem::path& path);

    io::json stats() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, AppRecord> records_;
};

}  // namespace inspire::corpus
