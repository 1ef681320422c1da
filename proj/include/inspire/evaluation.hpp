#pragma once

#include "inspire/embedding.hpp"
#include "inspire/refinement.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace inspire::evaluation {

// Judged relation of a generated node to its super feature.
enum class Relationship { sub, sibling, parent, identical, other };
inline constexpr std::size_t kRelationshipCount = 5;
std::string_view to_string(Relationship r);
Relationship relationship_from_string(std::string_view s);

enum class Metric { relevance, clarity, feasibility, traceability };
std::string_view to_string(Metric m);
Metric metric_from_string(std::string_view s);

// A relevance score of at least this makes a feature "relevant".
inline constexpr int kRelevantThreshold = 4;

// Rubric scores are integers 1..5. Feasibility applies to llm nodes only,
// traceability to appstore nodes only.
struct Scores {
    Relationship relationship = Relationship::sub;
    int relevance = 0;
    int clarity = 0;
    std::optional<int> feasibility;
    std::optional<int> traceability;
    std::string note;  // free text, e.g. what "other" means here

    std::optional<int> get(Metric m) const;
};

struct NodeAssessment {
    std::string tree_id;
    std::string node_id;
    std::string rater_id;
    Scores scores;
};

struct ConsensusAssessment {
    std::string tree_id;
    std::string node_id;
    Scores scores;
    std::vector<std::string> raters;
};

io::json to_json(const NodeAssessment& a);
io::json to_json(const ConsensusAssessment& c);
NodeAssessment assessment_from_json(const io::json& j);
ConsensusAssessment consensus_from_json(const io::json& j);

// Throws Error(validation / not_found) when the node is unknown or the root,
// a score is out of range, or a metric does not apply to the node's
// provenance.
void validate_scores(const Scores& scores, const refinement::FeatureTree& tree, const std::string& node_id);

// Per-node majority (strictly more than half) over all metrics; nullopt when
// some metric has no majority and must be settled explicitly.
std::optional<ConsensusAssessment> majority_consensus(std::span<const NodeAssessment> ratings);

// Assessment store, line-delimited JSON keyed by (tree, node, rater).
// Writes are serialized; every mutation rewrites the file atomically.
class AssessmentStore {
public:
    AssessmentStore() = default;
    explicit AssessmentStore(std::filesystem::path path);
    AssessmentStore(AssessmentStore&& other) noexcept;

    std::string record(const NodeAssessment& a, const refinement::FeatureTree& tree);
    std::string record_consensus(const ConsensusAssessment& c, const refinement::FeatureTree& tree);

    std::vector<NodeAssessment> ratings() const;
    std::vector<ConsensusAssessment> consensus() const;
    bool empty() const;

    std::string serialize() const;
    static AssessmentStore load(const std::filesystem::path& path);

private:
    void persist_locked() const;

    std::optional<std::filesystem::path> path_;
    mutable std::mutex mutex_;
    std::map<std::tuple<std::string, std::string, std::string>, NodeAssessment> ratings_;
    std::map<std::pair<std::string, std::string>, ConsensusAssessment> consensus_;
};

// Consensus lookup: (tree_id, node_id) -> assessment.
using ConsensusMap = std::map<std::pair<std::string, std::string>, ConsensusAssessment>;
ConsensusMap index_consensus(std::span<const ConsensusAssessment> all);

struct LevelScore {
    int level = 1;
    double value = 0.0;
};

struct LevelAverages {
    std::optional<double> l1;
    std::optional<double> l2;
    std::optional<double> avg;  // node-count weighted over both levels
    std::size_t l1_count = 0;
    std::size_t l2_count = 0;
    std::size_t excluded = 0;  // nodes without a score for the metric
};

LevelAverages weighted_average(std::span<const LevelScore> scores);

LevelAverages level_weighted_average(std::span<const refinement::FeatureTree> trees, Metric metric,
                                     const ConsensusMap& consensus);

enum class LevelFilter { all, l1, l2 };

struct RelationshipCounts {
    std::array<std::size_t, kRelationshipCount> counts{};
    std::size_t total = 0;
    std::size_t unassessed = 0;

    std::size_t operator[](Relationship r) const { return counts[static_cast<std::size_t>(r)]; }
};

RelationshipCounts relationship_histogram(std::span<const refinement::FeatureTree> trees,
                                          const ConsensusMap& consensus, LevelFilter filter = LevelFilter::all);

// Duplicate predicate: trimmed, case-folded name equality, widened by
// explicit merge groups of names judged to be the same feature.
class DuplicateMatcher {
public:
    DuplicateMatcher() = default;
    explicit DuplicateMatcher(std::vector<std::vector<std::string>> merge_groups);

    std::string key(const std::string& name) const;
    bool same(const std::string& a, const std::string& b) const { return key(a) == key(b); }

private:
    std::map<std::string, std::string> canonical_;
};

struct FeatureClass {
    std::string key;
    std::vector<std::string> node_ids;
    std::string name;                   // first member's name
    std::optional<int> best_relevance;  // max consensus relevance of members
};

struct DistinctCounts {
    std::size_t distinct = 0;
    std::size_t distinct_relevant = 0;
    std::vector<FeatureClass> classes;  // in first-occurrence order

    std::vector<FeatureClass> relevant_classes() const;
};

DistinctCounts distinct_features(const refinement::FeatureTree& tree, const DuplicateMatcher& matcher,
                                 const ConsensusMap& consensus);

struct ComparisonResult {
    std::vector<std::pair<std::string, std::string>> common;  // (name in a, name in b)
    std::vector<std::string> only_a;
    std::vector<std::string> only_b;
};

ComparisonResult compare_classes(const std::vector<FeatureClass>& relevant_a,
                                 const std::vector<FeatureClass>& relevant_b);

ComparisonResult compare_trees(const refinement::FeatureTree& a, const refinement::FeatureTree& b,
                               const DuplicateMatcher& matcher, const ConsensusMap& consensus);

// Candidate duplicates by embedding similarity of "name: description".
// Suggestions only; nothing is merged.
struct DuplicateSuggestion {
    std::string node_a;
    std::string node_b;
    std::string name_a;
    std::string name_b;
    double similarity = 0.0;
};

std::vector<DuplicateSuggestion> suggest_duplicates(const refinement::FeatureTree& tree,
                                                    const vectorindex::EmbeddingProvider& embedder,
                                                    double threshold);

// Fraction of (node, metric) cells on which raters are not unanimous. Only
// nodes with at least two raters count; nullopt when there are none.
std::optional<double> disagreement_rate(std::span<const NodeAssessment> ratings);

// Report tables over groups of trees (column = group label x approach).
struct ReportOptions {
    std::set<int> tables = {3, 4, 5};
    DuplicateMatcher matcher;
};

struct Report {
    io::json data;
    std::string text;
};

// Throws Error(validation) when there is nothing assessed to report on.
Report build_report(std::span<const refinement::FeatureTree> trees, std::span<const ConsensusAssessment> consensus,
                    std::span<const NodeAssessment> ratings, const ReportOptions& options);

}  // namespace inspire::evaluation
