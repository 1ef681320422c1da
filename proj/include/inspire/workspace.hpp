#pragma once

#include "inspire/corpus.hpp"
#include "inspire/evaluation.hpp"
#include "inspire/refinement.hpp"
#include "inspire/vectorindex.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace inspire::service {

// On-disk layout of a workspace root.
struct WorkspaceLayout {
    std::filesystem::path root;

    std::filesystem::path config() const { return root / "config.json"; }
    std::filesystem::path corpus() const { return root / "corpus" / "apps.jsonl"; }
    std::filesystem::path index() const { return root / "index" / "index.bin"; }
    std::filesystem::path trees() const { return root / "trees"; }
    std::filesystem::path tree(const std::string& id) const { return trees() / (id + ".json"); }
    std::filesystem::path assessments() const { return root / "assessments" / "assessments.jsonl"; }
    std::filesystem::path transcript() const { return root / "transcripts" / "exchanges.jsonl"; }
};

struct WorkspaceConfig {
    vectorindex::IndexConfig index;
    refinement::RefinementConfig refinement;
    std::vector<std::vector<std::string>> merge_groups;
    double duplicate_threshold = 0.8;

    io::json to_json() const;
    static WorkspaceConfig from_json(const io::json& j);
};

enum class ProviderKind { automatic, synthetic, http, replay };
ProviderKind provider_kind_from_string(std::string_view s);

struct WorkspaceOptions {
    ProviderKind provider = ProviderKind::automatic;  // http when the env names an endpoint
    std::optional<std::filesystem::path> replay;      // implies ProviderKind::replay
    std::optional<std::string> fixed_clock;           // replay defaults to kReplayTimestamp
    llm::GatewayOptions gateway;
    std::unique_ptr<llm::ChatProvider> provider_override;  // tests
};

inline constexpr std::string_view kReplayTimestamp = "2000-01-01T00:00:00Z";

struct TreeSpec {
    Feature root;
    refinement::Approach approach = refinement::Approach::llm;
    std::optional<std::string> group;
    std::optional<std::size_t> n;
    std::optional<std::size_t> k;
    bool generate = false;
};

struct NodeEdit {
    std::optional<std::string> name;
    std::optional<std::string> description;
};

struct InspireOutcome {
    refinement::FeatureTree tree;
    refinement::RefinementResult result;
};

// All engine state behind one root directory. Every mutation is written with
// temp-then-rename before it returns. Trees are serialized per tree, index
// rebuilds exclude index readers, and reads share.
class Workspace {
public:
    // Creates the layout and a default config when missing.
    explicit Workspace(std::filesystem::path root, WorkspaceOptions options = {});
    ~Workspace();

    const WorkspaceLayout& layout() const { return layout_; }
    const WorkspaceConfig& config() const { return config_; }
    std::string provider_id() const;
    bool replay_mode() const { return replay_; }

    // corpus
    corpus::FilterReport ingest(std::string_view jsonl);
    io::json crawl(corpus::AppGraphSource& source, const std::vector<std::string>& seeds, std::size_t max_apps,
                   const std::vector<corpus::AppRecord>& fetched);
    io::json corpus_stats() const;
    std::optional<corpus::AppRecord> app(const std::string& app_id) const;

    // index
    io::json build_index();
    std::vector<vectorindex::QueryHit> query(const std::string& text, std::size_t k) const;
    io::json index_info() const;

    // trees; version tokens guard against lost updates (Error(conflict))
    refinement::FeatureTree create_tree(const TreeSpec& spec);
    std::vector<refinement::FeatureTree> trees() const;
    refinement::FeatureTree tree(const std::string& tree_id) const;
    std::string tree_bytes(const std::string& tree_id) const;
    refinement::FeatureTree edit_node(const std::string& tree_id, const std::string& node_id, const NodeEdit& edit,
                                      std::optional<int> expected_version = std::nullopt);
    refinement::FeatureTree delete_node(const std::string& tree_id, const std::string& node_id,
                                        std::optional<int> expected_version = std::nullopt);
    InspireOutcome inspire(const std::string& tree_id, const refinement::RefineRequest& request,
                           std::optional<int> expected_version = std::nullopt);

    // assessments: "kind" rating (default) or consensus; a consensus body with
    // "from": "majority" is derived from the stored ratings
    std::string record_assessment(const io::json& body);
    evaluation::Report report(const std::set<int>& tables) const;
    evaluation::ComparisonResult venn(const std::string& tree_a, const std::string& tree_b) const;
    std::vector<evaluation::DuplicateSuggestion> duplicate_suggestions(const std::string& tree_id) const;

    static std::string serialize_tree(const refinement::FeatureTree& tree);

private:
    std::mutex& tree_mutex(const std::string& tree_id);
    std::string now() const;
    std::string next_tree_id();
    void write_tree(const refinement::FeatureTree& tree);
    refinement::FeatureTree read_tree(const std::string& tree_id) const;
    refinement::PipelineDeps deps(const refinement::AppStoreSources* sources);
    template <typename Fn>
    refinement::FeatureTree mutate_tree(const std::string& tree_id, std::optional<int> expected_version, Fn&& fn);

    WorkspaceLayout layout_;
    WorkspaceConfig config_;
    bool replay_ = false;
    std::optional<std::string> fixed_clock_;
    vectorindex::HashingEmbedder embedder_;

    std::unique_ptr<llm::ChatProvider> provider_;
    std::unique_ptr<llm::Transcript> transcript_;
    std::unique_ptr<llm::Gateway> gateway_;

    mutable std::mutex corpus_write_mutex_;
    corpus::Corpus corpus_;
    mutable std::shared_mutex index_mutex_;
    vectorindex::VectorIndex index_;

    std::mutex tree_ids_mutex_;
    std::optional<int> last_tree_number_;
    std::mutex tree_locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> tree_locks_;

    mutable std::mutex assessments_mutex_;
    std::unique_ptr<evaluation::AssessmentStore> assessments_;
};

}  // namespace inspire::service
