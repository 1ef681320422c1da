#pragma once

#include "inspire/corpus.hpp"
#include "inspire/feature.hpp"
#include "inspire/gateway.hpp"
#include "inspire/vectorindex.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace inspire::refinement {

enum class Provenance { root, llm, appstore };
enum class Approach { llm, appstore };

std::string_view to_string(Provenance p);
std::string_view to_string(Approach a);
Provenance provenance_from_string(std::string_view s);
Approach approach_from_string(std::string_view s);
inline Provenance provenance_of(Approach a) { return a == Approach::llm ? Provenance::llm : Provenance::appstore; }

inline constexpr int kTreeDepth = 2;

struct RefinementConfig {
    std::size_t k = 3;  // retrieved descriptions per AppStore refinement
    std::size_t n = 5;  // sub-features per refined node

    void validate() const;
};

struct FeatureNode {
    std::string node_id;
    Feature feature;
    int level = 0;
    Provenance provenance = Provenance::root;
    std::optional<std::string> source_app_id;
    std::optional<std::string> error;  // refinement of this node failed
    std::vector<FeatureNode> children;
};

struct FeatureTree {
    std::string tree_id;
    FeatureNode root;
    Approach approach = Approach::llm;
    RefinementConfig config;
    std::string created_at;
    std::optional<std::string> group;  // free label, e.g. "existing" / "novel"
    int version = 1;
    std::vector<std::string> exchange_ids;
    std::vector<std::string> warnings;
};

FeatureTree new_tree(const Feature& root, Approach approach, const RefinementConfig& config,
                     std::string created_at);

// Tree file: node keys "sub-feature", "description", "source-app-id".
io::json to_json(const FeatureNode& node);
io::json to_json(const FeatureTree& tree);
FeatureTree tree_from_json(const io::json& j);

const FeatureNode* find_node(const FeatureNode& root, const std::string& node_id);
FeatureNode* find_node(FeatureNode& root, const std::string& node_id);
const FeatureNode* find_parent(const FeatureNode& root, const std::string& node_id);

// Visits every node depth-first, parents before children.
void for_each_node(const FeatureNode& root, const std::function<void(const FeatureNode&)>& fn);
std::size_t count_descendants(const FeatureNode& node);

struct RefinementResult {
    std::vector<SubFeature> items;
    std::vector<std::string> warnings;
    std::vector<std::string> exchange_ids;
    std::vector<std::string> retrieved_app_ids;
};

// Appended to the user prompt as an extra instruction block.
std::string feedback_block(const std::string& feedback);

RefinementResult refine_llm_single(const Feature& feature, std::size_t n, llm::Gateway& gateway,
                                   const std::string& feedback = {});

// siblings is the full list the super feature was refined into, target
// included; an empty list degrades to the target alone.
RefinementResult refine_llm_context(const Feature& feature, const Feature& super_feature,
                                    const std::vector<Feature>& siblings, std::size_t n,
                                    llm::Gateway& gateway, const std::string& feedback = {});

// Every parsed item is stamped with the app's id; ids emitted by the model
// are never trusted.
RefinementResult extract_from_description(const corpus::AppRecord& app, const Feature& feature,
                                          const std::optional<Feature>& super_feature,
                                          llm::Gateway& gateway);

// Merges per-app candidate lists into n sub-features. Items whose
// source_app_id is not among the candidates' ids are dropped with a warning;
// throws Error(provider_failure) when nothing traceable is left.
RefinementResult select_sub_features(const std::vector<std::vector<SubFeature>>& candidates,
                                     const Feature& feature, std::size_t n, llm::Gateway& gateway,
                                     const std::string& feedback = {});

struct AppStoreSources {
    const vectorindex::VectorIndex& index;
    const corpus::Corpus& corpus;
    const vectorindex::EmbeddingProvider& embedder;
};

// Retrieve top-k descriptions, extract per description, select n.
// Throws Error(empty_retrieval) when the index yields no match.
RefinementResult refine_appstore(const Feature& feature, const std::optional<Feature>& super_feature,
                                 const RefinementConfig& config, const AppStoreSources& sources,
                                 llm::Gateway& gateway, const std::string& feedback = {});

struct PipelineDeps {
    llm::Gateway& gateway;
    const AppStoreSources* appstore = nullptr;  // required for Approach::appstore
    std::function<std::string()> clock;         // ISO-8601 timestamps
};

// Level 1 from the single-feature scenario on the root; each level-2 batch
// from the context scenario (super = root, siblings = all level-1 nodes).
// Failed refinements are recorded on the node instead of aborting.
FeatureTree generate_tree(const Feature& root, Approach approach, const RefinementConfig& config,
                          const PipelineDeps& deps);

enum class MergeMode { replace, append };

struct RefineRequest {
    std::string node_id;
    Approach source = Approach::llm;
    MergeMode mode = MergeMode::replace;
    std::string feedback;
    std::optional<std::size_t> n;  // defaults to the tree's n
};

// Refines one node of an existing tree in place (level 0 or 1 only) and
// bumps the tree version. Errors propagate; the tree is untouched on error.
RefinementResult refine_node(FeatureTree& tree, const RefineRequest& request, const PipelineDeps& deps);

std::string utc_now_iso8601();

}  // namespace inspire::refinement
