#include "inspire/refinement.hpp"
#include "inspire/error.hpp"
#include "inspire/prompts.hpp"
#include "inspire/text.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

namespace inspire::refinement {

namespace {

std::string system_prompt(llm::TemplateId id) { return llm::render(id, {}); }

std::string sibling_block(const Feature& target, const std::vector<Feature>& siblings) {
    std::vector<std::string> lines;
    if (siblings.empty()) {
        lines.push_back(llm::feature_with_desc(target.name, target.description));
    } else {
        for (const auto& s : siblings) lines.push_back(llm::feature_with_desc(s.name, s.description));
    }
    return text::join(lines, "\n");
}

io::json candidate_json(const std::vector<std::vector<SubFeature>>& candidates) {
    io::json lists = io::json::array();
    for (const auto& list : candidates) {
        io::json items = io::json::array();
        for (const auto& sf : list) {
            items.push_back({{"sub-feature", sf.name},
                             {"description", sf.description},
                             {"source-app-id", sf.source_app_id.value_or("")}});
        }
        lists.push_back(std::move(items));
    }
    return lists;
}

void append(std::vector<std::string>& into, const std::vector<std::string>& from) {
    into.insert(into.end(), from.begin(), from.end());
}

void check_feature(const Feature& f) {
    if (text::trim(f.name).empty()) throw Error(ErrorCode::validation, "feature name must not be empty");
}

int ordinal_of(const std::string& node_id) {
    const auto dot = node_id.rfind('.');
    try {
        return std::stoi(node_id.substr(dot == std::string::npos ? 0 : dot + 1));
    } catch (const std::exception&) {
        return 0;
    }
}

std::vector<FeatureNode> make_children(const FeatureNode& parent, const std::vector<SubFeature>& items,
                                       Provenance provenance, int first_ordinal) {
    std::vector<FeatureNode> out;
    int ordinal = first_ordinal;
    for (const auto& sf : items) {
        FeatureNode child;
        child.node_id = parent.node_id + "." + std::to_string(ordinal++);
        child.feature = sf.feature();
        child.level = parent.level + 1;
        child.provenance = provenance;
        if (provenance == Provenance::appstore) child.source_app_id = sf.source_app_id;
        out.push_back(std::move(child));
    }
    return out;
}

RefinementResult refine_with(Approach approach, const Feature& feature, const std::optional<Feature>& super_feature,
                             const std::vector<Feature>& siblings, std::size_t n, const RefinementConfig& config,
                             const PipelineDeps& deps, const std::string& feedback) {
    if (approach == Approach::llm) {
        if (super_feature) return refine_llm_context(feature, *super_feature, siblings, n, deps.gateway, feedback);
        return refine_llm_single(feature, n, deps.gateway, feedback);
    }
    if (!deps.appstore) throw Error(ErrorCode::validation, "AppStore refinement needs an index and corpus");
    auto cfg = config;
    cfg.n = n;
    return refine_appstore(feature, super_feature, cfg, *deps.appstore, deps.gateway, feedback);
}

io::json node_json(const FeatureNode& node) {
    io::json j = {
        {"node_id", node.node_id},
        {"sub-feature", node.feature.name},
        {"description", node.feature.description},
    };
    if (node.source_app_id) j["source-app-id"] = *node.source_app_id;
    j["level"] = node.level;
    j["provenance"] = to_string(node.provenance);
    if (node.error) j["error"] = *node.error;
    io::json children = io::json::array();
    for (const auto& c : node.children) children.push_back(node_json(c));
    j["children"] = std::move(children);
    return j;
}

FeatureNode node_from_json(const io::json& j, int expected_level) {
    FeatureNode n;
    n.node_id = j.at("node_id").get<std::string>();
    n.feature.name = j.at("sub-feature").get<std::string>();
    n.feature.description = j.value("description", "");
    if (j.contains("source-app-id") && j["source-app-id"].is_string()) n.source_app_id = j["source-app-id"].get<std::string>();
    n.level = j.at("level").get<int>();
    n.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    if (j.contains("error") && j["error"].is_string()) n.error = j["error"].get<std::string>();
    if (n.level != expected_level || n.level > kTreeDepth) {
        throw Error(ErrorCode::validation, "node " + n.node_id + " has an inconsistent level");
    }
    if ((n.level == 0) != (n.provenance == Provenance::root)) {
        throw Error(ErrorCode::validation, "node " + n.node_id + ": only the root has provenance root");
    }
    for (const auto& c : j.value("children", io::json::array())) n.children.push_back(node_from_json(c, n.level + 1));
    return n;
}

}  // namespace

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::root: return "root";
        case Provenance::llm: return "llm";
        case Provenance::appstore: return "appstore";
    }
    return "unknown";
}

std::string_view to_string(Approach a) { return a == Approach::llm ? "llm" : "appstore"; }

Provenance provenance_from_string(std::string_view s) {
    if (s == "root") return Provenance::root;
    if (s == "llm") return Provenance::llm;
    if (s == "appstore") return Provenance::appstore;
    throw Error(ErrorCode::validation, "unknown provenance '" + std::string(s) + "'");
}

Approach approach_from_string(std::string_view s) {
    if (s == "llm") return Approach::llm;
    if (s == "appstore") return Approach::appstore;
    throw Error(ErrorCode::validation, "unknown source '" + std::string(s) + "' (expected llm or appstore)");
}

void RefinementConfig::validate() const {
    if (k < 1 || n < 1) throw Error(ErrorCode::validation, "k and n must be at least 1");
}

FeatureTree new_tree(const Feature& root, Approach approach, const RefinementConfig& config, std::string created_at) {
    check_feature(root);
    config.validate();
    FeatureTree t;
    t.root.node_id = "0";
    t.root.feature = root;
    t.approach = approach;
    t.config = config;
    t.created_at = std::move(created_at);
    return t;
}

io::json to_json(const FeatureNode& node) { return node_json(node); }

io::json to_json(const FeatureTree& tree) {
    io::json j = {
        {"format_version", io::kFormatVersion},
        {"tree_id", tree.tree_id},
        {"approach", to_string(tree.approach)},
        {"config", {{"k", tree.config.k}, {"n", tree.config.n}, {"depth", kTreeDepth}}},
        {"created_at", tree.created_at},
        {"version", tree.version},
    };
    if (tree.group) j["group"] = *tree.group;
    j["transcript"] = {{"exchange_ids", tree.exchange_ids}};
    j["warnings"] = tree.warnings;
    j["root"] = node_json(tree.root);
    return j;
}

FeatureTree tree_from_json(const io::json& j) {
    io::check_format_version(j, "tree");
    FeatureTree t;
    try {
        t.tree_id = j.value("tree_id", "");
        t.approach = approach_from_string(j.at("approach").get<std::string>());
        const auto& cfg = j.at("config");
        t.config.k = cfg.value("k", std::size_t{3});
        t.config.n = cfg.value("n", std::size_t{5});
        t.created_at = j.value("created_at", "");
        t.version = j.value("version", 1);
        if (j.contains("group") && j["group"].is_string()) t.group = j["group"].get<std::string>();
        if (j.contains("transcript")) {
            t.exchange_ids = j["transcript"].value("exchange_ids", std::vector<std::string>{});
        }
        t.warnings = j.value("warnings", std::vector<std::string>{});
        t.root = node_from_json(j.at("root"), 0);
    } catch (const io::json::exception& e) {
        throw Error(ErrorCode::validation, std::string("malformed tree: ") + e.what());
    }
    return t;
}

const FeatureNode* find_node(const FeatureNode& root, const std::string& node_id) {
    if (root.node_id == node_id) return &root;
    for (const auto& c : root.children) {
        if (const auto* hit = find_node(c, node_id)) return hit;
    }
    return nullptr;
}

FeatureNode* find_node(FeatureNode& root, const std::string& node_id) {
    return const_cast<FeatureNode*>(find_node(static_cast<const FeatureNode&>(root), node_id));
}

const FeatureNode* find_parent(const FeatureNode& root, const std::string& node_id) {
    for (const auto& c : root.children) {
        if (c.node_id == node_id) return &root;
        if (const auto* hit = find_parent(c, node_id)) return hit;
    }
    return nullptr;
}

void for_each_node(const FeatureNode& root, const std::function<void(const FeatureNode&)>& fn) {
    fn(root);
    for (const auto& c : root.children) for_each_node(c, fn);
}

std::size_t count_descendants(const FeatureNode& node) {
    std::size_t n = 0;
    for (const auto& c : node.children) n += 1 + count_descendants(c);
    return n;
}

std::string feedback_block(const std::string& feedback) {
    if (text::trim(feedback).empty()) return {};
    return "\n\n**Feedback**\n\n" + feedback;
}

RefinementResult refine_llm_single(const Feature& feature, std::size_t n, llm::Gateway& gateway,
                                   const std::string& feedback) {
    check_feature(feature);
    const auto user = llm::render(llm::TemplateId::refine_single, {{"feature", feature.name},
                                                                   {"feature_description", feature.description},
                                                                   {"n", std::to_string(n)}}) +
                      feedback_block(feedback);
    auto r = gateway.request_features(system_prompt(llm::TemplateId::system_llm), user, n);
    RefinementResult out{std::move(r.items), std::move(r.warnings), std::move(r.exchange_ids), {}};
    for (auto& item : out.items) item.source_app_id.reset();
    return out;
}

RefinementResult refine_llm_context(const Feature& feature, const Feature& super_feature,
                                    const std::vector<Feature>& siblings, std::size_t n, llm::Gateway& gateway,
                                    const std::string& feedback) {
    check_feature(feature);
    check_feature(super_feature);
    const auto user =
        llm::render(llm::TemplateId::refine_context,
                    {{"super_feature", super_feature.name},
                     {"super_feature_description", super_feature.description},
                     {"sub_features", sibling_block(feature, siblings)},
                     {"feature_with_desc", llm::feature_with_desc(feature.name, feature.description)},
                     {"n", std::to_string(n)}}) +
        feedback_block(feedback);
    auto r = gateway.request_features(system_prompt(llm::TemplateId::system_llm), user, n);
    RefinementResult out{std::move(r.items), std::move(r.warnings), std::move(r.exchange_ids), {}};
    for (auto& item : out.items) item.source_app_id.reset();
    return out;
}

RefinementResult extract_from_description(const corpus::AppRecord& app, const Feature& feature,
                                          const std::optional<Feature>& super_feature, llm::Gateway& gateway) {
    check_feature(feature);
    llm::Bindings b = {{"app_description", app.description},
                       {"feature_with_desc", llm::feature_with_desc(feature.name, feature.description)}};
    auto id = llm::TemplateId::extract;
    if (super_feature) {
        id = llm::TemplateId::extract_context;
        b["super_feature"] = super_feature->name;
        b["super_feature_description"] = super_feature->description;
    }
    auto r = gateway.request_features(system_prompt(llm::TemplateId::system_appstore), llm::render(id, b),
                                      std::nullopt);
    RefinementResult out{std::move(r.items), std::move(r.warnings), std::move(r.exchange_ids), {app.app_id}};
    for (auto& item : out.items) {
        if (item.source_app_id && *item.source_app_id != app.app_id) {
            out.warnings.push_back("overwrote model-supplied source-app-id '" + *item.source_app_id + "' on '" +
                                   item.name + "'");
        }
        item.source_app_id = app.app_id;
    }
    return out;
}

RefinementResult select_sub_features(const std::vector<std::vector<SubFeature>>& candidates, const Feature& feature,
                                     std::size_t n, llm::Gateway& gateway, const std::string& feedback) {
    if (candidates.empty()) throw Error(ErrorCode::validation, "selection needs at least one candidate list");
    check_feature(feature);
    std::set<std::string> allowed;
    for (const auto& list : candidates) {
        for (const auto& sf : list) {
            if (sf.source_app_id) allowed.insert(*sf.source_app_id);
        }
    }
    const auto user = llm::render(llm::TemplateId::select,
                                  {{"features", io::dump(candidate_json(candidates), 2)},
                                   {"feature_with_desc", llm::feature_with_desc(feature.name, feature.description)},
                                   {"n", std::to_string(n)}}) +
                      feedback_block(feedback);
    auto r = gateway.request_features(system_prompt(llm::TemplateId::system_appstore), user, n);
    RefinementResult out;
    out.warnings = std::move(r.warnings);
    out.exchange_ids = std::move(r.exchange_ids);
    for (auto& item : r.items) {
        if (!item.source_app_id || !allowed.count(*item.source_app_id)) {
            out.warnings.push_back("dropped '" + item.name + "': source-app-id '" + item.source_app_id.value_or("") +
                                   "' is not among the extracted apps");
            continue;
        }
        out.items.push_back(std::move(item));
    }
    if (out.items.empty()) {
        throw Error(ErrorCode::provider_failure, "selection returned no traceable sub-features for '" + feature.name + "'");
    }
    return out;
}

RefinementResult refine_appstore(const Feature& feature, const std::optional<Feature>& super_feature,
                                 const RefinementConfig& config, const AppStoreSources& sources,
                                 llm::Gateway& gateway, const std::string& feedback) {
    check_feature(feature);
    config.validate();
    const auto hits = sources.index.query(vectorindex::build_query(feature, super_feature), config.k, sources.embedder);
    if (hits.empty()) {
        throw Error(ErrorCode::empty_retrieval, "no corpus match for '" + feature.name + "' (index is empty)");
    }

    RefinementResult out;
    std::vector<std::vector<SubFeature>> candidates;
    std::size_t failures = 0;
    for (const auto& hit : hits) {
        out.retrieved_app_ids.push_back(hit.app_id);
        const auto app = sources.corpus.find(hit.app_id);
        if (!app) {
            out.warnings.push_back("indexed app " + hit.app_id + " is missing from the corpus");
            ++failures;
            continue;
        }
        try {
            auto r = extract_from_description(*app, feature, super_feature, gateway);
            append(out.warnings, r.warnings);
            append(out.exchange_ids, r.exchange_ids);
            if (!r.items.empty()) candidates.push_back(std::move(r.items));
        } catch (const Error& e) {
            ++failures;
            out.warnings.push_back("extraction from " + hit.app_id + " failed: " + e.what());
        }
    }
    if (candidates.empty()) {
        if (failures == hits.size()) {
            throw Error(ErrorCode::provider_failure, "extraction failed for every retrieved description of '" +
                                                         feature.name + "'");
        }
        throw Error(ErrorCode::empty_retrieval,
                    "retrieved descriptions yielded no sub-features for '" + feature.name + "'");
    }
    auto sel = select_sub_features(candidates, feature, config.n, gateway, feedback);
    append(out.warnings, sel.warnings);
    append(out.exchange_ids, sel.exchange_ids);
    out.items = std::move(sel.items);
    return out;
}

FeatureTree generate_tree(const Feature& root, Approach approach, const RefinementConfig& config,
                          const PipelineDeps& deps) {
    auto tree = new_tree(root, approach, config, deps.clock ? deps.clock() : utc_now_iso8601());
    const auto provenance = provenance_of(approach);

    try {
        auto l1 = refine_with(approach, root, std::nullopt, {}, config.n, config, deps, {});
        append(tree.warnings, l1.warnings);
        append(tree.exchange_ids, l1.exchange_ids);
        tree.root.children = make_children(tree.root, l1.items, provenance, 1);
    } catch (const Error& e) {
        tree.root.error = e.what();
        return tree;
    }

    std::vector<Feature> siblings;
    for (const auto& c : tree.root.children) siblings.push_back(c.feature);
    for (auto& node : tree.root.children) {
        try {
            auto l2 = refine_with(approach, node.feature, root, siblings, config.n, config, deps, {});
            append(tree.warnings, l2.warnings);
            append(tree.exchange_ids, l2.exchange_ids);
            node.children = make_children(node, l2.items, provenance, 1);
        } catch (const Error& e) {
            node.error = e.what();
        }
    }
    return tree;
}

RefinementResult refine_node(FeatureTree& tree, const RefineRequest& request, const PipelineDeps& deps) {
    auto* node = find_node(tree.root, request.node_id);
    if (!node) throw Error(ErrorCode::not_found, "node " + request.node_id + " not found in tree " + tree.tree_id);
    if (node->level >= kTreeDepth) {
        throw Error(ErrorCode::validation, "node " + request.node_id + " is a level-2 leaf and cannot be refined");
    }
    const auto n = request.n.value_or(tree.config.n);
    if (n < 1) throw Error(ErrorCode::validation, "n must be at least 1");

    std::optional<Feature> super_feature;
    std::vector<Feature> siblings;
    if (node->level == 1) {
        const auto* parent = find_parent(tree.root, node->node_id);
        super_feature = parent->feature;
        for (const auto& s : parent->children) siblings.push_back(s.feature);
    }
    auto result = refine_with(request.source, node->feature, super_feature, siblings, n, tree.config, deps,
                              request.feedback);

    int next = 1;
    for (const auto& c : node->children) next = std::max(next, ordinal_of(c.node_id) + 1);
    auto children = make_children(*node, result.items, provenance_of(request.source), next);
    if (request.mode == MergeMode::replace) node->children.clear();
    for (auto& c : children) node->children.push_back(std::move(c));
    node->error.reset();
    append(tree.warnings, result.warnings);
    append(tree.exchange_ids, result.exchange_ids);
    ++tree.version;
    return result;
}

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace inspire::refinement
