#include "inspire/workspace.hpp"
#include "inspire/error.hpp"
#include "inspire/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace inspire::service {

using refinement::FeatureTree;

namespace {

bool valid_tree_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; });
}

std::optional<int> tree_number(const std::string& stem) {
    if (stem.size() < 2 || stem[0] != 't') return std::nullopt;
    int v = 0;
    for (std::size_t i = 1; i < stem.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(stem[i])) || v > 10'000'000) return std::nullopt;
        v = v * 10 + (stem[i] - '0');
    }
    return v;
}

std::unique_ptr<llm::ChatProvider> make_provider(ProviderKind kind) {
    if (kind == ProviderKind::synthetic) return std::make_unique<llm::SyntheticProvider>();
    auto env = llm::HttpProviderConfig::from_env();
    if (kind == ProviderKind::http && !env) {
        throw Error(ErrorCode::validation, "the http provider needs INSPIRE_PROVIDER_URL");
    }
    if (env) return std::make_unique<llm::HttpChatProvider>(*env);
    return std::make_unique<llm::SyntheticProvider>();
}

}  // namespace

io::json WorkspaceConfig::to_json() const {
    return {{"format_version", io::kFormatVersion},
            {"index", {{"chunk_max_chars", index.chunk_max_chars}, {"dimension", index.dimension}, {"k", index.k}}},
            {"refinement", {{"k", refinement.k}, {"n", refinement.n}}},
            {"merge_groups", merge_groups},
            {"duplicate_threshold", duplicate_threshold}};
}

WorkspaceConfig WorkspaceConfig::from_json(const io::json& j) {
    io::check_format_version(j, "workspace config");
    WorkspaceConfig c;
    try {
        if (const auto it = j.find("index"); it != j.end()) {
            c.index.chunk_max_chars = it->value("chunk_max_chars", c.index.chunk_max_chars);
            c.index.dimension = it->value("dimension", c.index.dimension);
            c.index.k = it->value("k", c.index.k);
        }
        if (const auto it = j.find("refinement"); it != j.end()) {
            c.refinement.k = it->value("k", c.refinement.k);
            c.refinement.n = it->value("n", c.refinement.n);
        }
        if (const auto it = j.find("merge_groups"); it != j.end()) {
            c.merge_groups = it->get<std::vector<std::vector<std::string>>>();
        }
        c.duplicate_threshold = j.value("duplicate_threshold", c.duplicate_threshold);
    } catch (const io::json::exception& e) {
        throw Error(ErrorCode::validation, std::string("malformed workspace config: ") + e.what());
    }
    c.index.validate();
    c.refinement.validate();
    return c;
}

ProviderKind provider_kind_from_string(std::string_view s) {
    if (s == "auto") return ProviderKind::automatic;
    if (s == "synthetic") return ProviderKind::synthetic;
    if (s == "http") return ProviderKind::http;
    if (s == "replay") return ProviderKind::replay;
    throw Error(ErrorCode::validation, "unknown provider '" + std::string(s) + "' (auto, synthetic, http)");
}

Workspace::Workspace(std::filesystem::path root, WorkspaceOptions options) : layout_{std::move(root)} {
    namespace fs = std::filesystem;
    for (const auto& dir : {layout_.root / "corpus", layout_.root / "index", layout_.trees(),
                            layout_.root / "assessments", layout_.root / "transcripts"}) {
        fs::create_directories(dir);
    }
    if (fs::exists(layout_.config())) {
        const auto raw = io::read_file(layout_.config());
        auto j = io::json::parse(raw, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::validation, "config.json is not a JSON object");
        config_ = WorkspaceConfig::from_json(j);
    } else {
        io::write_atomic(layout_.config(), io::dump(config_.to_json(), 2) + "\n");
    }
    embedder_ = vectorindex::HashingEmbedder(config_.index.dimension);

    corpus_ = corpus::Corpus::load(layout_.corpus());
    index_ = fs::exists(layout_.index()) ? vectorindex::VectorIndex::load(layout_.index())
                                         : vectorindex::VectorIndex(config_.index);
    assessments_ = std::make_unique<evaluation::AssessmentStore>(
        evaluation::AssessmentStore::load(layout_.assessments()));

    fixed_clock_ = options.fixed_clock;
    if (options.replay || options.provider == ProviderKind::replay) {
        if (!options.replay) throw Error(ErrorCode::validation, "replay mode needs a transcript path");
        replay_ = true;
        provider_ = llm::ReplayProvider::from_file(*options.replay);
        if (!fixed_clock_) fixed_clock_ = std::string(kReplayTimestamp);
    } else {
        provider_ = options.provider_override ? std::move(options.provider_override) : make_provider(options.provider);
        transcript_ = std::make_unique<llm::Transcript>(layout_.transcript());
    }
    gateway_ = std::make_unique<llm::Gateway>(*provider_, options.gateway, transcript_.get());
}

Workspace::~Workspace() = default;

std::string Workspace::provider_id() const { return provider_->id(); }

std::string Workspace::now() const { return fixed_clock_ ? *fixed_clock_ : refinement::utc_now_iso8601(); }

refinement::PipelineDeps Workspace::deps(const refinement::AppStoreSources* sources) {
    return {*gateway_, sources, [this] { return now(); }};
}

// ---- corpus

corpus::FilterReport Workspace::ingest(std::string_view jsonl) {
    static const corpus::MarkerLanguageDetector detector;
    std::lock_guard lock(corpus_write_mutex_);
    corpus::Corpus next = corpus_;
    auto report = next.ingest_lines(jsonl, detector);
    next.save(layout_.corpus());
    corpus_ = next;
    return report;
}

io::json Workspace::crawl(corpus::AppGraphSource& source, const std::vector<std::string>& seeds,
                          std::size_t max_apps, const std::vector<corpus::AppRecord>& fetched) {
    std::vector<std::string> log;
    const auto ids = corpus::crawl_plan(source, seeds, max_apps, [&](const std::string& m) { log.push_back(m); });
    std::map<std::string, const corpus::AppRecord*> by_id;
    for (const auto& r : fetched) by_id[r.app_id] = &r;

    std::string lines;
    std::vector<std::string> missing;
    for (const auto& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) missing.push_back(id);
        else lines += io::dump(corpus::to_json(*it->second)) + "\n";
    }
    io::json out = {{"discovered", ids}, {"unfetched", missing}, {"log", log}};
    if (!lines.empty()) out["ingest"] = corpus::to_json(ingest(lines));
    return out;
}

io::json Workspace::corpus_stats() const { return corpus_.stats(); }

std::optional<corpus::AppRecord> Workspace::app(const std::string& app_id) const { return corpus_.find(app_id); }

// ---- index

io::json Workspace::build_index() {
    std::unique_lock lock(index_mutex_);
    vectorindex::VectorIndex next(config_.index);
    for (const auto& record : corpus_.records()) next.add(record.app_id, record.description, embedder_);
    next.save(layout_.index());
    index_ = next;
    return {{"apps", index_.app_count()}, {"chunks", index_.chunk_count()}};
}

std::vector<vectorindex::QueryHit> Workspace::query(const std::string& text, std::size_t k) const {
    if (k < 1) throw Error(ErrorCode::validation, "k must be at least 1");
    std::shared_lock lock(index_mutex_);
    return index_.query(text, k, embedder_);
}

io::json Workspace::index_info() const {
    std::shared_lock lock(index_mutex_);
    return {{"apps", index_.app_count()},
            {"chunks", index_.chunk_count()},
            {"dimension", index_.config().dimension},
            {"chunk_max_chars", index_.config().chunk_max_chars}};
}

// ---- trees

std::string Workspace::serialize_tree(const FeatureTree& tree) { return io::dump(refinement::to_json(tree), 2) + "\n"; }

std::mutex& Workspace::tree_mutex(const std::string& tree_id) {
    std::lock_guard lock(tree_locks_mutex_);
    auto& slot = tree_locks_[tree_id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

std::string Workspace::next_tree_id() {
    std::lock_guard lock(tree_ids_mutex_);
    if (!last_tree_number_) {
        int max = 0;
        for (const auto& entry : std::filesystem::directory_iterator(layout_.trees())) {
            if (entry.path().extension() != ".json") continue;
            if (const auto n = tree_number(entry.path().stem().string())) max = std::max(max, *n);
        }
        last_tree_number_ = max;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "t%04d", ++*last_tree_number_);
    return buf;
}

void Workspace::write_tree(const FeatureTree& tree) { io::write_atomic(layout_.tree(tree.tree_id), serialize_tree(tree)); }

FeatureTree Workspace::read_tree(const std::string& tree_id) const {
    if (!valid_tree_id(tree_id) || !std::filesystem::exists(layout_.tree(tree_id))) {
        throw Error(ErrorCode::not_found, "tree " + tree_id + " not found");
    }
    const auto raw = io::read_file(layout_.tree(tree_id));
    auto j = io::json::parse(raw, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::validation, "tree file " + tree_id + " is not valid JSON");
    return refinement::tree_from_json(j);
}

FeatureTree Workspace::create_tree(const TreeSpec& spec) {
    auto config = config_.refinement;
    if (spec.n) config.n = *spec.n;
    if (spec.k) config.k = *spec.k;
    config.validate();
    if (text::trim(spec.root.name).empty()) throw Error(ErrorCode::validation, "root feature name must not be empty");

    FeatureTree tree;
    if (spec.generate) {
        std::shared_lock lock(index_mutex_);
        const refinement::AppStoreSources sources{index_, corpus_, embedder_};
        tree = refinement::generate_tree(spec.root, spec.approach, config, deps(&sources));
    } else {
        tree = refinement::new_tree(spec.root, spec.approach, config, now());
    }
    tree.group = spec.group;
    tree.tree_id = next_tree_id();
    std::lock_guard lock(tree_mutex(tree.tree_id));
    write_tree(tree);
    return tree;
}

std::vector<FeatureTree> Workspace::trees() const {
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(layout_.trees())) {
        if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    std::vector<FeatureTree> out;
    for (const auto& id : ids) out.push_back(read_tree(id));
    return out;
}

FeatureTree Workspace::tree(const std::string& tree_id) const { return read_tree(tree_id); }

std::string Workspace::tree_bytes(const std::string& tree_id) const {
    read_tree(tree_id);
    return io::read_file(layout_.tree(tree_id));
}

template <typename Fn>
FeatureTree Workspace::mutate_tree(const std::string& tree_id, std::optional<int> expected_version, Fn&& fn) {
    if (!valid_tree_id(tree_id)) throw Error(ErrorCode::not_found, "tree " + tree_id + " not found");
    std::lock_guard lock(tree_mutex(tree_id));
    auto tree = read_tree(tree_id);
    if (expected_version && *expected_version != tree.version) {
        throw Error(ErrorCode::conflict, "tree " + tree_id + " is at version " + std::to_string(tree.version) +
                                             ", not " + std::to_string(*expected_version));
    }
    fn(tree);
    write_tree(tree);
    return tree;
}

FeatureTree Workspace::edit_node(const std::string& tree_id, const std::string& node_id, const NodeEdit& edit,
                                 std::optional<int> expected_version) {
    if (edit.name && text::trim(*edit.name).empty()) throw Error(ErrorCode::validation, "name must not be empty");
    return mutate_tree(tree_id, expected_version, [&](FeatureTree& tree) {
        auto* node = refinement::find_node(tree.root, node_id);
        if (!node) throw Error(ErrorCode::not_found, "node " + node_id + " not found in tree " + tree_id);
        if (edit.name) node->feature.name = text::trim(*edit.name);
        if (edit.description) node->feature.description = *edit.description;
        ++tree.version;
    });
}

FeatureTree Workspace::delete_node(const std::string& tree_id, const std::string& node_id,
                                   std::optional<int> expected_version) {
    return mutate_tree(tree_id, expected_version, [&](FeatureTree& tree) {
        if (node_id == tree.root.node_id) throw Error(ErrorCode::validation, "the root node cannot be deleted");
        const auto* parent = refinement::find_parent(tree.root, node_id);
        if (!parent) throw Error(ErrorCode::not_found, "node " + node_id + " not found in tree " + tree_id);
        auto* mutable_parent = refinement::find_node(tree.root, parent->node_id);
        auto& kids = mutable_parent->children;
        kids.erase(std::remove_if(kids.begin(), kids.end(), [&](const auto& c) { return c.node_id == node_id; }),
                   kids.end());
        ++tree.version;
    });
}

InspireOutcome Workspace::inspire(const std::string& tree_id, const refinement::RefineRequest& request,
                                  std::optional<int> expected_version) {
    InspireOutcome out;
    out.tree = mutate_tree(tree_id, expected_version, [&](FeatureTree& tree) {
        std::shared_lock lock(index_mutex_);
        const refinement::AppStoreSources sources{index_, corpus_, embedder_};
        out.result = refinement::refine_node(tree, request, deps(&sources));
    });
    return out;
}

// ---- assessments

std::string Workspace::record_assessment(const io::json& body) {
    if (!body.is_object()) throw Error(ErrorCode::validation, "assessment body must be a JSON object");
    const auto kind = body.value("kind", std::string("rating"));
    std::lock_guard lock(assessments_mutex_);
    if (kind == "consensus") {
        if (body.value("from", std::string()) == "majority") {
            const auto tree_id = body.value("tree_id", std::string());
            const auto node_id = body.value("node_id", std::string());
            const auto tree = read_tree(tree_id);
            std::vector<evaluation::NodeAssessment> mine;
            for (auto& r : assessments_->ratings()) {
                if (r.tree_id == tree_id && r.node_id == node_id) mine.push_back(std::move(r));
            }
            if (mine.empty()) throw Error(ErrorCode::validation, "no ratings recorded for " + tree_id + "/" + node_id);
            const auto c = evaluation::majority_consensus(mine);
            if (!c) throw Error(ErrorCode::validation, "raters have no majority on some metric; record the consensus explicitly");
            return assessments_->record_consensus(*c, tree);
        }
        const auto c = evaluation::consensus_from_json(body);
        return assessments_->record_consensus(c, read_tree(c.tree_id));
    }
    if (kind != "rating") throw Error(ErrorCode::validation, "kind must be rating or consensus");
    const auto a = evaluation::assessment_from_json(body);
    return assessments_->record(a, read_tree(a.tree_id));
}

evaluation::Report Workspace::report(const std::set<int>& tables) const {
    for (int t : tables) {
        if (t < 3 || t > 5) throw Error(ErrorCode::validation, "unknown table " + std::to_string(t) + " (3, 4, 5)");
    }
    const auto all = trees();
    std::lock_guard lock(assessments_mutex_);
    const auto consensus = assessments_->consensus();
    const auto ratings = assessments_->ratings();
    evaluation::ReportOptions options{tables, evaluation::DuplicateMatcher(config_.merge_groups)};
    return evaluation::build_report(all, consensus, ratings, options);
}

evaluation::ComparisonResult Workspace::venn(const std::string& tree_a, const std::string& tree_b) const {
    const auto a = read_tree(tree_a);
    const auto b = read_tree(tree_b);
    std::lock_guard lock(assessments_mutex_);
    const auto consensus = evaluation::index_consensus(assessments_->consensus());
    return evaluation::compare_trees(a, b, evaluation::DuplicateMatcher(config_.merge_groups), consensus);
}

std::vector<evaluation::DuplicateSuggestion> Workspace::duplicate_suggestions(const std::string& tree_id) const {
    return evaluation::suggest_duplicates(read_tree(tree_id), embedder_, config_.duplicate_threshold);
}

}  // namespace inspire::service
