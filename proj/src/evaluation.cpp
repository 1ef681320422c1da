#include "inspire/evaluation.hpp"
#include "inspire/error.hpp"
#include "inspire/text.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace inspire::evaluation {

using refinement::FeatureNode;
using refinement::FeatureTree;
using refinement::Provenance;

namespace {

constexpr std::array<Relationship, kRelationshipCount> kRelationships = {
    Relationship::sub, Relationship::sibling, Relationship::parent, Relationship::identical, Relationship::other};
constexpr std::array<Metric, 4> kMetrics = {Metric::relevance, Metric::clarity, Metric::feasibility,
                                            Metric::traceability};

std::optional<int> optional_int(const io::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw Error(ErrorCode::validation, std::string(key) + " must be an integer");
    return it->get<int>();
}

io::json scores_json(const Scores& s) {
    io::json j = {{"relationship", to_string(s.relationship)}, {"relevance", s.relevance}, {"clarity", s.clarity}};
    if (s.feasibility) j["feasibility"] = *s.feasibility;
    if (s.traceability) j["traceability"] = *s.traceability;
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

Scores scores_from_json(const io::json& j) {
    Scores s;
    if (!j.contains("relationship") || !j["relationship"].is_string()) {
        throw Error(ErrorCode::validation, "relationship is required");
    }
    s.relationship = relationship_from_string(j["relationship"].get<std::string>());
    const auto relevance = optional_int(j, "relevance");
    const auto clarity = optional_int(j, "clarity");
    if (!relevance || !clarity) throw Error(ErrorCode::validation, "relevance and clarity are required");
    s.relevance = *relevance;
    s.clarity = *clarity;
    s.feasibility = optional_int(j, "feasibility");
    s.traceability = optional_int(j, "traceability");
    if (j.contains("note") && j["note"].is_string()) s.note = j["note"].get<std::string>();
    return s;
}

std::string required_string(const io::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
        throw Error(ErrorCode::validation, std::string(key) + " is required");
    }
    return it->get<std::string>();
}

void check_range(const char* name, int v) {
    if (v < 1 || v > 5) {
        throw Error(ErrorCode::validation, std::string(name) + " must be an integer in 1..5, got " + std::to_string(v));
    }
}

bool level_matches(int level, LevelFilter f) {
    return f == LevelFilter::all || (f == LevelFilter::l1 && level == 1) || (f == LevelFilter::l2 && level == 2);
}

void for_each_generated(const FeatureTree& tree, const std::function<void(const FeatureNode&)>& fn) {
    refinement::for_each_node(tree.root, [&](const FeatureNode& n) {
        if (n.level > 0) fn(n);
    });
}

const ConsensusAssessment* lookup(const ConsensusMap& m, const std::string& tree_id, const std::string& node_id) {
    const auto it = m.find({tree_id, node_id});
    return it == m.end() ? nullptr : &it->second;
}

std::string cell(const std::optional<double>& v) { return v ? text::format_fixed(*v, 2) : "-"; }

io::json cell_json(const std::optional<double>& v) {
    return v ? io::json(text::round_half_up(*v, 2)) : io::json(nullptr);
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string rpad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string_view to_string(Relationship r) {
    switch (r) {
        case Relationship::sub: return "sub";
        case Relationship::sibling: return "sibling";
        case Relationship::parent: return "parent";
        case Relationship::identical: return "identical";
        case Relationship::other: return "other";
    }
    return "unknown";
}

Relationship relationship_from_string(std::string_view s) {
    for (auto r : kRelationships) {
        if (to_string(r) == s) return r;
    }
    throw Error(ErrorCode::validation, "unknown relationship '" + std::string(s) + "'");
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::relevance: return "relevance";
        case Metric::clarity: return "clarity";
        case Metric::feasibility: return "feasibility";
        case Metric::traceability: return "traceability";
    }
    return "unknown";
}

Metric metric_from_string(std::string_view s) {
    for (auto m : kMetrics) {
        if (to_string(m) == s) return m;
    }
    throw Error(ErrorCode::validation, "unknown metric '" + std::string(s) + "'");
}

std::optional<int> Scores::get(Metric m) const {
    switch (m) {
        case Metric::relevance: return relevance;
        case Metric::clarity: return clarity;
        case Metric::feasibility: return feasibility;
        case Metric::traceability: return traceability;
    }
    return std::nullopt;
}

io::json to_json(const NodeAssessment& a) {
    io::json j = {{"kind", "rating"}, {"tree_id", a.tree_id}, {"node_id", a.node_id}, {"rater_id", a.rater_id}};
    j.update(scores_json(a.scores));
    return j;
}

io::json to_json(const ConsensusAssessment& c) {
    io::json j = {{"kind", "consensus"}, {"tree_id", c.tree_id}, {"node_id", c.node_id}, {"raters", c.raters}};
    j.update(scores_json(c.scores));
    return j;
}

NodeAssessment assessment_from_json(const io::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::validation, "assessment must be a JSON object");
    return {required_string(j, "tree_id"), required_string(j, "node_id"), required_string(j, "rater_id"),
            scores_from_json(j)};
}

ConsensusAssessment consensus_from_json(const io::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::validation, "consensus must be a JSON object");
    ConsensusAssessment c{required_string(j, "tree_id"), required_string(j, "node_id"), scores_from_json(j), {}};
    if (j.contains("raters") && j["raters"].is_array()) {
        for (const auto& r : j["raters"]) {
            if (r.is_string()) c.raters.push_back(r.get<std::string>());
        }
    }
    return c;
}

void validate_scores(const Scores& s, const FeatureTree& tree, const std::string& node_id) {
    const auto* node = refinement::find_node(tree.root, node_id);
    if (!node) throw Error(ErrorCode::not_found, "node " + node_id + " not found in tree " + tree.tree_id);
    if (node->level == 0) throw Error(ErrorCode::validation, "the root feature is not assessed");
    check_range("relevance", s.relevance);
    check_range("clarity", s.clarity);
    if (s.feasibility) check_range("feasibility", *s.feasibility);
    if (s.traceability) check_range("traceability", *s.traceability);
    if (node->provenance == Provenance::appstore) {
        if (s.feasibility) throw Error(ErrorCode::validation, "feasibility is not assessed for appstore nodes");
        if (!s.traceability) throw Error(ErrorCode::validation, "traceability is required for appstore nodes");
    } else {
        if (s.traceability) throw Error(ErrorCode::validation, "traceability is not assessed for llm nodes");
        if (!s.feasibility) throw Error(ErrorCode::validation, "feasibility is required for llm nodes");
    }
}

std::optional<ConsensusAssessment> majority_consensus(std::span<const NodeAssessment> ratings) {
    if (ratings.empty()) return std::nullopt;
    const auto majority = [&](auto project) -> std::optional<decltype(project(ratings[0]))> {
        for (const auto& candidate : ratings) {
            const auto v = project(candidate);
            std::size_t votes = 0;
            for (const auto& r : ratings) votes += project(r) == v ? 1 : 0;
            if (2 * votes > ratings.size()) return v;
        }
        return std::nullopt;
    };
    ConsensusAssessment c{ratings[0].tree_id, ratings[0].node_id, {}, {}};
    const auto rel = majority([](const NodeAssessment& a) { return a.scores.relationship; });
    const auto relevance = majority([](const NodeAssessment& a) { return a.scores.relevance; });
    const auto clarity = majority([](const NodeAssessment& a) { return a.scores.clarity; });
    const auto feas = majority([](const NodeAssessment& a) { return a.scores.feasibility; });
    const auto trace = majority([](const NodeAssessment& a) { return a.scores.traceability; });
    if (!rel || !relevance || !clarity || !feas || !trace) return std::nullopt;
    c.scores.relationship = *rel;
    c.scores.relevance = *relevance;
    c.scores.clarity = *clarity;
    c.scores.feasibility = *feas;
    c.scores.traceability = *trace;
    for (const auto& r : ratings) c.raters.push_back(r.rater_id);
    return c;
}

AssessmentStore::AssessmentStore(std::filesystem::path path) : path_(std::move(path)) {}

AssessmentStore::AssessmentStore(AssessmentStore&& other) noexcept
    : path_(std::move(other.path_)), ratings_(std::move(other.ratings_)), consensus_(std::move(other.consensus_)) {}

std::string AssessmentStore::record(const NodeAssessment& a, const FeatureTree& tree) {
    if (a.tree_id != tree.tree_id) throw Error(ErrorCode::validation, "assessment names a different tree");
    if (a.rater_id.empty()) throw Error(ErrorCode::validation, "rater_id is required");
    validate_scores(a.scores, tree, a.node_id);
    std::lock_guard lock(mutex_);
    auto previous = ratings_;
    ratings_[{a.tree_id, a.node_id, a.rater_id}] = a;
    try {
        persist_locked();
    } catch (...) {
        ratings_ = std::move(previous);
        throw;
    }
    return a.tree_id + "/" + a.node_id + "/" + a.rater_id;
}

std::string AssessmentStore::record_consensus(const ConsensusAssessment& c, const FeatureTree& tree) {
    if (c.tree_id != tree.tree_id) throw Error(ErrorCode::validation, "consensus names a different tree");
    validate_scores(c.scores, tree, c.node_id);
    std::lock_guard lock(mutex_);
    auto previous = consensus_;
    consensus_[{c.tree_id, c.node_id}] = c;
    try {
        persist_locked();
    } catch (...) {
        consensus_ = std::move(previous);
        throw;
    }
    return c.tree_id + "/" + c.node_id + "/consensus";
}

std::vector<NodeAssessment> AssessmentStore::ratings() const {
    std::lock_guard lock(mutex_);
    std::vector<NodeAssessment> out;
    for (const auto& [_, a] : ratings_) out.push_back(a);
    return out;
}

std::vector<ConsensusAssessment> AssessmentStore::consensus() const {
    std::lock_guard lock(mutex_);
    std::vector<ConsensusAssessment> out;
    for (const auto& [_, c] : consensus_) out.push_back(c);
    return out;
}

bool AssessmentStore::empty() const {
    std::lock_guard lock(mutex_);
    return ratings_.empty() && consensus_.empty();
}

std::string AssessmentStore::serialize() const {
    std::string out = io::dump({{"format", "inspire.assessments"}, {"format_version", io::kFormatVersion}}) + "\n";
    for (const auto& [_, a] : ratings_) out += io::dump(to_json(a)) + "\n";
    for (const auto& [_, c] : consensus_) out += io::dump(to_json(c)) + "\n";
    return out;
}

void AssessmentStore::persist_locked() const {
    if (path_) io::write_atomic(*path_, serialize());
}

AssessmentStore AssessmentStore::load(const std::filesystem::path& path) {
    AssessmentStore store(path);
    if (!std::filesystem::exists(path)) return store;
    auto lines = io::parse_json_lines(io::read_file(path));
    if (!lines.errors.empty()) {
        throw Error(ErrorCode::validation, "assessment store line " + std::to_string(lines.errors.front().line) +
                                               ": " + lines.errors.front().message);
    }
    for (const auto& obj : lines.objects) {
        if (obj.contains("format")) {
            io::check_format_version(obj, "assessments");
            continue;
        }
        if (obj.value("kind", "rating") == "consensus") {
            auto c = consensus_from_json(obj);
            store.consensus_[{c.tree_id, c.node_id}] = std::move(c);
        } else {
            auto a = assessment_from_json(obj);
            store.ratings_[{a.tree_id, a.node_id, a.rater_id}] = std::move(a);
        }
    }
    return store;
}

ConsensusMap index_consensus(std::span<const ConsensusAssessment> all) {
    ConsensusMap m;
    for (const auto& c : all) m[{c.tree_id, c.node_id}] = c;
    return m;
}

LevelAverages weighted_average(std::span<const LevelScore> scores) {
    LevelAverages out;
    double sum1 = 0.0;
    double sum2 = 0.0;
    for (const auto& s : scores) {
        if (s.level == 1) {
            sum1 += s.value;
            ++out.l1_count;
        } else if (s.level == 2) {
            sum2 += s.value;
            ++out.l2_count;
        }
    }
    if (out.l1_count) out.l1 = sum1 / static_cast<double>(out.l1_count);
    if (out.l2_count) out.l2 = sum2 / static_cast<double>(out.l2_count);
    const auto n = out.l1_count + out.l2_count;
    if (n) {
        const double l1_part = out.l1 ? static_cast<double>(out.l1_count) * *out.l1 : 0.0;
        const double l2_part = out.l2 ? static_cast<double>(out.l2_count) * *out.l2 : 0.0;
        out.avg = (l1_part + l2_part) / static_cast<double>(n);
    }
    return out;
}

LevelAverages level_weighted_average(std::span<const FeatureTree> trees, Metric metric, const ConsensusMap& consensus) {
    std::vector<LevelScore> scores;
    std::size_t excluded = 0;
    for (const auto& tree : trees) {
        for_each_generated(tree, [&](const FeatureNode& n) {
            const auto* c = lookup(consensus, tree.tree_id, n.node_id);
            const auto v = c ? c->scores.get(metric) : std::nullopt;
            if (v) scores.push_back({n.level, static_cast<double>(*v)});
            else ++excluded;
        });
    }
    auto out = weighted_average(scores);
    out.excluded = excluded;
    return out;
}

RelationshipCounts relationship_histogram(std::span<const FeatureTree> trees, const ConsensusMap& consensus,
                                          LevelFilter filter) {
    RelationshipCounts out;
    for (const auto& tree : trees) {
        for_each_generated(tree, [&](const FeatureNode& n) {
            if (!level_matches(n.level, filter)) return;
            const auto* c = lookup(consensus, tree.tree_id, n.node_id);
            if (!c) {
                ++out.unassessed;
                return;
            }
            ++out.counts[static_cast<std::size_t>(c->scores.relationship)];
            ++out.total;
        });
    }
    return out;
}

DuplicateMatcher::DuplicateMatcher(std::vector<std::vector<std::string>> merge_groups) {
    for (const auto& group : merge_groups) {
        if (group.empty()) continue;
        // Chained groups collapse onto one canonical key.
        auto canonical = key(group.front());
        for (const auto& name : group) {
            const auto k = key(name);
            for (auto& [_, v] : canonical_) {
                if (v == k) v = canonical;
            }
            canonical_[text::ascii_lower(text::trim(name))] = canonical;
        }
    }
}

std::string DuplicateMatcher::key(const std::string& name) const {
    auto k = text::ascii_lower(text::trim(name));
    const auto it = canonical_.find(k);
    return it == canonical_.end() ? k : it->second;
}

std::vector<FeatureClass> DistinctCounts::relevant_classes() const {
    std::vector<FeatureClass> out;
    for (const auto& c : classes) {
        if (c.best_relevance && *c.best_relevance >= kRelevantThreshold) out.push_back(c);
    }
    return out;
}

DistinctCounts distinct_features(const FeatureTree& tree, const DuplicateMatcher& matcher, const ConsensusMap& consensus) {
    DistinctCounts out;
    std::map<std::string, std::size_t> position;
    for_each_generated(tree, [&](const FeatureNode& n) {
        const auto k = matcher.key(n.feature.name);
        auto [it, inserted] = position.try_emplace(k, out.classes.size());
        if (inserted) out.classes.push_back({k, {}, n.feature.name, std::nullopt});
        auto& cls = out.classes[it->second];
        cls.node_ids.push_back(n.node_id);
        if (const auto* c = lookup(consensus, tree.tree_id, n.node_id)) {
            cls.best_relevance = std::max(cls.best_relevance.value_or(0), c->scores.relevance);
        }
    });
    out.distinct = out.classes.size();
    out.distinct_relevant = out.relevant_classes().size();
    return out;
}

ComparisonResult compare_classes(const std::vector<FeatureClass>& relevant_a, const std::vector<FeatureClass>& relevant_b) {
    ComparisonResult out;
    std::map<std::string, const FeatureClass*> in_b;
    for (const auto& c : relevant_b) in_b.emplace(c.key, &c);
    std::set<std::string> matched;
    for (const auto& c : relevant_a) {
        const auto it = in_b.find(c.key);
        if (it != in_b.end() && !matched.count(c.key)) {
            out.common.emplace_back(c.name, it->second->name);
            matched.insert(c.key);
        } else {
            out.only_a.push_back(c.name);
        }
    }
    for (const auto& c : relevant_b) {
        if (!matched.count(c.key)) out.only_b.push_back(c.name);
    }
    return out;
}

ComparisonResult compare_trees(const FeatureTree& a, const FeatureTree& b, const DuplicateMatcher& matcher,
                               const ConsensusMap& consensus) {
    return compare_classes(distinct_features(a, matcher, consensus).relevant_classes(),
                           distinct_features(b, matcher, consensus).relevant_classes());
}

std::vector<DuplicateSuggestion> suggest_duplicates(const FeatureTree& tree,
                                                    const vectorindex::EmbeddingProvider& embedder, double threshold) {
    std::vector<const FeatureNode*> nodes;
    for_each_generated(tree, [&](const FeatureNode& n) { nodes.push_back(&n); });
    std::vector<vectorindex::EmbeddingVector> vecs;
    for (const auto* n : nodes) vecs.push_back(embedder.embed(n->feature.name + ": " + n->feature.description));
    std::vector<DuplicateSuggestion> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            const double sim = vectorindex::cosine(vecs[i].values, vecs[j].values);
            if (sim >= threshold) {
                out.push_back({nodes[i]->node_id, nodes[j]->node_id, nodes[i]->feature.name, nodes[j]->feature.name, sim});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.similarity > y.similarity; });
    return out;
}

std::optional<double> disagreement_rate(std::span<const NodeAssessment> ratings) {
    std::map<std::pair<std::string, std::string>, std::vector<const NodeAssessment*>> by_node;
    for (const auto& r : ratings) by_node[{r.tree_id, r.node_id}].push_back(&r);

    std::size_t cells = 0;
    std::size_t split = 0;
    for (const auto& [_, group] : by_node) {
        if (group.size() < 2) continue;
        const auto& first = group.front()->scores;
        const auto unanimous = [&](auto project) {
            return std::all_of(group.begin(), group.end(), [&](const NodeAssessment* a) { return project(a->scores) == project(first); });
        };
        const auto any = [&](auto project) {
            return std::any_of(group.begin(), group.end(), [&](const NodeAssessment* a) { return project(a->scores).has_value(); });
        };
        const auto count = [&](auto project) {
            ++cells;
            if (!unanimous(project)) ++split;
        };
        count([](const Scores& s) { return s.relationship; });
        count([](const Scores& s) { return s.relevance; });
        count([](const Scores& s) { return s.clarity; });
        const auto feas = [](const Scores& s) { return s.feasibility; };
        const auto trace = [](const Scores& s) { return s.traceability; };
        if (any(feas)) count(feas);
        if (any(trace)) count(trace);
    }
    if (cells == 0) return std::nullopt;
    return static_cast<double>(split) / static_cast<double>(cells);
}

Report build_report(std::span<const FeatureTree> trees, std::span<const ConsensusAssessment> consensus,
                    std::span<const NodeAssessment> ratings, const ReportOptions& options) {
    if (consensus.empty()) {
        throw Error(ErrorCode::validation, "no consensus assessments recorded; nothing to report");
    }
    const auto by_node = index_consensus(consensus);

    // Columns: (group, approach), appstore before llm.
    std::map<std::pair<std::string, int>, std::vector<FeatureTree>> columns;
    for (const auto& t : trees) {
        columns[{t.group.value_or("all"), t.approach == refinement::Approach::appstore ? 0 : 1}].push_back(t);
    }
    std::vector<std::string> labels;
    for (const auto& [key, _] : columns) {
        labels.push_back(key.first + "/" + (key.second == 0 ? "appstore" : "llm"));
    }

    Report report;
    report.data = {{"format_version", io::kFormatVersion}, {"columns", labels}};
    std::ostringstream txt;
    const std::size_t label_w = 14;
    const std::size_t col_w = 8;

    auto header = [&](const std::string& title, const std::array<const char*, 3>& sub) {
        txt << title << "\n" << pad("", label_w);
        for (const auto& l : labels) txt << "| " << pad(l, col_w * 3 - 2);
        txt << "\n" << pad("", label_w);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            txt << "|";
            for (const char* s : sub) txt << rpad(s, col_w - (s == sub[0] ? 1 : 0));
        }
        txt << "\n";
    };

    if (options.tables.count(3)) {
        header("Table 3: rubric scores (Avg = node-weighted mean of L1 and L2)", {"L1", "L2", "Avg"});
        io::json rows = io::json::object();
        for (auto metric : kMetrics) {
            txt << pad(std::string(to_string(metric)), label_w);
            io::json row = io::json::array();
            for (const auto& [_, group] : columns) {
                const auto avg = level_weighted_average(group, metric, by_node);
                txt << "|" << rpad(cell(avg.l1), col_w - 1) << rpad(cell(avg.l2), col_w) << rpad(cell(avg.avg), col_w);
                row.push_back({{"L1", cell_json(avg.l1)}, {"L2", cell_json(avg.l2)}, {"Avg", cell_json(avg.avg)},
                               {"excluded", avg.excluded}});
            }
            txt << "\n";
            rows[std::string(to_string(metric))] = std::move(row);
        }
        report.data["table3"] = std::move(rows);
        txt << "\n";
    }

    if (options.tables.count(4)) {
        header("Table 4: relationship with super feature", {"L1", "L2", "Sum"});
        std::vector<std::array<RelationshipCounts, 3>> counts;
        for (const auto& [_, group] : columns) {
            counts.push_back({relationship_histogram(group, by_node, LevelFilter::l1),
                              relationship_histogram(group, by_node, LevelFilter::l2),
                              relationship_histogram(group, by_node, LevelFilter::all)});
        }
        io::json rows = io::json::object();
        auto emit = [&](const std::string& name, auto value) {
            txt << pad(name, label_w);
            io::json row = io::json::array();
            for (const auto& c : counts) {
                txt << "|" << rpad(std::to_string(value(c[0])), col_w - 1) << rpad(std::to_string(value(c[1])), col_w)
                    << rpad(std::to_string(value(c[2])), col_w);
                row.push_back({{"L1", value(c[0])}, {"L2", value(c[1])}, {"Sum", value(c[2])}});
            }
            txt << "\n";
            rows[name] = std::move(row);
        };
        for (auto r : kRelationships) emit(std::string(to_string(r)), [r](const RelationshipCounts& c) { return c[r]; });
        emit("total", [](const RelationshipCounts& c) { return c.total; });
        report.data["table4"] = std::move(rows);
        txt << "\n";
    }

    if (options.tables.count(5)) {
        txt << "Table 5: distinct features per tree (average)\n" << pad("", label_w);
        for (const auto& l : labels) txt << "| " << pad(l, col_w * 3 - 2);
        txt << "\n";
        io::json distinct_row = io::json::array();
        io::json relevant_row = io::json::array();
        std::vector<std::pair<double, double>> values;
        for (const auto& [_, group] : columns) {
            double d = 0.0;
            double r = 0.0;
            for (const auto& t : group) {
                const auto dc = distinct_features(t, options.matcher, by_node);
                d += static_cast<double>(dc.distinct);
                r += static_cast<double>(dc.distinct_relevant);
            }
            const auto n = static_cast<double>(group.size());
            values.emplace_back(d / n, r / n);
            distinct_row.push_back(text::round_half_up(d / n, 2));
            relevant_row.push_back(text::round_half_up(r / n, 2));
        }
        txt << pad("distinct", label_w);
        for (const auto& v : values) txt << "|" << rpad(text::format_fixed(v.first, 2), col_w * 3 - 1);
        txt << "\n" << pad("relevant", label_w);
        for (const auto& v : values) txt << "|" << rpad(text::format_fixed(v.second, 2), col_w * 3 - 1);
        txt << "\n\n";
        report.data["table5"] = {{"distinct", distinct_row}, {"distinct_relevant", relevant_row}};
    }

    const auto rate = disagreement_rate(ratings);
    report.data["disagreement_rate"] = rate ? io::json(*rate) : io::json(nullptr);
    txt << "Rater disagreement: " << (rate ? text::format_fixed(*rate * 100.0, 2) + "%" : std::string("n/a")) << "\n";
    report.text = txt.str();
    return report;
}

}  // namespace inspire::evaluation
