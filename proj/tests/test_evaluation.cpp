#include "inspire/error.hpp"
#include "inspire/evaluation.hpp"
#include "inspire/fileio.hpp"
#include "inspire/text.hpp"
#include "support/support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace inspire;
using namespace inspire::evaluation;
using refinement::Approach;
using refinement::FeatureNode;
using refinement::FeatureTree;
using refinement::Provenance;
using testing_support::TempDir;

namespace {

// Root plus n level-1 nodes with n children each; names come from name_of(level1, level2) (level2 0 for L1).
FeatureTree make_tree(const std::string& id, Approach approach, std::size_t n,
                      const std::function<std::string(std::size_t, std::size_t)>& name_of) {
    FeatureTree t;
    t.tree_id = id;
    t.approach = approach;
    t.root = {"0", {"Root", "root feature"}, 0, Provenance::root, std::nullopt, std::nullopt, {}};
    const auto prov = refinement::provenance_of(approach);
    const auto src = approach == Approach::appstore ? std::optional<std::string>("com.a") : std::nullopt;
    for (std::size_t i = 1; i <= n; ++i) {
        FeatureNode l1{"0." + std::to_string(i), {name_of(i, 0), "d"}, 1, prov, src, std::nullopt, {}};
        for (std::size_t j = 1; j <= n; ++j) {
            l1.children.push_back(
                {l1.node_id + "." + std::to_string(j), {name_of(i, j), "d"}, 2, prov, src, std::nullopt, {}});
        }
        t.root.children.push_back(std::move(l1));
    }
    return t;
}

FeatureTree unique_tree(const std::string& id, Approach approach = Approach::llm, std::size_t n = 5) {
    return make_tree(id, approach, n, [](std::size_t i, std::size_t j) {
        return "Feature " + std::to_string(i) + "-" + std::to_string(j);
    });
}

std::vector<const FeatureNode*> generated(const FeatureTree& t) {
    std::vector<const FeatureNode*> out;
    refinement::for_each_node(t.root, [&](const FeatureNode& n) {
        if (n.level > 0) out.push_back(&n);
    });
    return out;
}

Scores scores_for(Approach a, int relevance = 5, int clarity = 5, Relationship rel = Relationship::sub) {
    Scores s;
    s.relationship = rel;
    s.relevance = relevance;
    s.clarity = clarity;
    if (a == Approach::llm) s.feasibility = 5;
    else s.traceability = 5;
    return s;
}

ConsensusAssessment consensus(const FeatureTree& t, const FeatureNode& n, Scores s) {
    return {t.tree_id, n.node_id, std::move(s), {"r1"}};
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace

// ---- validation

TEST(Validation, LlmNodeWithFeasibilityIsAccepted) {
    const auto t = unique_tree("t1", Approach::llm);
    Scores s = scores_for(Approach::llm);
    EXPECT_NO_THROW(validate_scores(s, t, "0.1"));
}

TEST(Validation, AppStoreNodeWithFeasibilityIsRejected) {
    const auto t = unique_tree("t1", Approach::appstore);
    Scores s = scores_for(Approach::appstore);
    s.feasibility = 3;
    try {
        validate_scores(s, t, "0.1.2");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::validation);
    }
}

TEST(Validation, LlmNodeWithTraceabilityIsRejected) {
    const auto t = unique_tree("t1", Approach::llm);
    Scores s = scores_for(Approach::llm);
    s.traceability = 4;
    EXPECT_THROW(validate_scores(s, t, "0.1"), Error);
}

TEST(Validation, RangeIsOneToFive) {
    const auto t = unique_tree("t1", Approach::llm);
    for (int bad : {0, 6, -1}) {
        Scores s = scores_for(Approach::llm, bad);
        EXPECT_THROW(validate_scores(s, t, "0.1"), Error) << bad;
    }
    Scores s = scores_for(Approach::llm);
    s.clarity = 6;
    EXPECT_THROW(validate_scores(s, t, "0.1"), Error);
    s = scores_for(Approach::llm);
    s.feasibility = 0;
    EXPECT_THROW(validate_scores(s, t, "0.1"), Error);
}

TEST(Validation, UnknownNodeAndRoot) {
    const auto t = unique_tree("t1");
    try {
        validate_scores(scores_for(Approach::llm), t, "0.9");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_found);
    }
    EXPECT_THROW(validate_scores(scores_for(Approach::llm), t, "0"), Error);
}

TEST(Validation, AppStoreNodeNeedsTraceabilityLlmNodeNeedsFeasibility) {
    const auto a = unique_tree("a", Approach::appstore);
    Scores s = scores_for(Approach::appstore);
    s.traceability.reset();
    EXPECT_THROW(validate_scores(s, a, "0.1"), Error);
    const auto l = unique_tree("l", Approach::llm);
    s = scores_for(Approach::llm);
    s.feasibility.reset();
    EXPECT_THROW(validate_scores(s, l, "0.1"), Error);
}

// ---- averages (Table 3)

TEST(Averages, ExistingAppStoreRelevanceRow) {
    // 10 trees: L1 50 nodes all 5; L2 250 nodes with 235 fives and 15 fours (mean 4.94).
    std::vector<FeatureTree> trees;
    std::vector<ConsensusAssessment> all;
    int fours = 0;
    for (int k = 0; k < 10; ++k) {
        trees.push_back(unique_tree("t" + std::to_string(k), Approach::appstore));
        for (const auto* n : generated(trees.back())) {
            int rel = 5;
            if (n->level == 2 && fours < 15) {
                rel = 4;
                ++fours;
            }
            all.push_back(consensus(trees.back(), *n, scores_for(Approach::appstore, rel)));
        }
    }
    const auto avg = level_weighted_average(trees, Metric::relevance, index_consensus(all));
    ASSERT_TRUE(avg.l1 && avg.l2 && avg.avg);
    EXPECT_EQ(avg.l1_count, 50u);
    EXPECT_EQ(avg.l2_count, 250u);
    // Independent: plain mean over all 300 node scores.
    double sum = 0;
    for (const auto& c : all) sum += c.scores.relevance;
    EXPECT_NEAR(*avg.avg, sum / 300.0, 1e-12);
    EXPECT_EQ(text::round_half_up(*avg.l1, 2), 5.00);
    EXPECT_EQ(text::round_half_up(*avg.l2, 2), 4.94);
    EXPECT_TRUE(near(text::round_half_up(*avg.avg, 2), 4.95, 0.005));
    EXPECT_EQ(avg.excluded, 0u);
}

TEST(Averages, FromLevelMeans) {
    std::vector<LevelScore> s;
    for (int i = 0; i < 5; ++i) s.push_back({1, 5.0});
    for (int i = 0; i < 25; ++i) s.push_back({2, 4.94});
    const auto a = weighted_average(s);
    EXPECT_TRUE(near(text::round_half_up(*a.avg, 2), 4.95, 0.005));

    s.clear();
    for (int i = 0; i < 5; ++i) s.push_back({1, 4.96});
    for (int i = 0; i < 25; ++i) s.push_back({2, 4.85});
    const auto c = weighted_average(s);
    EXPECT_TRUE(near(text::round_half_up(*c.avg, 2), 4.87, 0.005));
    EXPECT_NEAR(*c.avg, (5 * 4.96 + 25 * 4.85) / 30.0, 1e-12);
}

TEST(Averages, AllFives) {
    const auto t = unique_tree("t");
    std::vector<ConsensusAssessment> all;
    for (const auto* n : generated(t)) all.push_back(consensus(t, *n, scores_for(Approach::llm)));
    const std::vector<FeatureTree> trees = {t};
    const auto a = level_weighted_average(trees, Metric::clarity, index_consensus(all));
    EXPECT_EQ(*a.l1, 5.0);
    EXPECT_EQ(*a.l2, 5.0);
    EXPECT_EQ(*a.avg, 5.0);
}

TEST(Averages, MissingLevelIsUndefined) {
    const std::vector<LevelScore> only_l1 = {{1, 3.0}, {1, 4.0}};
    const auto a = weighted_average(only_l1);
    EXPECT_EQ(*a.l1, 3.5);
    EXPECT_FALSE(a.l2);
    EXPECT_EQ(*a.avg, 3.5);
    EXPECT_FALSE(weighted_average({}).avg);
}

TEST(Averages, UnscoredNodesAreExcluded) {
    const auto t = unique_tree("t", Approach::appstore, 2);
    std::vector<ConsensusAssessment> all = {consensus(t, t.root.children[0], scores_for(Approach::appstore))};
    const std::vector<FeatureTree> trees = {t};
    const auto a = level_weighted_average(trees, Metric::feasibility, index_consensus(all));
    EXPECT_FALSE(a.avg);
    EXPECT_EQ(a.excluded, 6u);
}

TEST(Averages, WeightedAverageLiesBetweenLevelMeans) {
    std::mt19937 rng(5);
    for (int round = 0; round < 2000; ++round) {
        std::vector<LevelScore> s;
        const auto n1 = 1 + rng() % 10;
        const auto n2 = 1 + rng() % 60;
        for (std::size_t i = 0; i < n1; ++i) s.push_back({1, 1.0 + rng() % 5});
        for (std::size_t i = 0; i < n2; ++i) s.push_back({2, 1.0 + rng() % 5});
        const auto a = weighted_average(s);
        EXPECT_GE(*a.avg, std::min(*a.l1, *a.l2) - 1e-12);
        EXPECT_LE(*a.avg, std::max(*a.l1, *a.l2) + 1e-12);
    }
}

// ---- relationships (Table 4)

TEST(Relationships, ExistingAppStoreColumnSumsTo300) {
    std::vector<FeatureTree> trees;
    for (int k = 0; k < 10; ++k) trees.push_back(unique_tree("t" + std::to_string(k), Approach::appstore));
    // Deal the categories out over the 300 nodes.
    std::vector<Relationship> pool;
    const std::pair<Relationship, int> mix[] = {{Relationship::sub, 245}, {Relationship::sibling, 23},
                                                {Relationship::parent, 7}, {Relationship::identical, 16},
                                                {Relationship::other, 9}};
    for (const auto& [r, c] : mix) pool.insert(pool.end(), c, r);
    std::shuffle(pool.begin(), pool.end(), std::mt19937(9));
    std::vector<ConsensusAssessment> all;
    std::size_t i = 0;
    for (const auto& t : trees) {
        for (const auto* n : generated(t)) {
            all.push_back(consensus(t, *n, scores_for(Approach::appstore, 5, 5, pool[i++])));
        }
    }
    const auto h = relationship_histogram(trees, index_consensus(all));
    EXPECT_EQ(h[Relationship::sub], 245u);
    EXPECT_EQ(h[Relationship::sibling], 23u);
    EXPECT_EQ(h[Relationship::parent], 7u);
    EXPECT_EQ(h[Relationship::identical], 16u);
    EXPECT_EQ(h[Relationship::other], 9u);
    EXPECT_EQ(h.total, 300u);
    const auto l1 = relationship_histogram(trees, index_consensus(all), LevelFilter::l1);
    const auto l2 = relationship_histogram(trees, index_consensus(all), LevelFilter::l2);
    EXPECT_EQ(l1.total, 50u);
    EXPECT_EQ(l2.total, 250u);
    for (std::size_t r = 0; r < kRelationshipCount; ++r) EXPECT_EQ(l1.counts[r] + l2.counts[r], h.counts[r]);
}

TEST(Relationships, TenSubNodes) {
    const auto t = unique_tree("t", Approach::llm, 2);
    std::vector<ConsensusAssessment> all;
    for (const auto* n : generated(t)) all.push_back(consensus(t, *n, scores_for(Approach::llm)));
    std::vector<FeatureTree> trees = {t, unique_tree("u", Approach::llm, 2)};
    trees[1].tree_id = "u";
    // Only t is assessed: 6 nodes. Add 4 from u.
    for (std::size_t i = 0; i < 4; ++i) all.push_back(consensus(trees[1], *generated(trees[1])[i], scores_for(Approach::llm)));
    const auto h = relationship_histogram(trees, index_consensus(all));
    EXPECT_EQ(h[Relationship::sub], 10u);
    EXPECT_EQ(h.total, 10u);
    EXPECT_EQ(h.unassessed, 2u);
    for (auto r : {Relationship::sibling, Relationship::parent, Relationship::identical, Relationship::other}) {
        EXPECT_EQ(h[r], 0u);
    }
}

TEST(Relationships, EmptyAssessmentSet) {
    const std::vector<FeatureTree> trees = {unique_tree("t")};
    const auto h = relationship_histogram(trees, {});
    EXPECT_EQ(h.total, 0u);
    for (auto c : h.counts) EXPECT_EQ(c, 0u);
}

TEST(Relationships, TotalsEqualAssessedNodes) {
    std::mt19937 rng(17);
    for (int round = 0; round < 200; ++round) {
        const auto t = unique_tree("t", Approach::llm, 1 + rng() % 6);
        std::vector<ConsensusAssessment> all;
        for (const auto* n : generated(t)) {
            if (rng() % 3 == 0) continue;
            all.push_back(consensus(t, *n, scores_for(Approach::llm, 5, 5, static_cast<Relationship>(rng() % 5))));
        }
        const std::vector<FeatureTree> trees = {t};
        const auto h = relationship_histogram(trees, index_consensus(all));
        std::size_t sum = 0;
        for (auto c : h.counts) sum += c;
        EXPECT_EQ(h.total, all.size());
        EXPECT_EQ(sum, all.size());
        EXPECT_EQ(h.total + h.unassessed, generated(t).size());
    }
}

// ---- distinct features (Table 5)

TEST(Distinct, DailyAppLimitOnceAtLevelOneThreeTimesAtLevelTwo) {
    const auto t = make_tree("t", Approach::llm, 5, [](std::size_t i, std::size_t j) -> std::string {
        if (i == 2 && j == 0) return "Daily App Limit";
        if ((i == 1 && j == 3) || (i == 2 && j == 1)) return "daily app limit";
        if (i == 4 && j == 5) return "  Daily App LIMIT ";
        return "Feature " + std::to_string(i) + "-" + std::to_string(j);
    });
    const auto d = distinct_features(t, DuplicateMatcher{}, {});
    EXPECT_EQ(generated(t).size(), 30u);
    EXPECT_EQ(d.distinct, 27u);
    EXPECT_EQ(d.distinct_relevant, 0u);  // nothing assessed
}

TEST(Distinct, AllUniqueAllRelevant) {
    const auto t = unique_tree("t");
    std::vector<ConsensusAssessment> all;
    for (const auto* n : generated(t)) all.push_back(consensus(t, *n, scores_for(Approach::llm, 5)));
    const auto d = distinct_features(t, DuplicateMatcher{}, index_consensus(all));
    EXPECT_EQ(d.distinct, 30u);
    EXPECT_EQ(d.distinct_relevant, 30u);
}

TEST(Distinct, RelevanceThreeIsNotRelevant) {
    const auto t = unique_tree("t");
    std::vector<ConsensusAssessment> all;
    int low = 0;
    for (const auto* n : generated(t)) all.push_back(consensus(t, *n, scores_for(Approach::llm, low++ < 10 ? 3 : 4)));
    const auto d = distinct_features(t, DuplicateMatcher{}, index_consensus(all));
    EXPECT_EQ(d.distinct, 30u);
    EXPECT_EQ(d.distinct_relevant, 20u);
}

TEST(Distinct, ClassIsRelevantWhenAnyMemberIs) {
    const auto t = make_tree("t", Approach::llm, 1, [](std::size_t, std::size_t) { return "Same"; });
    std::vector<ConsensusAssessment> all = {consensus(t, t.root.children[0], scores_for(Approach::llm, 2)),
                                            consensus(t, t.root.children[0].children[0], scores_for(Approach::llm, 4))};
    const auto d = distinct_features(t, DuplicateMatcher{}, index_consensus(all));
    EXPECT_EQ(d.distinct, 1u);
    EXPECT_EQ(d.distinct_relevant, 1u);
    EXPECT_EQ(d.classes[0].best_relevance, 4);
}

TEST(Distinct, MergeGroupsJoinDifferentNames) {
    const DuplicateMatcher m(std::vector<std::vector<std::string>>{{"Screen Time Limit", "Daily App Limit"}});
    EXPECT_TRUE(m.same("daily app limit", " SCREEN TIME LIMIT"));
    EXPECT_FALSE(m.same("daily app limit", "app timer"));
    const auto t = make_tree("t", Approach::llm, 1, [](std::size_t, std::size_t j) {
        return j == 0 ? std::string("Screen Time Limit") : std::string("Daily App Limit");
    });
    EXPECT_EQ(distinct_features(t, m, {}).distinct, 1u);
    EXPECT_EQ(distinct_features(t, DuplicateMatcher{}, {}).distinct, 2u);
}

TEST(Distinct, RelevantNeverExceedsDistinct) {
    std::mt19937 rng(23);
    for (int round = 0; round < 300; ++round) {
        const auto t = make_tree("t", Approach::llm, 1 + rng() % 6, [&](std::size_t, std::size_t) {
            return "name " + std::to_string(rng() % 8);
        });
        std::vector<ConsensusAssessment> all;
        for (const auto* n : generated(t)) {
            all.push_back(consensus(t, *n, scores_for(Approach::llm, 1 + static_cast<int>(rng() % 5))));
        }
        const auto d = distinct_features(t, DuplicateMatcher{}, index_consensus(all));
        EXPECT_LE(d.distinct_relevant, d.distinct);
        EXPECT_LE(d.distinct, generated(t).size());
    }
}

// ---- comparisons (Venn)

namespace {

std::vector<FeatureClass> classes(std::initializer_list<std::string> names) {
    std::vector<FeatureClass> out;
    for (const auto& n : names) out.push_back({DuplicateMatcher{}.key(n), {"x"}, n, 5});
    return out;
}

}  // namespace

TEST(Venn, OverlappingSets) {
    const auto r = compare_classes(classes({"a", "b", "c"}), classes({"b", "c", "d"}));
    EXPECT_EQ(r.common.size(), 2u);
    EXPECT_EQ(r.only_a, std::vector<std::string>{"a"});
    EXPECT_EQ(r.only_b, std::vector<std::string>{"d"});
}

TEST(Venn, IdenticalAndDisjoint) {
    const auto same = compare_classes(classes({"a", "b"}), classes({"A", "b "}));
    EXPECT_EQ(same.common.size(), 2u);
    EXPECT_TRUE(same.only_a.empty());
    EXPECT_TRUE(same.only_b.empty());
    const auto apart = compare_classes(classes({"a", "b"}), classes({"c"}));
    EXPECT_TRUE(apart.common.empty());
    EXPECT_EQ(apart.only_a.size(), 2u);
    EXPECT_EQ(apart.only_b.size(), 1u);
}

TEST(Venn, TreeComparisonUsesRelevantClassesOnly) {
    const auto a = make_tree("a", Approach::llm, 1, [](std::size_t, std::size_t j) { return j ? "Shared" : "Only A"; });
    const auto b = make_tree("b", Approach::appstore, 1, [](std::size_t, std::size_t j) { return j ? "shared" : "Only B"; });
    std::vector<ConsensusAssessment> all;
    for (const auto* n : generated(a)) all.push_back(consensus(a, *n, scores_for(Approach::llm, 5)));
    for (const auto* n : generated(b)) all.push_back(consensus(b, *n, scores_for(Approach::appstore, n->level == 1 ? 2 : 5)));
    const auto r = compare_trees(a, b, DuplicateMatcher{}, index_consensus(all));
    EXPECT_EQ(r.common.size(), 1u);
    EXPECT_EQ(r.only_a, std::vector<std::string>{"Only A"});
    EXPECT_TRUE(r.only_b.empty());  // "Only B" has relevance 2
}

TEST(Venn, PartitionSizesAreConserved) {
    std::mt19937 rng(31);
    for (int round = 0; round < 1000; ++round) {
        auto pick = [&] {
            std::vector<FeatureClass> out;
            std::set<std::string> seen;
            const auto n = rng() % 12;
            for (std::size_t i = 0; i < n; ++i) {
                const auto name = "f" + std::to_string(rng() % 15);
                if (seen.insert(name).second) out.push_back({name, {"x"}, name, 5});
            }
            return out;
        };
        const auto a = pick();
        const auto b = pick();
        const auto r = compare_classes(a, b);
        EXPECT_EQ(r.common.size() + r.only_a.size(), a.size());
        EXPECT_EQ(r.common.size() + r.only_b.size(), b.size());
    }
}

// ---- duplicate suggestions

TEST(Suggestions, FlagsNearDuplicatesWithoutMerging) {
    auto t = make_tree("t", Approach::llm, 2, [](std::size_t i, std::size_t j) {
        if (i == 1 && j == 0) return std::string("Daily app limit");
        if (i == 2 && j == 1) return std::string("Daily app limit per day");
        static const char* words[] = {"weather", "camera", "budget", "flight", "recipe", "podcast", "chess", "piano", "garden"};
        return std::string(words[(i * 3 + j) % 9]);
    });
    vectorindex::HashingEmbedder e;
    const auto s = suggest_duplicates(t, e, 0.6);
    ASSERT_FALSE(s.empty());
    EXPECT_EQ(s[0].node_a, "0.1");
    EXPECT_EQ(s[0].node_b, "0.2.1");
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(s[i - 1].similarity, s[i].similarity);
    EXPECT_EQ(distinct_features(t, DuplicateMatcher{}, {}).distinct, 6u);
}

// ---- disagreement

namespace {

NodeAssessment rating(const std::string& node, const std::string& rater, int relevance, int clarity,
                      Relationship rel = Relationship::sub, std::optional<int> feas = std::nullopt) {
    NodeAssessment a{"t", node, rater, {}};
    a.scores.relationship = rel;
    a.scores.relevance = relevance;
    a.scores.clarity = clarity;
    a.scores.feasibility = feas;
    return a;
}

}  // namespace

TEST(Disagreement, NineOfTenCellsUnanimous) {
    // Cells: n1 and n2 have 3 each, n3 has 4 (feasibility) = 10 cells.
    std::vector<NodeAssessment> r;
    for (const auto* rater : {"r1", "r2", "r3"}) {
        r.push_back(rating("n1", rater, 5, 5));
        r.push_back(rating("n2", rater, 4, std::string(rater) == "r3" ? 3 : 4));
        r.push_back(rating("n3", rater, 5, 5, Relationship::sibling, 4));
    }
    EXPECT_DOUBLE_EQ(*disagreement_rate(r), 0.10);
}

TEST(Disagreement, FullUnanimity) {
    std::vector<NodeAssessment> r = {rating("n1", "a", 5, 4), rating("n1", "b", 5, 4)};
    EXPECT_DOUBLE_EQ(*disagreement_rate(r), 0.0);
}

TEST(Disagreement, DifferingEverywhere) {
    std::vector<NodeAssessment> r = {rating("n1", "a", 5, 4, Relationship::sub, 3),
                                     rating("n1", "b", 4, 3, Relationship::other, 2),
                                     rating("n2", "a", 1, 1), rating("n2", "b", 2, 2, Relationship::parent)};
    EXPECT_DOUBLE_EQ(*disagreement_rate(r), 1.0);
}

TEST(Disagreement, SingleRaterIsUndefined) {
    std::vector<NodeAssessment> r = {rating("n1", "a", 5, 4), rating("n2", "a", 5, 4)};
    EXPECT_FALSE(disagreement_rate(r));
    EXPECT_FALSE(disagreement_rate({}));
}

// ---- consensus and store

TEST(Consensus, StrictMajority) {
    std::vector<NodeAssessment> r = {rating("n", "a", 5, 4, Relationship::sub, 5), rating("n", "b", 5, 3, Relationship::sub, 5),
                                     rating("n", "c", 4, 4, Relationship::other, 5)};
    const auto c = majority_consensus(r);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->scores.relevance, 5);
    EXPECT_EQ(c->scores.clarity, 4);
    EXPECT_EQ(c->scores.relationship, Relationship::sub);
    EXPECT_EQ(c->raters.size(), 3u);
    r.pop_back();  // two raters split on clarity
    EXPECT_FALSE(majority_consensus(r));
}

TEST(Store, PersistsAndReloads) {
    TempDir dir;
    const auto t = unique_tree("t1", Approach::appstore, 2);
    const auto path = dir / "assessments.jsonl";
    {
        AssessmentStore store(path);
        store.record({"t1", "0.1", "alice", scores_for(Approach::appstore, 4)}, t);
        store.record({"t1", "0.1", "bob", scores_for(Approach::appstore, 5)}, t);
        store.record({"t1", "0.1", "alice", scores_for(Approach::appstore, 3)}, t);  // replaces
        store.record_consensus({"t1", "0.1", scores_for(Approach::appstore, 4), {"alice", "bob"}}, t);
    }
    const auto back = AssessmentStore::load(path);
    ASSERT_EQ(back.ratings().size(), 2u);
    EXPECT_EQ(back.ratings()[0].scores.relevance, 3);
    ASSERT_EQ(back.consensus().size(), 1u);
    EXPECT_EQ(back.consensus()[0].raters, (std::vector<std::string>{"alice", "bob"}));
    EXPECT_FALSE(back.empty());
}

TEST(Store, InvalidScoresAreNeverPersisted) {
    TempDir dir;
    const auto t = unique_tree("t1", Approach::appstore, 2);
    AssessmentStore store(dir / "a.jsonl");
    Scores s = scores_for(Approach::appstore);
    s.feasibility = 3;
    EXPECT_THROW(store.record({"t1", "0.1", "alice", s}, t), Error);
    EXPECT_TRUE(store.empty());
}

TEST(Store, FailedWriteRollsBack) {
    TempDir dir;
    const auto t = unique_tree("t1", Approach::llm, 2);
    AssessmentStore store(dir / "a.jsonl");
    store.record({"t1", "0.1", "alice", scores_for(Approach::llm)}, t);
    const auto before = store.serialize();
    io::inject_fault(io::FaultPoint::after_temp_write);
    EXPECT_THROW(store.record({"t1", "0.2", "alice", scores_for(Approach::llm)}, t), Error);
    EXPECT_EQ(store.serialize(), before);
    EXPECT_EQ(AssessmentStore::load(dir / "a.jsonl").serialize(), before);
}

TEST(Store, JsonRoundTrip) {
    NodeAssessment a{"t", "0.1", "r", scores_for(Approach::llm, 4, 3, Relationship::identical)};
    a.scores.note = "same as parent";
    const auto back = assessment_from_json(to_json(a));
    EXPECT_EQ(to_json(back), to_json(a));
    EXPECT_EQ(to_json(a)["relationship"], "identical");
}

// ---- report

TEST(Report, TablesForTwoColumns) {
    std::vector<FeatureTree> trees = {unique_tree("a1", Approach::appstore), unique_tree("l1", Approach::llm)};
    trees[0].group = "existing";
    trees[1].group = "existing";
    std::vector<ConsensusAssessment> all;
    for (const auto& t : trees) {
        for (const auto* n : generated(t)) all.push_back(consensus(t, *n, scores_for(t.approach, n->level == 1 ? 5 : 4)));
    }
    const auto r = build_report(trees, all, {}, {});
    EXPECT_EQ(r.data["columns"], (io::json{"existing/appstore", "existing/llm"}));
    const auto& rel = r.data["table3"]["relevance"][0];
    EXPECT_EQ(rel["L1"], 5.0);
    EXPECT_EQ(rel["L2"], 4.0);
    EXPECT_EQ(rel["Avg"], text::round_half_up((5 * 5.0 + 25 * 4.0) / 30, 2));
    EXPECT_TRUE(r.data["table3"]["feasibility"][0]["Avg"].is_null());
    EXPECT_EQ(r.data["table3"]["feasibility"][1]["Avg"], 5.0);
    EXPECT_EQ(r.data["table4"]["total"][0]["Sum"], 30);
    EXPECT_EQ(r.data["table5"]["distinct"][1], 30.0);
    EXPECT_NE(r.text.find("Table 3"), std::string::npos);
    EXPECT_NE(r.text.find("existing/appstore"), std::string::npos);
}

TEST(Report, NothingAssessedIsAValidationError) {
    const std::vector<FeatureTree> trees = {unique_tree("a")};
    EXPECT_THROW(build_report(trees, {}, {}, {}), Error);
}
