#include "inspire/cli.hpp"
#include "inspire/error.hpp"
#include "inspire/server.hpp"
#include "inspire/text.hpp"
#include "inspire/version.hpp"
#include "inspire/workspace.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace inspire::cli {

using service::Workspace;

namespace {

struct GlobalOptions {
    std::string workspace;
    std::string replay;
    std::string provider = "auto";
    std::string clock;
};

std::unique_ptr<Workspace> open_workspace(const GlobalOptions& g) {
    service::WorkspaceOptions options;
    options.provider = service::provider_kind_from_string(g.provider);
    if (!g.replay.empty()) options.replay = g.replay;
    if (!g.clock.empty()) options.fixed_clock = g.clock;
    return std::make_unique<Workspace>(g.workspace, std::move(options));
}

std::string read_input(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    return io::read_file(path);
}

std::vector<std::string> read_seeds(const std::string& spec) {
    std::string content = spec;
    if (std::filesystem::exists(spec)) content = io::read_file(spec);
    std::vector<std::string> words;
    std::string word;
    for (char c : content) {
        if (c == ',' || c == '\n' || c == '\r') {
            if (!text::trim(word).empty()) words.push_back(text::trim(word));
            word.clear();
        } else {
            word += c;
        }
    }
    if (!text::trim(word).empty()) words.push_back(text::trim(word));
    return words;
}

void print_outline(std::ostream& out, const refinement::FeatureNode& node) {
    out << std::string(static_cast<std::size_t>(node.level) * 2, ' ') << node.node_id;
    if (node.level > 0) out << " [" << refinement::to_string(node.provenance) << "]";
    out << " " << node.feature.name;
    if (!node.feature.description.empty()) out << ": " << node.feature.description;
    if (node.source_app_id) out << " (source: " << *node.source_app_id << ")";
    if (node.error) out << " !! " << *node.error;
    out << "\n";
    for (const auto& c : node.children) print_outline(out, c);
}

std::optional<int> opt_int(int value) { return value > 0 ? std::optional<int>(value) : std::nullopt; }

int exit_code(ErrorCode code) {
    return code == ErrorCode::provider_failure || code == ErrorCode::parse ? kExitProvider : kExitValidation;
}

std::atomic<service::ApiServer*> g_server{nullptr};

void stop_server(int) {
    if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Feature-tree elicitation engine: corpus, index, refinement and evaluation", "inspire"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GlobalOptions g;
    const char* env_ws = std::getenv("INSPIRE_WORKSPACE");
    g.workspace = env_ws && *env_ws ? env_ws : "inspire-workspace";
    app.add_option("-w,--workspace", g.workspace, "Workspace directory (env INSPIRE_WORKSPACE)");
    app.add_option("--replay", g.replay, "Serve provider calls from a recorded transcript");
    app.add_option("--provider", g.provider, "Chat provider: auto, synthetic or http")
        ->check(CLI::IsMember({"auto", "synthetic", "http"}));
    app.add_option("--clock", g.clock, "Fixed ISO-8601 timestamp for new trees");

    // corpus
    auto* corpus = app.add_subcommand("corpus", "App-description corpus")->require_subcommand(1);
    std::vector<std::string> ingest_files;
    auto* c_ingest = corpus->add_subcommand("ingest", "Filter and add line-delimited JSON records");
    c_ingest->add_option("files", ingest_files, "JSONL files ('-' for stdin)")->required();
    std::string graph_file;
    std::string seeds;
    std::size_t max_apps = 1000;
    auto* c_crawl = corpus->add_subcommand("crawl", "Discover apps from seed words over an app graph file");
    c_crawl->add_option("--graph", graph_file, "Graph JSON: search, neighbors, optional apps records")->required();
    c_crawl->add_option("--seeds", seeds, "Seed words, comma separated or a file with one per line")->required();
    c_crawl->add_option("--max", max_apps, "Maximum number of apps")->check(CLI::PositiveNumber);
    auto* c_stats = corpus->add_subcommand("stats", "Corpus statistics");

    // index
    auto* index = app.add_subcommand("index", "Vector index")->require_subcommand(1);
    auto* i_build = index->add_subcommand("build", "Rebuild the index from the corpus");
    std::string query_text;
    std::size_t k = 3;
    bool query_json = false;
    auto* i_query = index->add_subcommand("query", "Top-k apps for a query text");
    i_query->add_option("text", query_text)->required();
    i_query->add_option("-k", k, "Number of apps")->check(CLI::PositiveNumber);
    i_query->add_flag("--json", query_json);

    // tree
    auto* tree = app.add_subcommand("tree", "Feature trees")->require_subcommand(1);
    service::TreeSpec spec;
    std::string approach = "llm";
    std::string group;
    std::size_t tree_n = 0;
    std::size_t tree_k = 0;
    auto* t_new = tree->add_subcommand("new", "Create a tree from a root feature (prints the tree id)");
    t_new->add_option("--name", spec.root.name)->required();
    t_new->add_option("--desc", spec.root.description);
    t_new->add_option("--approach", approach)->check(CLI::IsMember({"llm", "appstore"}));
    t_new->add_option("--group", group, "Free label used as a report column, e.g. existing or novel");
    t_new->add_option("--n", tree_n, "Sub-features per refined node")->check(CLI::PositiveNumber);
    t_new->add_option("--k", tree_k, "Retrieved descriptions per AppStore refinement")->check(CLI::PositiveNumber);
    t_new->add_flag("--generate", spec.generate, "Generate both levels right away");

    std::string tree_id;
    std::string node_id;
    std::string source = "llm";
    std::string mode = "replace";
    std::string feedback;
    std::size_t refine_n = 0;
    int version = 0;
    auto* t_refine = tree->add_subcommand("refine", "Regenerate the children of one node");
    t_refine->add_option("tree", tree_id)->required();
    t_refine->add_option("node", node_id)->required();
    t_refine->add_option("--source", source)->check(CLI::IsMember({"llm", "appstore"}));
    t_refine->add_option("--mode", mode)->check(CLI::IsMember({"replace", "append"}));
    t_refine->add_option("--feedback", feedback, "Extra instruction appended to the prompt");
    t_refine->add_option("--n", refine_n)->check(CLI::PositiveNumber);
    t_refine->add_option("--version", version, "Expected tree version");

    std::string new_name;
    std::string new_desc;
    auto* t_edit = tree->add_subcommand("edit", "Rename or rewrite a node");
    t_edit->add_option("tree", tree_id)->required();
    t_edit->add_option("node", node_id)->required();
    auto* edit_name = t_edit->add_option("--name", new_name);
    auto* edit_desc = t_edit->add_option("--desc", new_desc);
    t_edit->add_option("--version", version, "Expected tree version");
    auto* t_delete = tree->add_subcommand("delete", "Delete a node and its subtree");
    t_delete->add_option("tree", tree_id)->required();
    t_delete->add_option("node", node_id)->required();
    t_delete->add_option("--version", version, "Expected tree version");

    auto* t_show = tree->add_subcommand("show", "Print a tree outline");
    t_show->add_option("tree", tree_id)->required();
    std::string export_path;
    auto* t_export = tree->add_subcommand("export", "Write the tree JSON");
    t_export->add_option("tree", tree_id)->required();
    t_export->add_option("-o,--out", export_path);
    auto* t_list = tree->add_subcommand("list", "List trees");

    // eval
    auto* eval = app.add_subcommand("eval", "Assessments and reports")->require_subcommand(1);
    io::json rating = io::json::object();
    std::string rater;
    std::string relationship;
    int relevance = 0;
    int clarity = 0;
    int feasibility = 0;
    int traceability = 0;
    std::string note;
    bool consensus = false;
    bool majority = false;
    std::string record_file;
    auto* e_record = eval->add_subcommand("record", "Record one assessment, or a JSONL file of them");
    e_record->add_option("--file", record_file, "JSONL assessments ('-' for stdin)");
    e_record->add_option("--tree", tree_id);
    e_record->add_option("--node", node_id);
    e_record->add_option("--rater", rater);
    e_record->add_option("--relationship", relationship)
        ->check(CLI::IsMember({"sub", "sibling", "parent", "identical", "other"}));
    e_record->add_option("--relevance", relevance);
    e_record->add_option("--clarity", clarity);
    e_record->add_option("--feasibility", feasibility);
    e_record->add_option("--traceability", traceability);
    e_record->add_option("--note", note);
    e_record->add_flag("--consensus", consensus, "Record the settled consensus value");
    e_record->add_flag("--majority", majority, "Derive the consensus from stored ratings");
    std::string tables = "3,4,5";
    bool report_json = false;
    auto* e_report = eval->add_subcommand("report", "Score, relationship and distinct-feature tables");
    e_report->add_option("--tables", tables, "Comma separated subset of 3,4,5");
    e_report->add_flag("--json", report_json);
    std::string tree_b;
    auto* e_venn = eval->add_subcommand("venn", "Overlap of the distinct relevant features of two trees");
    e_venn->add_option("tree_a", tree_id)->required();
    e_venn->add_option("tree_b", tree_b)->required();
    e_venn->add_flag("--json", report_json);
    auto* e_dups = eval->add_subcommand("duplicates", "Embedding-similar node pairs to review for merging");
    e_dups->add_option("tree", tree_id)->required();

    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--host", host);
    serve->add_option("--port", port)->check(CLI::Range(0, 65535));

    try {
        std::vector<std::string> reversed(argv.rbegin(), argv.rend() - (argv.empty() ? 0 : 1));
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        auto ws = open_workspace(g);

        if (c_ingest->parsed()) {
            corpus::FilterReport total;
            for (const auto& f : ingest_files) {
                const auto r = ws->ingest(read_input(f));
                total.examined += r.examined;
                total.kept += r.kept;
                total.game += r.game;
                total.non_english += r.non_english;
                total.too_short += r.too_short;
                total.malformed += r.malformed;
                for (const auto& d : r.diagnostics) total.diagnostics.push_back(f + ": " + d);
            }
            out << io::dump(corpus::to_json(total), 2) << "\n";
        } else if (c_crawl->parsed()) {
            const auto graph = io::json::parse(io::read_file(graph_file), nullptr, false);
            if (graph.is_discarded() || !graph.is_object()) {
                throw Error(ErrorCode::validation, graph_file + " is not a JSON object");
            }
            corpus::FileGraphSource source(graph);
            std::vector<corpus::AppRecord> fetched;
            if (graph.contains("apps")) {
                for (const auto& r : graph["apps"]) fetched.push_back(corpus::record_from_json(r));
            }
            const auto result = ws->crawl(source, read_seeds(seeds), max_apps, fetched);
            for (const auto& line : result["log"]) err << line.get<std::string>() << "\n";
            auto shown = result;
            shown.erase("log");
            out << io::dump(shown, 2) << "\n";
        } else if (c_stats->parsed()) {
            out << io::dump(ws->corpus_stats(), 2) << "\n";
        } else if (i_build->parsed()) {
            out << io::dump(ws->build_index(), 2) << "\n";
        } else if (i_query->parsed()) {
            const auto hits = ws->query(query_text, k);
            io::json j = io::json::array();
            std::size_t rank = 0;
            for (const auto& h : hits) {
                if (query_json) {
                    j.push_back({{"app_id", h.app_id}, {"score", h.score}, {"best_chunk_index", h.best_chunk_index}});
                    continue;
                }
                const auto app_record = ws->app(h.app_id);
                out << ++rank << "\t" << h.app_id << "\t" << text::format_fixed(h.score, 6) << "\t"
                    << (app_record ? app_record->title : "") << "\n";
            }
            if (query_json) out << io::dump(j, 2) << "\n";
        } else if (t_new->parsed()) {
            spec.approach = refinement::approach_from_string(approach);
            if (!group.empty()) spec.group = group;
            if (tree_n) spec.n = tree_n;
            if (tree_k) spec.k = tree_k;
            const auto t = ws->create_tree(spec);
            for (const auto& w : t.warnings) err << "warning: " << w << "\n";
            out << t.tree_id << "\n";
        } else if (t_refine->parsed()) {
            refinement::RefineRequest request;
            request.node_id = node_id;
            request.source = refinement::approach_from_string(source);
            request.mode = mode == "append" ? refinement::MergeMode::append : refinement::MergeMode::replace;
            request.feedback = feedback;
            if (refine_n) request.n = refine_n;
            const auto outcome = ws->inspire(tree_id, request, opt_int(version));
            for (const auto& w : outcome.result.warnings) err << "warning: " << w << "\n";
            const auto* node = refinement::find_node(outcome.tree.root, node_id);
            for (const auto& c : node->children) print_outline(out, c);
        } else if (t_edit->parsed()) {
            service::NodeEdit edit;
            if (edit_name->count()) edit.name = new_name;
            if (edit_desc->count()) edit.description = new_desc;
            if (!edit.name && !edit.description) throw Error(ErrorCode::validation, "give --name and/or --desc");
            const auto t = ws->edit_node(tree_id, node_id, edit, opt_int(version));
            out << t.tree_id << " version " << t.version << "\n";
        } else if (t_delete->parsed()) {
            const auto t = ws->delete_node(tree_id, node_id, opt_int(version));
            out << t.tree_id << " version " << t.version << "\n";
        } else if (t_show->parsed()) {
            const auto t = ws->tree(tree_id);
            out << t.tree_id << " (" << refinement::to_string(t.approach) << ", version " << t.version;
            if (t.group) out << ", group " << *t.group;
            out << ")\n";
            print_outline(out, t.root);
        } else if (t_export->parsed()) {
            const auto bytes = ws->tree_bytes(tree_id);
            if (export_path.empty()) out << bytes;
            else io::write_atomic(export_path, bytes);
        } else if (t_list->parsed()) {
            for (const auto& t : ws->trees()) {
                out << t.tree_id << "\t" << refinement::to_string(t.approach) << "\t" << t.group.value_or("-") << "\t"
                    << refinement::count_descendants(t.root) << "\t" << t.root.feature.name << "\n";
            }
        } else if (e_record->parsed()) {
            if (!record_file.empty()) {
                const auto lines = io::parse_json_lines(read_input(record_file));
                if (!lines.errors.empty()) {
                    throw Error(ErrorCode::validation, record_file + " line " + std::to_string(lines.errors[0].line) +
                                                           ": " + lines.errors[0].message);
                }
                for (const auto& obj : lines.objects) out << ws->record_assessment(obj) << "\n";
            } else {
                rating["kind"] = consensus || majority ? "consensus" : "rating";
                rating["tree_id"] = tree_id;
                rating["node_id"] = node_id;
                if (majority) {
                    rating["from"] = "majority";
                } else {
                    if (!consensus) rating["rater_id"] = rater;
                    if (!relationship.empty()) rating["relationship"] = relationship;
                    if (relevance) rating["relevance"] = relevance;
                    if (clarity) rating["clarity"] = clarity;
                    if (feasibility) rating["feasibility"] = feasibility;
                    if (traceability) rating["traceability"] = traceability;
                    if (!note.empty()) rating["note"] = note;
                }
                out << ws->record_assessment(rating) << "\n";
            }
        } else if (e_report->parsed()) {
            std::set<int> wanted;
            for (const auto& part : read_seeds(tables)) {
                try {
                    wanted.insert(std::stoi(part));
                } catch (const std::exception&) {
                    throw Error(ErrorCode::validation, "bad table number '" + part + "'");
                }
            }
            const auto report = ws->report(wanted);
            if (report_json) out << io::dump(report.data, 2) << "\n";
            else out << report.text;
        } else if (e_venn->parsed()) {
            const auto r = ws->venn(tree_id, tree_b);
            if (report_json) {
                io::json common = io::json::array();
                for (const auto& [a, b] : r.common) common.push_back({a, b});
                out << io::dump({{"common", common}, {"only_a", r.only_a}, {"only_b", r.only_b}}, 2) << "\n";
            } else {
                out << "common: " << r.common.size() << "\n";
                for (const auto& [a, b] : r.common) out << "  " << a << (a == b ? "" : " = " + b) << "\n";
                out << "only " << tree_id << ": " << r.only_a.size() << "\n";
                for (const auto& a : r.only_a) out << "  " << a << "\n";
                out << "only " << tree_b << ": " << r.only_b.size() << "\n";
                for (const auto& b : r.only_b) out << "  " << b << "\n";
            }
        } else if (e_dups->parsed()) {
            for (const auto& s : ws->duplicate_suggestions(tree_id)) {
                out << text::format_fixed(s.similarity, 3) << "\t" << s.node_a << " " << s.name_a << "\t" << s.node_b
                    << " " << s.name_b << "\n";
            }
        } else if (serve->parsed()) {
            service::ServerOptions options;
            if (const char* token = std::getenv("INSPIRE_TOKEN"); token && *token) options.token = token;
            service::ApiServer server(*ws, options);
            const int bound = server.bind(host, port);
            err << io::dump({{"level", "info"}, {"event", "listening"}, {"host", host}, {"port", bound},
                             {"provider", ws->provider_id()}, {"replay", ws->replay_mode()}})
                << std::endl;
            g_server = &server;
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            server.listen();
            g_server = nullptr;
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

int cli_dispatch(int argc, const char* const* argv) {
    return cli_dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace inspire::cli
