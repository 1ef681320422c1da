#include "inspire/server.hpp"
#include "inspire/error.hpp"
#include "inspire/text.hpp"
#include "inspire/version.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <iostream>
#include <random>
#include <sstream>

namespace inspire::service {

using refinement::FeatureTree;

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::validation: return 400;
        case ErrorCode::conflict: return 409;
        case ErrorCode::empty_retrieval: return 422;
        case ErrorCode::provider_failure:
        case ErrorCode::parse: return 502;
        case ErrorCode::io: return 500;
    }
    return 500;
}

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kCorrelationHeader = "X-Correlation-Id";

std::string api_code(ErrorCode code) {
    // Parse failures surface as provider failures: the model answered badly.
    return code == ErrorCode::parse ? "provider_failure" : std::string(to_string(code));
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    res.status = status;
    const io::json body = {{"code", code},
                           {"message", message},
                           {"correlation_id", res.get_header_value(kCorrelationHeader)}};
    res.set_content(io::dump(body), kJson);
}

void send_json(httplib::Response& res, const io::json& body, int status = 200) {
    res.status = status;
    res.set_content(io::dump(body), kJson);
}

io::json parse_body(const httplib::Request& req, bool allow_empty = true) {
    if (text::trim(req.body).empty()) {
        if (allow_empty) return io::json::object();
        throw Error(ErrorCode::validation, "request body is required");
    }
    auto j = io::json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::validation, "request body is not valid JSON");
    return j;
}

std::string string_field(const io::json& j, const char* key, const std::string& fallback = {}) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string()) throw Error(ErrorCode::validation, std::string(key) + " must be a string");
    return it->get<std::string>();
}

std::optional<std::size_t> count_field(const io::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer() || it->get<long long>() < 1) {
        throw Error(ErrorCode::validation, std::string(key) + " must be a positive integer");
    }
    return it->get<std::size_t>();
}

std::size_t parse_count(const std::string& s, const char* what) {
    std::size_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || v < 1) {
        throw Error(ErrorCode::validation, std::string(what) + " must be a positive integer");
    }
    return v;
}

// Version token from If-Match (quotes and W/ tolerated) or a "version" field.
std::optional<int> expected_version(const httplib::Request& req, const io::json& body) {
    if (req.has_header("If-Match")) {
        auto v = req.get_header_value("If-Match");
        if (v.rfind("W/", 0) == 0) v = v.substr(2);
        v.erase(std::remove(v.begin(), v.end(), '"'), v.end());
        if (v == "*") return std::nullopt;
        return static_cast<int>(parse_count(v, "If-Match"));
    }
    if (const auto it = body.find("version"); it != body.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw Error(ErrorCode::validation, "version must be an integer");
        return it->get<int>();
    }
    return std::nullopt;
}

void send_tree(httplib::Response& res, const std::string& bytes, int version, int status = 200) {
    res.status = status;
    res.set_header("ETag", "\"" + std::to_string(version) + "\"");
    res.set_content(bytes, kJson);
}

std::set<int> parse_tables(const std::string& spec) {
    std::set<int> out;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = text::trim(part);
        if (!part.empty()) out.insert(static_cast<int>(parse_count(part, "tables")));
    }
    if (out.empty()) throw Error(ErrorCode::validation, "tables must name at least one table");
    return out;
}

io::json refinement_json(const refinement::RefinementResult& r) {
    return {{"warnings", r.warnings}, {"exchange_ids", r.exchange_ids}, {"retrieved_app_ids", r.retrieved_app_ids}};
}

std::string new_correlation_id() {
    static std::atomic<std::uint64_t> counter{0};
    static const std::uint64_t salt = std::random_device{}();
    return text::hex64(text::fnv1a(std::to_string(counter++), salt));
}

}  // namespace

struct ApiServer::Impl {
    Workspace& ws;
    ServerOptions options;
    httplib::Server server;
    std::mutex log_mutex;

    Impl(Workspace& w, ServerOptions o) : ws(w), options(std::move(o)) {}

    void log(const io::json& entry) {
        const auto line = io::dump(entry);
        if (options.log) {
            options.log(line);
            return;
        }
        std::lock_guard lock(log_mutex);
        std::cerr << line << "\n";
    }

    template <typename Fn>
    httplib::Server::Handler guard(Fn fn) {
        return [this, fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                send_error(res, http_status(e.code()), api_code(e.code()), e.what());
            } catch (const io::json::exception& e) {
                send_error(res, 400, "validation", std::string("malformed JSON value: ") + e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "internal", e.what());
            }
        };
    }

    void routes() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            res.set_header(kCorrelationHeader,
                           req.has_header(kCorrelationHeader) ? req.get_header_value(kCorrelationHeader)
                                                              : new_correlation_id());
            if (options.token && req.path.rfind("/v1/", 0) == 0 &&
                req.get_header_value("Authorization") != "Bearer " + *options.token) {
                send_error(res, 401, "unauthorized", "missing or wrong bearer token");
                return httplib::Server::HandlerResponse::Handled;
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });
        server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
            if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
            send_error(res, res.status, res.status == 404 ? "not_found" : "validation",
                       "no route for " + req.method + " " + req.path);
            return httplib::Server::HandlerResponse::Handled;
        });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
            send_error(res, 500, "internal", "unhandled server error");
        });
        server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
            log({{"level", res.status >= 500 ? "error" : "info"},
                 {"correlation_id", res.get_header_value(kCorrelationHeader)},
                 {"method", req.method},
                 {"path", req.path},
                 {"status", res.status}});
        });

        server.Get("/health", guard([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, {{"status", "ok"},
                            {"version", kVersion},
                            {"provider", ws.provider_id()},
                            {"replay", ws.replay_mode()}});
        }));

        server.Post("/v1/corpus", guard([this](const httplib::Request& req, httplib::Response& res) {
            std::string lines = req.body;
            // A JSON object {"records": [...]} is accepted besides raw JSONL.
            auto j = io::json::parse(req.body, nullptr, false);
            if (!j.is_discarded() && j.is_object() && j.contains("records")) {
                if (!j["records"].is_array()) throw Error(ErrorCode::validation, "records must be an array");
                lines.clear();
                for (const auto& r : j["records"]) lines += io::dump(r) + "\n";
            }
            send_json(res, corpus::to_json(ws.ingest(lines)));
        }));
        server.Get("/v1/corpus", guard([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, ws.corpus_stats());
        }));
        server.Get(R"(/v1/apps/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
            const auto id = req.matches[1].str();
            const auto app = ws.app(id);
            if (!app) throw Error(ErrorCode::not_found, "app " + id + " is not in the corpus");
            send_json(res, corpus::to_json(*app));
        }));

        server.Post("/v1/index", guard([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, ws.build_index());
        }));
        server.Get("/v1/index", guard([this](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("q")) {
                send_json(res, ws.index_info());
                return;
            }
            const auto k = req.has_param("k") ? parse_count(req.get_param_value("k"), "k") : ws.config().index.k;
            io::json hits = io::json::array();
            for (const auto& h : ws.query(req.get_param_value("q"), k)) {
                hits.push_back({{"app_id", h.app_id}, {"score", h.score}, {"best_chunk_index", h.best_chunk_index}});
            }
            send_json(res, {{"hits", hits}});
        }));

        server.Post("/v1/trees", guard([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req, false);
            TreeSpec spec;
            spec.root.name = string_field(body, "name", string_field(body, "sub-feature"));
            spec.root.description = string_field(body, "description");
            spec.approach = refinement::approach_from_string(string_field(body, "approach", "llm"));
            if (body.contains("group") && !body["group"].is_null()) spec.group = string_field(body, "group");
            spec.n = count_field(body, "n");
            spec.k = count_field(body, "k");
            spec.generate = body.value("generate", false);
            const auto tree = ws.create_tree(spec);
            res.set_header("Location", "/v1/trees/" + tree.tree_id);
            send_tree(res, Workspace::serialize_tree(tree), tree.version, 201);
        }));
        server.Get("/v1/trees", guard([this](const httplib::Request&, httplib::Response& res) {
            io::json list = io::json::array();
            for (const auto& t : ws.trees()) {
                list.push_back({{"tree_id", t.tree_id},
                                {"name", t.root.feature.name},
                                {"approach", refinement::to_string(t.approach)},
                                {"group", t.group ? io::json(*t.group) : io::json(nullptr)},
                                {"version", t.version},
                                {"nodes", refinement::count_descendants(t.root)}});
            }
            send_json(res, {{"trees", list}});
        }));
        server.Get(R"(/v1/trees/([A-Za-z0-9_-]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
            const auto tree = ws.tree(req.matches[1].str());
            send_tree(res, Workspace::serialize_tree(tree), tree.version);
        }));
        server.Patch(R"(/v1/trees/([A-Za-z0-9_-]+)/nodes/([0-9.]+))",
                     guard([this](const httplib::Request& req, httplib::Response& res) {
                         const auto body = parse_body(req, false);
                         NodeEdit edit;
                         if (body.contains("sub-feature")) edit.name = string_field(body, "sub-feature");
                         else if (body.contains("name")) edit.name = string_field(body, "name");
                         if (body.contains("description")) edit.description = string_field(body, "description");
                         if (!edit.name && !edit.description) {
                             throw Error(ErrorCode::validation, "nothing to edit: give sub-feature and/or description");
                         }
                         const auto tree = ws.edit_node(req.matches[1].str(), req.matches[2].str(), edit,
                                                        expected_version(req, body));
                         send_tree(res, Workspace::serialize_tree(tree), tree.version);
                     }));
        server.Delete(R"(/v1/trees/([A-Za-z0-9_-]+)/nodes/([0-9.]+))",
                      guard([this](const httplib::Request& req, httplib::Response& res) {
                          const auto body = parse_body(req);
                          const auto tree = ws.delete_node(req.matches[1].str(), req.matches[2].str(),
                                                           expected_version(req, body));
                          send_tree(res, Workspace::serialize_tree(tree), tree.version);
                      }));
        server.Post(R"(/v1/trees/([A-Za-z0-9_-]+)/nodes/([0-9.]+)/inspire)",
                    guard([this](const httplib::Request& req, httplib::Response& res) {
                        const auto body = parse_body(req);
                        refinement::RefineRequest request;
                        request.node_id = req.matches[2].str();
                        const auto source = req.has_param("source") ? req.get_param_value("source")
                                                                    : string_field(body, "source", "llm");
                        request.source = refinement::approach_from_string(source);
                        const auto mode = req.has_param("mode") ? req.get_param_value("mode")
                                                                : string_field(body, "mode", "replace");
                        if (mode == "append") request.mode = refinement::MergeMode::append;
                        else if (mode != "replace") throw Error(ErrorCode::validation, "mode must be replace or append");
                        request.feedback = string_field(body, "feedback");
                        request.n = count_field(body, "n");
                        const auto out = ws.inspire(req.matches[1].str(), request, expected_version(req, body));
                        res.set_header("ETag", "\"" + std::to_string(out.tree.version) + "\"");
                        send_json(res, {{"tree", refinement::to_json(out.tree)}, {"result", refinement_json(out.result)}});
                    }));

        server.Post("/v1/assessments", guard([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req, false);
            io::json ids = io::json::array();
            if (body.is_array()) {
                for (const auto& item : body) ids.push_back(ws.record_assessment(item));
            } else {
                ids.push_back(ws.record_assessment(body));
            }
            send_json(res, {{"recorded", ids}}, 201);
        }));
        server.Get("/v1/assessments", guard([this](const httplib::Request& req, httplib::Response& res) {
            const auto tables = parse_tables(req.has_param("tables") ? req.get_param_value("tables") : "3,4,5");
            const auto report = ws.report(tables);
            if (req.get_param_value("format") == "text") {
                res.set_content(report.text, "text/plain; charset=utf-8");
                return;
            }
            auto body = report.data;
            body["text"] = report.text;
            send_json(res, body);
        }));
        server.Get("/v1/assessments/venn", guard([this](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("a") || !req.has_param("b")) {
                throw Error(ErrorCode::validation, "venn needs tree ids a and b");
            }
            const auto r = ws.venn(req.get_param_value("a"), req.get_param_value("b"));
            io::json common = io::json::array();
            for (const auto& [x, y] : r.common) common.push_back({x, y});
            send_json(res, {{"common", common}, {"only_a", r.only_a}, {"only_b", r.only_b}});
        }));
    }
};

ApiServer::ApiServer(Workspace& workspace, ServerOptions options)
    : impl_(std::make_unique<Impl>(workspace, std::move(options))) {
    impl_->routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) throw Error(ErrorCode::validation, "cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::validation, "cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
    }
    return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace inspire::service
