#include "lbd/service.hpp"

#include "httplib.h"
#include "lbd/error.hpp"
#include "lbd/predictor.hpp"

namespace lbd {

namespace {

using json = nlohmann::json;

Service::Response json_response(int status, const json& body) {
  return {status, body.dump() + "\n"};
}

Service::Response error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, json{{"error", {{"code", code}, {"message", message}}}});
}

std::string required_string(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(ErrorKind::kInvalidArgument, std::string("missing string field '") + name + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || !it->is_array()) {
    throw Error(ErrorKind::kInvalidArgument, std::string("'") + name + "' must be a list");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw Error(ErrorKind::kInvalidArgument, "codes must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Source, target and normalized parameters of a /query or /via body.
struct QueryKey {
  std::string source;
  std::string target;
  QueryParams params;

  std::string canonical() const {
    return json{{"source", source}, {"target", target}, {"params", params.to_json()}}.dump();
  }
};

QueryKey parse_query_key(const json& body) {
  if (!body.contains("seed")) {
    throw Error(ErrorKind::kInvalidArgument, "an explicit 'seed' is required");
  }
  json params = body;
  if (body.contains("K") && !body.contains("topics")) params["topics"] = body["K"];
  return {coded_node_id(required_string(body, "source_code")),
          coded_node_id(required_string(body, "target_code")), QueryParams::from_json(params)};
}

}  // namespace

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNodeNotFound:
    case ErrorKind::kMissingEmbedding: return 404;
    case ErrorKind::kNoPath:
    case ErrorKind::kEmptyPath:
    case ErrorKind::kEmptyCorpus: return 409;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kTooFewPoints:
    case ErrorKind::kSamePair: return 422;
    case ErrorKind::kMissingArtifact: return 503;
    default: return 500;
  }
}

// ---------------------------------------------------------------------------
// QueryCache

std::shared_ptr<const QueryResult> QueryCache::find(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

std::shared_ptr<const QueryResult> QueryCache::insert(const std::string& key,
                                                      std::shared_ptr<const QueryResult> value) {
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second->second;
  if (capacity_ == 0) return value;
  order_.emplace_front(key, value);
  entries_[key] = order_.begin();
  while (order_.size() > capacity_) {
    entries_.erase(order_.back().first);
    order_.pop_back();
  }
  return value;
}

std::size_t QueryCache::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

// ---------------------------------------------------------------------------
// Service

void Service::load(Artifacts artifacts) {
  session_id_ = artifacts.digest.substr(0, 16);
  std::atomic_store(&artifacts_, std::make_shared<const Artifacts>(std::move(artifacts)));
}

Service::Response Service::handle(std::string_view method, std::string_view path,
                                  std::string_view body) {
  const bool get = method == "GET";
  const bool post = method == "POST";
  const bool known = (get && (path == "/health" || path == "/meta")) ||
                     (post && (path == "/query" || path == "/via" || path == "/rank"));
  if (!known) return error_response(404, "NotFound", "no route for " + std::string(path));
  if (!std::atomic_load(&artifacts_)) {
    return error_response(503, "Loading", "artifacts are still loading");
  }
  try {
    if (path == "/health") return health();
    if (path == "/meta") return meta();
    const json request = json::parse(body, nullptr, false);
    if (request.is_discarded() || !request.is_object()) {
      return error_response(400, "BadRequest", "request body must be a JSON object");
    }
    if (path == "/query") return query(request);
    if (path == "/via") return via(request);
    return rank(request);
  } catch (const Error& e) {
    return error_response(http_status_for(e.kind()), error_kind_name(e.kind()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

Service::Response Service::health() const {
  return json_response(200, json{{"status", "ok"}, {"session_id", session_id_}});
}

Service::Response Service::meta() const {
  const auto artifacts = std::atomic_load(&artifacts_);
  const SemanticGraph& g = artifacts->graph;
  std::size_t sentences = 0;
  std::size_t coded = 0;
  for (const auto& id : g.ids()) {
    sentences += is_sentence_id(id);
    coded += is_coded_id(id);
  }
  return json_response(
      200, json{{"session_id", session_id_},
                {"graph", {{"nodes", g.node_count()},
                           {"edges", g.edge_count()},
                           {"sentences", sentences},
                           {"tokens", g.node_count() - sentences},
                           {"coded_terms", coded}}},
                {"embedding", {{"dim", artifacts->table.dim()},
                               {"seed", artifacts->table.seed()},
                               {"nodes", artifacts->table.size()}}},
                {"vocabulary_entries", artifacts->vocab.size()},
                {"predictor_loaded", artifacts->predictor.has_value()}});
}

std::shared_ptr<const QueryResult> Service::cached_query(const json& body) {
  const QueryKey key = parse_query_key(body);
  const std::string canonical = key.canonical();
  if (auto hit = cache_.find(canonical)) return hit;
  const auto artifacts = std::atomic_load(&artifacts_);
  auto result = std::make_shared<const QueryResult>(run_query(
      artifacts->graph, artifacts->table, artifacts->vocab, key.source, key.target, key.params));
  return cache_.insert(canonical, std::move(result));
}

Service::Response Service::query(const json& body) {
  return {200, cached_query(body)->serialize()};
}

Service::Response Service::via(const json& body) {
  const std::string via_node = required_string(body, "via_node_id");
  const auto base = cached_query(body);
  return {200, reroute_via(*base, via_node).serialize()};
}

Service::Response Service::rank(const json& body) const {
  const auto artifacts = std::atomic_load(&artifacts_);
  if (!artifacts->predictor) {
    return error_response(503, "PredictorUnavailable", "no predictor artifact loaded");
  }
  std::vector<CodePair> pairs;
  if (body.contains("pairs")) {
    if (!body["pairs"].is_array()) {
      throw Error(ErrorKind::kInvalidArgument, "'pairs' must be a list of [code_a, code_b]");
    }
    for (const auto& p : body["pairs"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
        throw Error(ErrorKind::kInvalidArgument, "'pairs' must be a list of [code_a, code_b]");
      }
      pairs.push_back({p[0].get<std::string>(), p[1].get<std::string>()});
    }
  } else if (body.contains("codes_a") || body.contains("codes_b")) {
    pairs = cross_pairs(string_list(body, "codes_a"), string_list(body, "codes_b"));
  }
  const auto threshold = [&](const char* name, double fallback) {
    auto it = body.find(name);
    if (it == body.end()) return fallback;
    if (!it->is_number()) throw Error(ErrorKind::kInvalidArgument, std::string(name) + " must be a number");
    return it->get<double>();
  };
  const RankedTable ranked =
      rank_candidates(*artifacts->predictor, artifacts->table, artifacts->vocab, pairs,
                      threshold("promising_threshold", 0.7), threshold("secondary_threshold", 0.5));
  json rows = json::array();
  for (const auto& row : ranked.rows) {
    rows.push_back({{"code_a", row.code_a},
                    {"code_b", row.code_b},
                    {"score", row.score},
                    {"label_a", row.label_a},
                    {"label_b", row.label_b},
                    {"promising", row.promising},
                    {"secondary", row.secondary}});
  }
  return json_response(
      200, json{{"columns", {"code_a", "code_b", "score", "label_a", "label_b", "promising", "secondary"}},
                {"promising_threshold", ranked.promising_threshold},
                {"secondary_threshold", ranked.secondary_threshold},
                {"rows", rows}});
}

void Service::bind(httplib::Server& server) {
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const Response out = handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json; charset=utf-8");
  };
  server.Get("/health", forward);
  server.Get("/meta", forward);
  server.Post("/query", forward);
  server.Post("/via", forward);
  server.Post("/rank", forward);
}

}  // namespace lbd
