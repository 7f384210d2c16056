#ifndef LBD_SERVICE_HPP_
#define LBD_SERVICE_HPP_

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "lbd/query.hpp"
#include "lbd/stages.hpp"

namespace httplib {
class Server;
}

namespace lbd {

// LRU cache of query results keyed by the canonical request tuple. Safe for
// concurrent use; racing inserts of the same key keep the first value.
class QueryCache {
 public:
  explicit QueryCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<const QueryResult> find(const std::string& key);
  std::shared_ptr<const QueryResult> insert(const std::string& key,
                                            std::shared_ptr<const QueryResult> value);

  std::size_t size() const;
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const QueryResult>>;

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> entries_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

// HTTP front end over one immutable artifact set. Routing is transport-free
// (handle) so it can be driven directly; bind() attaches it to a server.
class Service {
 public:
  struct Response {
    int status = 200;
    std::string body;
  };

  explicit Service(std::size_t cache_capacity = 64) : cache_(cache_capacity) {}

  // Publishes the artifacts; every endpoint answers 503 until this runs.
  void load(Artifacts artifacts);
  bool ready() const { return artifacts_ != nullptr; }
  const std::string& session_id() const { return session_id_; }
  const QueryCache& cache() const { return cache_; }

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  void bind(httplib::Server& server);

 private:
  Response health() const;
  Response meta() const;
  Response query(const nlohmann::json& body);
  Response via(const nlohmann::json& body);
  Response rank(const nlohmann::json& body) const;

  std::shared_ptr<const QueryResult> cached_query(const nlohmann::json& body);

  std::shared_ptr<const Artifacts> artifacts_;
  std::string session_id_;
  QueryCache cache_;
};

// Status code for an error kind (404 unknown node, 409 no path, 422 bad
// parameters, ...).
int http_status_for(ErrorKind kind);

}  // namespace lbd

#endif  // LBD_SERVICE_HPP_
