#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "lbd/service.hpp"
#include "lbd/stages.hpp"
#include "support.hpp"

namespace lbd {
namespace {

using nlohmann::json;

// Writes a small artifact set once for the whole suite.
class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("service");
    const auto bridged = testing::bridged_corpus(2);
    testing::write_text(*dir_ / "corpus.jsonl", bridged.corpus.corpus_jsonl());
    testing::write_text(*dir_ / "vocab.tsv",
                        bridged.corpus.vocabulary_tsv + "C3000003\tmosquito\tmosquito\n");
    const auto art = dir_->path() / "art";
    stage_ingest(art, {*dir_ / "corpus.jsonl", *dir_ / "vocab.tsv"});
    stage_build_graph(art);
    EmbedParams ep;
    ep.dim = 12;
    stage_embed(art, ep);
    PredictorStageOptions po;
    po.train.epochs = 5;
    stage_train_predictor(art, po);
  }
  static void TearDownTestSuite() { delete dir_; }

  static Artifacts artifacts() { return load_artifacts(dir_->path() / "art"); }

  static json query_body() {
    return {{"source_code", "C1000001"}, {"target_code", "C2000002"}, {"K", 3},
            {"knn_k", 2},               {"iterations", 50},          {"seed", 4}};
  }

  static testing::TempDir* dir_;
};

testing::TempDir* ServiceTest::dir_ = nullptr;

std::string error_code(const Service::Response& r) {
  return json::parse(r.body)["error"]["code"].get<std::string>();
}

TEST_F(ServiceTest, UnavailableBeforeLoad) {
  Service s;
  EXPECT_EQ(s.handle("GET", "/health", "").status, 503);
  EXPECT_EQ(s.handle("POST", "/query", query_body().dump()).status, 503);
  EXPECT_EQ(s.handle("GET", "/nope", "").status, 404);
}

TEST_F(ServiceTest, MetaMatchesArtifacts) {
  Service s;
  auto a = artifacts();
  const auto nodes = a.graph.node_count();
  const auto edges = a.graph.edge_count();
  s.load(std::move(a));
  EXPECT_EQ(s.handle("GET", "/health", "").status, 200);
  const auto r = s.handle("GET", "/meta", "");
  ASSERT_EQ(r.status, 200);
  const auto doc = json::parse(r.body);
  EXPECT_EQ(doc["graph"]["nodes"], nodes);
  EXPECT_EQ(doc["graph"]["edges"], edges);
  EXPECT_EQ(doc["embedding"]["dim"], 12);
  EXPECT_EQ(doc["session_id"], s.session_id());
}

TEST_F(ServiceTest, QueryIsRepeatableAndCached) {
  Service s;
  s.load(artifacts());
  const auto a = s.handle("POST", "/query", query_body().dump());
  ASSERT_EQ(a.status, 200) << a.body;
  // Same request with reordered keys is the same cache entry.
  const auto b = s.handle("POST", "/query", json::parse(query_body().dump()).dump(1));
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(s.cache().size(), 1u);
  EXPECT_EQ(s.cache().hits(), 1u);

  Service fresh;
  fresh.load(artifacts());
  EXPECT_EQ(fresh.handle("POST", "/query", query_body().dump()).body, a.body);
  EXPECT_EQ(json::parse(a.body).dump(2) + "\n", a.body);
}

TEST_F(ServiceTest, QueryErrors) {
  Service s;
  s.load(artifacts());
  auto body = query_body();
  body["bias"] = {{"coded", 0}};
  auto r = s.handle("POST", "/query", body.dump());
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(error_code(r), "InvalidArgument");

  body = query_body();
  body["source_code"] = "c9999999";
  r = s.handle("POST", "/query", body.dump());
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(error_code(r), "NodeNotFound");

  body = query_body();
  body.erase("seed");
  EXPECT_EQ(s.handle("POST", "/query", body.dump()).status, 422);
  EXPECT_EQ(s.handle("POST", "/query", "{not json").status, 400);
  EXPECT_EQ(s.handle("POST", "/query", "[1,2]").status, 400);
}

TEST_F(ServiceTest, ViaEndpoint) {
  Service s;
  s.load(artifacts());
  const auto base = json::parse(s.handle("POST", "/query", query_body().dump()).body);
  const auto path = base["active_path"];

  auto body = query_body();
  if (path.size() > 2) {
    body["via_node_id"] = path[1];
    const auto r = s.handle("POST", "/via", body.dump());
    ASSERT_EQ(r.status, 200);
    const auto doc = json::parse(r.body);
    EXPECT_EQ(doc["active_path"], path);
    EXPECT_EQ(doc["path_valid"], true);
  }
  body["via_node_id"] = "m:c1000001";
  EXPECT_EQ(s.handle("POST", "/via", body.dump()).status, 422);
  body["via_node_id"] = "topic_99";
  EXPECT_EQ(s.handle("POST", "/via", body.dump()).status, 404);
  body.erase("via_node_id");
  EXPECT_EQ(s.handle("POST", "/via", body.dump()).status, 422);
}

TEST_F(ServiceTest, RankEndpoint) {
  Service s;
  s.load(artifacts());
  auto r = s.handle("POST", "/rank", json{{"pairs", json::array()}}.dump());
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(json::parse(r.body)["rows"].empty());

  r = s.handle("POST", "/rank",
               json{{"codes_a", {"C1000001", "C3000003"}}, {"codes_b", {"C2000002"}}}.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  const auto rows = json::parse(r.body)["rows"];
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GE(rows[0]["score"].get<double>(), rows[1]["score"].get<double>());

  r = s.handle("POST", "/rank", json{{"pairs", json::array({json::array({"C1000001", "C7777777"})})}}.dump());
  EXPECT_EQ(r.status, 404);

  auto no_predictor = artifacts();
  no_predictor.predictor.reset();
  Service bare;
  bare.load(std::move(no_predictor));
  EXPECT_EQ(bare.handle("POST", "/rank", "{}").status, 503);
}

TEST_F(ServiceTest, ConcurrentQueriesAgree) {
  Service s(4);
  s.load(artifacts());
  std::vector<std::string> bodies(6);
  std::vector<std::thread> threads;
  for (auto& b : bodies) {
    threads.emplace_back([&] { b = s.handle("POST", "/query", query_body().dump()).body; });
  }
  for (auto& t : threads) t.join();
  for (const auto& b : bodies) EXPECT_EQ(b, bodies[0]);
}

TEST_F(ServiceTest, ServesOverHttp) {
  Service s;
  httplib::Server server;
  s.bind(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);

  s.load(artifacts());
  res = client.Post("/query", query_body().dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->get_header_value("Content-Type").find("application/json"), std::string::npos);
  EXPECT_TRUE(json::parse(res->body).contains("active_path"));

  server.stop();
  listener.join();
}

TEST(QueryCache, EvictsLeastRecentlyUsed) {
  QueryCache cache(2);
  auto v = std::make_shared<const QueryResult>();
  cache.insert("a", v);
  cache.insert("b", v);
  EXPECT_TRUE(cache.find("a"));
  cache.insert("c", v);
  EXPECT_TRUE(cache.find("a"));
  EXPECT_FALSE(cache.find("b"));
  EXPECT_EQ(cache.size(), 2u);
}

}  // namespace
}  // namespace lbd
