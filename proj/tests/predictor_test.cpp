#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lbd/error.hpp"
#include "lbd/predictor.hpp"
#include "support.hpp"

namespace lbd {
namespace {

// c1 and c2 share a sentence; c3 co-occurs with neither.
SemanticGraph three_codes() {
  const std::vector<TokenSet> sets = {{"s:d:0", {{"m:c1", 1}, {"m:c2", 1}}},
                                      {"s:d:1", {{"m:c3", 1}, {"l:noun:x", 1}}},
                                      {"s:d:2", {{"m:c1", 1}, {"l:noun:x", 1}}}};
  return SemanticGraph::build(sets);
}

EmbeddingTable random_table(const std::vector<std::string>& ids, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> data(ids.size() * static_cast<std::size_t>(dim));
  for (double& x : data) x = rng.uniform_real(-1, 1);
  return EmbeddingTable(dim, seed, ids, std::move(data));
}

TEST(TrainingPairs, HandEnumeratedFixture) {
  const auto pairs = make_training_pairs(three_codes(), 5, 1);
  std::vector<PairExample> pos, neg;
  for (const auto& p : pairs) (p.label == PairLabel::kPositive ? pos : neg).push_back(p);
  ASSERT_EQ(pos.size(), 1u);
  EXPECT_EQ(pos[0].a, "m:c1");
  EXPECT_EQ(pos[0].b, "m:c2");
  const std::set<std::pair<std::string, std::string>> allowed = {{"m:c1", "m:c3"},
                                                                 {"m:c2", "m:c3"}};
  EXPECT_FALSE(neg.empty());
  for (const auto& n : neg) {
    EXPECT_TRUE(allowed.contains({n.a, n.b}));
    EXPECT_LT(n.a, n.b);
  }
  EXPECT_TRUE(make_training_pairs(three_codes(), 0, 1).size() == 1u);
}

TEST(TrainingPairs, NeedsTwoCodedTerms) {
  const std::vector<TokenSet> sets = {{"s:d:0", {{"m:c1", 1}, {"l:noun:x", 1}}}};
  try {
    make_training_pairs(SemanticGraph::build(sets), 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInsufficientCodedTerms);
  }
}

TEST(TrainingPairs, NegativesAreDistinctAndScaled) {
  std::vector<TokenSet> sets;
  for (int i = 0; i < 30; ++i) {
    TokenSet t{"s:x:" + std::to_string(i), {}};
    t.counts["m:p" + std::to_string(i)] = 1;
    t.counts["m:p" + std::to_string(i + 1)] = 1;
    sets.push_back(t);
  }
  const auto pairs = make_training_pairs(SemanticGraph::build(sets), 3, 8);
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t negatives = 0;
  for (const auto& p : pairs) {
    EXPECT_TRUE(seen.insert({p.a, p.b}).second);
    negatives += p.label == PairLabel::kNegative;
  }
  EXPECT_EQ(negatives, 90u);
}

TEST(Predictor, ScoreIsSymmetricAndInUnitInterval) {
  const std::vector<std::string> ids = {"m:a", "m:b", "m:c", "m:d"};
  const auto table = random_table(ids, 8, 3);
  const PredictorModel model(8, 16, 4);
  for (const auto& a : ids) {
    for (const auto& b : ids) {
      if (a == b) continue;
      const double s = score_pair(model, table, a, b);
      EXPECT_EQ(s, score_pair(model, table, b, a));
      EXPECT_GT(s, 0.0);
      EXPECT_LT(s, 1.0);
    }
  }
  try {
    score_pair(model, table, "m:a", "M:A");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSamePair);
  }
  try {
    score_pair(model, table, "m:a", "m:zz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNodeNotFound);
  }
}

TEST(Predictor, GradientMatchesFiniteDifferences) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.uniform_index(6));
    PredictorModel model(d, 1 + static_cast<int>(rng.uniform_index(8)), rng.next());
    std::vector<double> u(d), v(d);
    for (int i = 0; i < d; ++i) {
      u[i] = rng.uniform_real(-1, 1);
      v[i] = rng.uniform_real(-1, 1);
    }
    const auto phi = PredictorModel::features(u, v);
    std::vector<double> grad(model.parameters().size());
    model.score_with_gradient(phi, grad);
    double diff = 0, norm = 0;
    for (std::size_t p = 0; p < grad.size(); ++p) {
      const double saved = model.parameters()[p];
      model.mutable_parameters()[p] = saved + 1e-5;
      const double up = model.score(phi);
      model.mutable_parameters()[p] = saved - 1e-5;
      const double down = model.score(phi);
      model.mutable_parameters()[p] = saved;
      const double numeric = (up - down) / 2e-5;
      diff += (numeric - grad[p]) * (numeric - grad[p]);
      norm += grad[p] * grad[p];
    }
    EXPECT_LT(std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12), 1e-4);
  }
}

TEST(Predictor, ZeroEpochsKeepsInitialization) {
  const std::vector<std::string> ids = {"m:a", "m:b", "m:c"};
  const auto table = random_table(ids, 4, 1);
  const std::vector<PairExample> pairs = {{"m:a", "m:b", PairLabel::kPositive},
                                          {"m:a", "m:c", PairLabel::kNegative}};
  PredictorTrainParams params;
  params.epochs = 0;
  params.hidden = 5;
  EXPECT_EQ(train_predictor(pairs, table, params), PredictorModel(4, 5, params.seed));
}

TEST(Predictor, TrainingIsDeterministicAndReducesLoss) {
  std::vector<std::string> ids;
  for (int i = 0; i < 20; ++i) ids.push_back("m:t" + std::to_string(i));
  const auto table = random_table(ids, 6, 2);
  std::vector<PairExample> pairs;
  for (int i = 0; i + 1 < 20; i += 2) pairs.push_back({ids[i], ids[i + 1], PairLabel::kPositive});
  for (int i = 0; i + 3 < 20; ++i) pairs.push_back({ids[i], ids[i + 3], PairLabel::kNegative});
  PredictorTrainParams params;
  params.epochs = 30;
  PredictorReport r1, r2;
  const auto m1 = train_predictor(pairs, table, params, &r1);
  const auto m2 = train_predictor(pairs, table, params, &r2);
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(m1.serialize(), m2.serialize());
  EXPECT_LE(r1.epoch_loss.back(), r1.epoch_loss.front());
  EXPECT_EQ(PredictorModel::parse(m1.serialize()), m1);
}

TEST(Predictor, MissingEmbeddingIsReported) {
  const auto table = random_table({"m:a", "m:b"}, 3, 1);
  const std::vector<PairExample> pairs = {{"m:a", "m:q", PairLabel::kPositive}};
  try {
    train_predictor(pairs, table, PredictorTrainParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingEmbedding);
  }
}

TEST(RankCandidates, SortedWithStrictThresholds) {
  std::vector<std::string> ids;
  Vocabulary vocab;
  for (int i = 0; i < 9; ++i) {
    const std::string code = "c" + std::to_string(i);
    ids.push_back("m:" + code);
    vocab.add(code, "Term " + std::to_string(i), "term" + std::to_string(i));
  }
  const auto table = random_table(ids, 5, 8);
  const PredictorModel model(5, 7, 2);
  const auto pairs = cross_pairs(std::vector<std::string>{"c0", "c1", "c2", "c3"},
                                 std::vector<std::string>{"c4", "c5", "c6", "c7", "c8"});
  ASSERT_EQ(pairs.size(), 20u);
  const auto table_out = rank_candidates(model, table, vocab, pairs);
  ASSERT_EQ(table_out.rows.size(), 20u);
  std::vector<double> brute;
  for (const auto& p : pairs) brute.push_back(score_pair(model, table, p.a, p.b));
  std::sort(brute.rbegin(), brute.rend());
  for (std::size_t i = 0; i < brute.size(); ++i) EXPECT_EQ(table_out.rows[i].score, brute[i]);
  EXPECT_EQ(table_out.rows[0].label_a.substr(0, 5), "Term ");

  // A score exactly at the threshold is not flagged.
  const double pivot = table_out.rows[3].score;
  const auto at = rank_candidates(model, table, vocab, pairs, pivot, pivot);
  EXPECT_FALSE(at.rows[3].promising);
  EXPECT_FALSE(at.rows[3].secondary);
  EXPECT_TRUE(at.rows[2].promising || at.rows[2].score == pivot);
  EXPECT_TRUE(rank_candidates(model, table, vocab, {}).rows.empty());
}

}  // namespace
}  // namespace lbd
