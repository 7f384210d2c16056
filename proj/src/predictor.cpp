#include "lbd/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lbd/error.hpp"
#include "lbd/random.hpp"
#include "lbd/text_format.hpp"

namespace lbd {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using CodedPair = std::pair<std::uint32_t, std::uint32_t>;

}  // namespace

std::string coded_node_id(std::string_view code) {
  std::string lower = to_lower(trim(code));
  return lower.starts_with("m:") ? lower : "m:" + lower;
}

std::vector<PairExample> make_training_pairs(const SemanticGraph& g, int neg_ratio,
                                             std::uint64_t seed) {
  if (neg_ratio < 0) throw Error(ErrorKind::kInvalidArgument, "neg_ratio must be >= 0");
  std::vector<std::uint32_t> coded;
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    if (is_coded_id(g.id(i))) coded.push_back(i);
  }
  if (coded.size() < 2) {
    throw Error(ErrorKind::kInsufficientCodedTerms,
                "need at least 2 coded terms, found " + std::to_string(coded.size()));
  }
  std::set<CodedPair> positives;
  for (std::uint32_t s = 0; s < g.node_count(); ++s) {
    if (!is_sentence_id(g.id(s))) continue;
    std::vector<std::uint32_t> terms;
    for (const auto& nb : g.neighbors(s)) {
      if (is_coded_id(g.id(nb.node))) terms.push_back(nb.node);
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
      for (std::size_t j = i + 1; j < terms.size(); ++j) positives.emplace(terms[i], terms[j]);
    }
  }

  const std::uint64_t m = coded.size();
  const std::uint64_t available = m * (m - 1) / 2 - positives.size();
  const std::uint64_t wanted =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(neg_ratio) * positives.size(), available);
  Rng rng(seed);
  std::vector<CodedPair> negatives;
  if (wanted * 2 >= available) {
    // Dense request: enumerate the pool and keep a seeded random subset.
    for (std::size_t i = 0; i < coded.size(); ++i) {
      for (std::size_t j = i + 1; j < coded.size(); ++j) {
        if (!positives.contains({coded[i], coded[j]})) negatives.emplace_back(coded[i], coded[j]);
      }
    }
    rng.shuffle(negatives);
    negatives.resize(wanted);
  } else {
    std::set<CodedPair> seen;
    while (negatives.size() < wanted) {
      std::uint32_t x = coded[rng.uniform_index(m)];
      std::uint32_t y = coded[rng.uniform_index(m)];
      if (x == y) continue;
      if (x > y) std::swap(x, y);
      if (positives.contains({x, y}) || !seen.insert({x, y}).second) continue;
      negatives.emplace_back(x, y);
    }
  }
  std::sort(negatives.begin(), negatives.end());

  std::vector<PairExample> out;
  out.reserve(positives.size() + negatives.size());
  for (const auto& [x, y] : positives) out.push_back({g.id(x), g.id(y), PairLabel::kPositive});
  for (const auto& [x, y] : negatives) out.push_back({g.id(x), g.id(y), PairLabel::kNegative});
  return out;
}

// ---------------------------------------------------------------------------
// PredictorModel

PredictorModel::PredictorModel(int embed_dim, int hidden, std::uint64_t seed)
    : embed_dim_(embed_dim), hidden_(hidden) {
  if (embed_dim < 1 || hidden < 1) {
    throw Error(ErrorKind::kInvalidArgument, "predictor dimensions must be positive");
  }
  const std::size_t in = 2 * static_cast<std::size_t>(embed_dim);
  const std::size_t h = hidden;
  params_.assign(h * in + h + h + 1, 0.0);
  Rng rng(seed);
  const double limit1 = std::sqrt(6.0 / static_cast<double>(in + h));
  for (std::size_t i = 0; i < h * in; ++i) params_[i] = rng.uniform_real(-limit1, limit1);
  const double limit2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  for (std::size_t j = 0; j < h; ++j) params_[h * in + h + j] = rng.uniform_real(-limit2, limit2);
}

std::vector<double> PredictorModel::features(std::span<const double> u,
                                             std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::kInvalidArgument, "embedding dimension mismatch");
  }
  std::vector<double> phi(2 * u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    phi[i] = u[i] * v[i];
    phi[u.size() + i] = std::fabs(u[i] - v[i]);
  }
  return phi;
}

double PredictorModel::score(std::span<const double> features) const {
  const std::size_t in = input_dim();
  const std::size_t h = hidden_;
  const double* w1 = params_.data();
  const double* b1 = w1 + h * in;
  const double* w2 = b1 + h;
  double out = w2[h];
  for (std::size_t j = 0; j < h; ++j) {
    double z = b1[j];
    for (std::size_t i = 0; i < in; ++i) z += w1[j * in + i] * features[i];
    if (z > 0.0) out += w2[j] * z;
  }
  return sigmoid(out);
}

double PredictorModel::score_with_gradient(std::span<const double> features,
                                           std::span<double> grad) const {
  const std::size_t in = input_dim();
  const std::size_t h = hidden_;
  const double* w1 = params_.data();
  const double* b1 = w1 + h * in;
  const double* w2 = b1 + h;
  std::vector<double> act(h);
  double out = w2[h];
  for (std::size_t j = 0; j < h; ++j) {
    double z = b1[j];
    for (std::size_t i = 0; i < in; ++i) z += w1[j * in + i] * features[i];
    act[j] = z > 0.0 ? z : 0.0;
    out += w2[j] * act[j];
  }
  const double s = sigmoid(out);
  const double ds = s * (1.0 - s);
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + h * in;
  double* g_w2 = g_b1 + h;
  for (std::size_t j = 0; j < h; ++j) {
    const double back = act[j] > 0.0 ? ds * w2[j] : 0.0;
    for (std::size_t i = 0; i < in; ++i) g_w1[j * in + i] = back * features[i];
    g_b1[j] = back;
    g_w2[j] = ds * act[j];
  }
  g_w2[h] = ds;
  return s;
}

std::string PredictorModel::serialize() const {
  const std::size_t in = input_dim();
  const std::size_t h = hidden_;
  std::string out = "lbd-predictor\nembed_dim " + std::to_string(embed_dim_) + "\nhidden " +
                    std::to_string(hidden_) + "\n";
  const auto emit = [&](std::string_view name, std::size_t begin, std::size_t count) {
    out += name;
    for (std::size_t i = begin; i < begin + count; ++i) {
      out.push_back(' ');
      out += format_double(params_[i]);
    }
    out.push_back('\n');
  };
  emit("W1", 0, h * in);
  emit("b1", h * in, h);
  emit("w2", h * in + h, h);
  emit("b2", h * in + 2 * h, 1);
  return out;
}

PredictorModel PredictorModel::parse(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  const auto bad = [] { return Error(ErrorKind::kMalformedRecord, "predictor file is malformed"); };
  if (lines.size() != 7 || lines[0] != "lbd-predictor" || !lines[1].starts_with("embed_dim ") ||
      !lines[2].starts_with("hidden ")) {
    throw bad();
  }
  PredictorModel model;
  model.embed_dim_ = static_cast<int>(parse_uint(lines[1].substr(10)));
  model.hidden_ = static_cast<int>(parse_uint(lines[2].substr(7)));
  const std::size_t in = model.input_dim();
  const std::size_t h = model.hidden_;
  const std::pair<std::string_view, std::size_t> blocks[] = {
      {"W1", h * in}, {"b1", h}, {"w2", h}, {"b2", 1}};
  for (std::size_t b = 0; b < 4; ++b) {
    const auto parts = split(lines[3 + b], ' ');
    if (parts.size() != blocks[b].second + 1 || parts[0] != blocks[b].first) throw bad();
    for (std::size_t i = 1; i < parts.size(); ++i) model.params_.push_back(parse_double(parts[i]));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Training and scoring

PredictorModel train_predictor(std::span<const PairExample> pairs, const EmbeddingTable& table,
                               const PredictorTrainParams& params, PredictorReport* report) {
  if (params.epochs < 0 || !(params.learning_rate > 0.0) || params.margin < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "invalid predictor training parameters");
  }
  PredictorModel model(table.dim(), params.hidden, params.seed);
  std::vector<std::vector<double>> pos_features;
  std::vector<std::vector<double>> neg_features;
  for (const auto& pair : pairs) {
    for (const auto* id : {&pair.a, &pair.b}) {
      if (!table.contains(*id)) throw Error(ErrorKind::kMissingEmbedding, *id);
    }
    auto phi = PredictorModel::features(table.vector_of(pair.a), table.vector_of(pair.b));
    (pair.label == PairLabel::kPositive ? pos_features : neg_features).push_back(std::move(phi));
  }
  if (pos_features.empty() || neg_features.empty()) return model;

  Rng rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> pos_order(pos_features.size());
  std::vector<std::size_t> neg_order(neg_features.size());
  const std::size_t samples = std::max(pos_order.size(), neg_order.size());
  const std::size_t n_params = model.parameters().size();
  std::vector<double> grad_pos(n_params);
  std::vector<double> grad_neg(n_params);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t i = 0; i < pos_order.size(); ++i) pos_order[i] = i;
    for (std::size_t i = 0; i < neg_order.size(); ++i) neg_order[i] = i;
    rng.shuffle(pos_order);
    rng.shuffle(neg_order);
    double loss_sum = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const auto& p = pos_features[pos_order[k % pos_order.size()]];
      const auto& n = neg_features[neg_order[k % neg_order.size()]];
      const double sp = model.score_with_gradient(p, grad_pos);
      const double sn = model.score_with_gradient(n, grad_neg);
      const double loss = params.margin - sp + sn;
      if (loss <= 0.0) continue;
      loss_sum += loss;
      auto weights = model.mutable_parameters();
      for (std::size_t j = 0; j < n_params; ++j) {
        weights[j] -= params.learning_rate * (grad_neg[j] - grad_pos[j]);
      }
    }
    if (report) report->epoch_loss.push_back(loss_sum / static_cast<double>(samples));
  }
  return model;
}

double score_pair(const PredictorModel& model, const EmbeddingTable& table, std::string_view a,
                  std::string_view b) {
  const std::string id_a = coded_node_id(a);
  const std::string id_b = coded_node_id(b);
  if (id_a == id_b) throw Error(ErrorKind::kSamePair, id_a);
  const auto u = table.vector_of(id_a);
  const auto v = table.vector_of(id_b);
  if (static_cast<int>(u.size()) != model.embed_dim()) {
    throw Error(ErrorKind::kInvalidArgument, "model and embedding dimensions differ");
  }
  return model.score(PredictorModel::features(u, v));
}

std::vector<CodePair> cross_pairs(std::span<const std::string> codes_a,
                                  std::span<const std::string> codes_b) {
  std::vector<CodePair> out;
  out.reserve(codes_a.size() * codes_b.size());
  for (const auto& a : codes_a) {
    for (const auto& b : codes_b) out.push_back({a, b});
  }
  return out;
}

std::string RankedTable::to_tsv() const {
  std::string out = "code_a\tcode_b\tscore\tlabel_a\tlabel_b\tpromising\n";
  for (const auto& row : rows) {
    out += row.code_a + '\t' + row.code_b + '\t' + format_fixed(row.score, 10) + '\t' +
           row.label_a + '\t' + row.label_b + '\t' + (row.promising ? "yes" : "no") + '\n';
  }
  return out;
}

RankedTable rank_candidates(const PredictorModel& model, const EmbeddingTable& table,
                            const Vocabulary& vocab, std::span<const CodePair> pairs,
                            double promising_threshold, double secondary_threshold) {
  RankedTable ranked;
  ranked.promising_threshold = promising_threshold;
  ranked.secondary_threshold = secondary_threshold;
  ranked.rows.reserve(pairs.size());
  for (const auto& pair : pairs) {
    RankedRow row;
    row.code_a = to_lower(trim(pair.a));
    row.code_b = to_lower(trim(pair.b));
    row.score = score_pair(model, table, row.code_a, row.code_b);
    row.label_a = vocab.label(row.code_a);
    row.label_b = vocab.label(row.code_b);
    row.promising = row.score > promising_threshold;
    row.secondary = row.score > secondary_threshold;
    ranked.rows.push_back(std::move(row));
  }
  std::stable_sort(ranked.rows.begin(), ranked.rows.end(),
                   [](const RankedRow& x, const RankedRow& y) {
                     if (x.score != y.score) return x.score > y.score;
                     if (x.code_a != y.code_a) return x.code_a < y.code_a;
                     return x.code_b < y.code_b;
                   });
  return ranked;
}

}  // namespace lbd
