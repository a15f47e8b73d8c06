#include "vocabhull/cw2v.hpp"

#include <cmath>
#include <random>
#include <string>
#include <unordered_map>

#include "vocabhull/initializers.hpp"
#include "vocabhull/parallel.hpp"

namespace vocabhull::cw2v {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Target rows of one side (input or head) touched by a batch, with their
// mixture weights and materialised embeddings.
struct SideCache {
  std::unordered_map<std::size_t, std::size_t> slot_of;  // target index -> slot
  std::vector<std::size_t> targets;                      // slot -> target index
  MatrixXd probs;                                        // slots x n
  MatrixXd rows;                                         // slots x d

  std::size_t slot(std::size_t target) {
    auto [it, inserted] = slot_of.emplace(target, targets.size());
    if (inserted) targets.push_back(target);
    return it->second;
  }

  void materialize(const MixingWeights& mix, const MatrixXd& sources) {
    const auto slots = static_cast<Index>(targets.size());
    probs.resize(slots, sources.rows());
    rows.resize(slots, sources.cols());
    parallel_for(targets.size(), [&](std::size_t s) {
      const auto si = static_cast<Index>(s);
      RowVectorXd z = mix.a.row(static_cast<Index>(targets[s])) * mix.b;
      z.array() -= z.maxCoeff();
      z = z.array().exp();
      z /= z.sum();
      probs.row(si) = z;
      rows.row(si) = z * sources;
    });
  }
};

void check_weights(const MixingWeights& mix, const Eigen::MatrixXd& sources, const char* side) {
  if (mix.a.cols() != mix.b.rows()) {
    throw ValidationError(std::string(side) + " mixing factors have mismatched rank");
  }
  if (mix.b.cols() != sources.rows()) {
    throw ValidationError(std::string(side) + " mixing weights cover " +
                          std::to_string(mix.b.cols()) + " sources, table has " +
                          std::to_string(sources.rows()));
  }
}

struct BatchContext {
  std::size_t n = 0;
  std::size_t vocab = 0;
  SideCache in;
  SideCache head;
  std::vector<std::size_t> center_slot;   // per pair; kNone for source rows
  std::vector<std::size_t> context_slot;
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

BatchContext prepare(std::span<const TrainingPair> batch, const MixingWeights& input,
                     const MixingWeights& head, const SourceTables& sources) {
  if (batch.empty()) throw ValidationError("empty batch");
  check_weights(input, sources.input, "input");
  check_weights(head, sources.head, "head");
  if (input.n_target() != head.n_target()) {
    throw ValidationError("input and head mixtures disagree on the target count");
  }
  if (sources.input.cols() != sources.head.cols()) {
    throw ValidationError("input and head source tables have different dims");
  }

  BatchContext ctx;
  ctx.n = sources.n_source();
  ctx.vocab = ctx.n + input.n_target();
  ctx.center_slot.resize(batch.size(), kNone);
  ctx.context_slot.resize(batch.size(), kNone);
  for (std::size_t p = 0; p < batch.size(); ++p) {
    const auto& pair = batch[p];
    if (pair.center >= ctx.vocab || pair.context >= ctx.vocab) {
      throw ValidationError("pair (" + std::to_string(pair.center) + ", " +
                            std::to_string(pair.context) + ") outside vocabulary of size " +
                            std::to_string(ctx.vocab));
    }
    if (pair.center >= ctx.n) ctx.center_slot[p] = ctx.in.slot(pair.center - ctx.n);
    if (pair.context >= ctx.n) ctx.context_slot[p] = ctx.head.slot(pair.context - ctx.n);
  }
  ctx.in.materialize(input, sources.input);
  ctx.head.materialize(head, sources.head);
  return ctx;
}

RowVectorXd center_row(const BatchContext& ctx, const SourceTables& s, const TrainingPair& p,
                       std::size_t slot) {
  return slot == kNone ? RowVectorXd(s.input.row(p.center))
                       : RowVectorXd(ctx.in.rows.row(static_cast<Index>(slot)));
}

RowVectorXd context_row(const BatchContext& ctx, const SourceTables& s, const TrainingPair& p,
                        std::size_t slot) {
  return slot == kNone ? RowVectorXd(s.head.row(p.context))
                       : RowVectorXd(ctx.head.rows.row(static_cast<Index>(slot)));
}

[[noreturn]] void non_finite(const TrainingPair& p, double score) {
  throw NumericError("non-finite loss for pair (center " + std::to_string(p.center) +
                     ", context " + std::to_string(p.context) + ", " +
                     (p.label == Label::positive ? "positive" : "negative") + "), score " +
                     std::to_string(score));
}

// Chain rule through E_t = softmax(A B) E_s for the touched rows of one side.
void mixture_backward(const SideCache& cache, const MatrixXd& grad_rows, const MixingWeights& mix,
                      const MatrixXd& sources, MixingWeights& grad) {
  const auto slots = static_cast<Index>(cache.targets.size());
  if (slots == 0) return;
  MatrixXd dz(slots, sources.rows());
  MatrixXd a_rows(slots, mix.a.cols());
  parallel_for(cache.targets.size(), [&](std::size_t s) {
    const auto si = static_cast<Index>(s);
    const auto ti = static_cast<Index>(cache.targets[s]);
    // dL/dW_j = g . e_j ; dL/dz_j = p_j (dL/dW_j - sum_k p_k dL/dW_k)
    const RowVectorXd dw = grad_rows.row(si) * sources.transpose();
    const RowVectorXd p = cache.probs.row(si);
    dz.row(si) = p.cwiseProduct((dw.array() - p.dot(dw)).matrix());
    grad.a.row(ti) = dz.row(si) * mix.b.transpose();
    a_rows.row(si) = mix.a.row(ti);
  });
  grad.b.noalias() += a_rows.transpose() * dz;
}

}  // namespace

Eigen::MatrixXd MixingWeights::weights() const { return init::row_softmax(logits()); }

MixingWeights MixingWeights::zeros(std::size_t n_target, std::size_t n_source, std::size_t rank) {
  return {MatrixXd::Zero(static_cast<Index>(n_target), static_cast<Index>(rank)),
          MatrixXd::Zero(static_cast<Index>(rank), static_cast<Index>(n_source))};
}

MixingWeights MixingWeights::gaussian(std::size_t n_target, std::size_t n_source,
                                      std::size_t rank, double variance, Seed seed) {
  MixingWeights w = zeros(n_target, n_source, rank);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  auto rng_a = make_engine(seed, 0);
  for (Index i = 0; i < w.a.rows(); ++i) {
    for (Index k = 0; k < w.a.cols(); ++k) w.a(i, k) = normal(rng_a);
  }
  auto rng_b = make_engine(seed, 1);
  for (Index k = 0; k < w.b.rows(); ++k) {
    for (Index j = 0; j < w.b.cols(); ++j) w.b(k, j) = normal(rng_b);
  }
  return w;
}

ParameterCount parameter_count(std::uint64_t n_source, std::uint64_t n_target, std::uint64_t rank) {
  ParameterCount c;
  c.factorized_per_matrix = rank * (n_source + n_target);
  c.factorized_total = 2 * c.factorized_per_matrix;
  c.full_w_per_matrix = n_target * n_source;
  c.full_w_total = 2 * c.full_w_per_matrix;
  c.unfactorized_expanded = (n_source + n_target) * n_target;
  return c;
}

void Cw2vConfig::validate() const {
  if (window < 1) throw ValidationError("window must be >= 1");
  if (rank < 1) throw ValidationError("rank must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("lr must be > 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(unigram_power >= 0.0)) throw ValidationError("unigram_power must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (!(init_variance >= 0.0)) throw ValidationError("init_variance must be >= 0");
}

SourceTables::SourceTables(const EmbeddingMatrix& in, const EmbeddingMatrix& hd)
    : SourceTables(in.to_eigen(), hd.to_eigen()) {}

SourceTables::SourceTables(Eigen::MatrixXd in, Eigen::MatrixXd hd)
    : input(std::move(in)), head(std::move(hd)) {
  if (input.rows() != head.rows()) {
    throw ValidationError("source input has " + std::to_string(input.rows()) +
                          " rows, source head has " + std::to_string(head.rows()));
  }
}

double forward_loss(std::span<const TrainingPair> batch, const MixingWeights& input,
                    const MixingWeights& head, const SourceTables& sources) {
  const BatchContext ctx = prepare(batch, input, head, sources);
  double loss = 0.0;
  for (std::size_t p = 0; p < batch.size(); ++p) {
    const auto u = center_row(ctx, sources, batch[p], ctx.center_slot[p]);
    const auto v = context_row(ctx, sources, batch[p], ctx.context_slot[p]);
    const double score = u.dot(v);
    const double l = batch[p].label == Label::positive ? softplus(-score) : softplus(score);
    if (!std::isfinite(l)) non_finite(batch[p], score);
    loss += l;
  }
  return loss;
}

Gradients backward(std::span<const TrainingPair> batch, const MixingWeights& input,
                   const MixingWeights& head, const SourceTables& sources) {
  const BatchContext ctx = prepare(batch, input, head, sources);
  const auto d = sources.input.cols();

  Gradients g;
  g.input = MixingWeights::zeros(input.n_target(), input.n_source(), input.rank());
  g.head = MixingWeights::zeros(head.n_target(), head.n_source(), head.rank());

  MatrixXd grad_u = MatrixXd::Zero(static_cast<Index>(ctx.in.targets.size()), d);
  MatrixXd grad_v = MatrixXd::Zero(static_cast<Index>(ctx.head.targets.size()), d);
  for (std::size_t p = 0; p < batch.size(); ++p) {
    const std::size_t cs = ctx.center_slot[p];
    const std::size_t xs = ctx.context_slot[p];
    const auto u = center_row(ctx, sources, batch[p], cs);
    const auto v = context_row(ctx, sources, batch[p], xs);
    const double score = u.dot(v);
    double l;
    double dscore;
    if (batch[p].label == Label::positive) {
      l = softplus(-score);
      dscore = -sigmoid(-score);
    } else {
      l = softplus(score);
      dscore = sigmoid(score);
    }
    if (!std::isfinite(l)) non_finite(batch[p], score);
    g.loss += l;
    if (cs != kNone) grad_u.row(static_cast<Index>(cs)) += dscore * v;
    if (xs != kNone) grad_v.row(static_cast<Index>(xs)) += dscore * u;
  }

  mixture_backward(ctx.in, grad_u, input, sources.input, g.input);
  mixture_backward(ctx.head, grad_v, head, sources.head, g.head);
  return g;
}

namespace {

struct AdamState {
  MatrixXd m;
  MatrixXd v;
  explicit AdamState(const MatrixXd& like)
      : m(MatrixXd::Zero(like.rows(), like.cols())), v(MatrixXd::Zero(like.rows(), like.cols())) {}

  void step(MatrixXd& param, const MatrixXd& grad, const Cw2vConfig& c, double bias1,
            double bias2) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    param.array() -= c.lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + c.epsilon);
  }
};

}  // namespace

TrainResult train(std::span<const Sentence> corpus, std::span<const DictEntry> dict,
                  const EmbeddingMatrix& sources_input, const EmbeddingMatrix& sources_head,
                  std::size_t n_target, const Cw2vConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (n_target < 1) throw ValidationError("n_target must be >= 1");
  const SourceTables sources(sources_input, sources_head);
  const std::size_t n = sources.n_source();
  const PairSampler sampler(corpus, dict, n + n_target, config.window, config.negatives,
                            config.unigram_power);

  TrainResult state;
  state.input = MixingWeights::gaussian(n_target, n, config.rank, config.init_variance,
                                        derive(config.seed, 1));
  state.head = MixingWeights::gaussian(n_target, n, config.rank, config.init_variance,
                                       derive(config.seed, 2));

  AdamState adam_ai(state.input.a), adam_bi(state.input.b);
  AdamState adam_ah(state.head.a), adam_bh(state.head.b);
  std::uint64_t t = 0;
  const Seed pair_seed = derive(config.seed, 3);

  std::vector<TrainingPair> batch;
  batch.reserve(config.batch_size);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;

    auto run_batch = [&] {
      Gradients g;
      try {
        g = backward(batch, state.input, state.head, sources);
      } catch (const NumericError& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what(), state);
      }
      if (!std::isfinite(g.loss) || !g.input.a.allFinite() || !g.input.b.allFinite() ||
          !g.head.a.allFinite() || !g.head.b.allFinite()) {
        throw TrainingDiverged("loss became non-finite in epoch " + std::to_string(epoch), state);
      }
      ++t;
      const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
      const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
      adam_ai.step(state.input.a, g.input.a, config, bias1, bias2);
      adam_bi.step(state.input.b, g.input.b, config, bias1, bias2);
      adam_ah.step(state.head.a, g.head.a, config, bias1, bias2);
      adam_bh.step(state.head.b, g.head.b, config, bias1, bias2);
      epoch_loss += g.loss;
      epoch_pairs += batch.size();
      batch.clear();
    };

    sampler.epoch(pair_seed, epoch, config.shuffle_buffer, [&](const TrainingPair& p) {
      batch.push_back(p);
      if (batch.size() == config.batch_size) run_batch();
    });
    if (!batch.empty()) run_batch();

    const double mean = epoch_pairs == 0 ? 0.0 : epoch_loss / static_cast<double>(epoch_pairs);
    state.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, state.input, state.head, mean);
  }
  return state;
}

EmbeddingMatrix materialize(const MixingWeights& mixing, const EmbeddingMatrix& sources) {
  if (mixing.a.cols() != mixing.b.rows()) {
    throw ValidationError("mixing factors have mismatched rank");
  }
  return init::init_convex(mixing.logits(), sources);
}

}  // namespace vocabhull::cw2v
