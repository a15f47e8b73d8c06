#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vocabhull/error.hpp"
#include "vocabhull/matrix.hpp"
#include "vocabhull/random.hpp"
#include "vocabhull/vocab.hpp"

// Constrained word2vec: skip-gram with negative sampling where every target
// token's input and LM-head embedding is a row-softmax mixture of the frozen
// source rows, E_t = softmax(A B) E_s. Only the factors A (n' x r) and
// B (r x n) of each mixture are trained.
//
// Ids index the expanded vocabulary: [0, n) are source rows, [n, n + n') are
// target rows.
namespace vocabhull::cw2v {

struct MixingWeights {
  Eigen::MatrixXd a;  // n_target x rank
  Eigen::MatrixXd b;  // rank x n_source

  std::size_t rank() const noexcept { return static_cast<std::size_t>(a.cols()); }
  std::size_t n_target() const noexcept { return static_cast<std::size_t>(a.rows()); }
  std::size_t n_source() const noexcept { return static_cast<std::size_t>(b.cols()); }

  Eigen::MatrixXd logits() const { return a * b; }
  // row_softmax(A B); rows lie on the probability simplex.
  Eigen::MatrixXd weights() const;

  static MixingWeights zeros(std::size_t n_target, std::size_t n_source, std::size_t rank);
  // Entries ~ Normal(0, variance).
  static MixingWeights gaussian(std::size_t n_target, std::size_t n_source, std::size_t rank,
                                double variance, Seed seed);
};

struct ParameterCount {
  std::uint64_t factorized_per_matrix = 0;    // r (n + n')
  std::uint64_t factorized_total = 0;         // two mixing matrices
  std::uint64_t full_w_per_matrix = 0;        // n' n
  std::uint64_t full_w_total = 0;             // two full W matrices
  std::uint64_t unfactorized_expanded = 0;    // (n + n') n'
};

ParameterCount parameter_count(std::uint64_t n_source, std::uint64_t n_target, std::uint64_t rank);

enum class Label : std::uint8_t { positive, negative };

struct TrainingPair {
  TokenId center = 0;
  TokenId context = 0;
  Label label = Label::positive;
  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

// A bilingual dictionary entry, as expanded-vocabulary ids.
struct DictEntry {
  TokenId source = 0;
  TokenId target = 0;
};

using Sentence = std::vector<TokenId>;

struct Cw2vConfig {
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t rank = 1024;
  std::size_t epochs = 5;
  double lr = 1e-3;
  Seed seed{};
  double unigram_power = 0.75;
  std::size_t batch_size = 64;
  std::size_t shuffle_buffer = 1 << 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double init_variance = 0.02;

  void validate() const;
};

// Generates skip-gram pairs. Units (sentences and dictionary entries) are
// shuffled per epoch; a unit yields its positives in order, each followed by
// `negatives` draws from the unigram^power distribution that exclude the
// positive's context. The stream then passes through a bounded shuffle
// buffer. Everything is a pure function of (inputs, seed, epoch).
class PairSampler {
 public:
  PairSampler(std::span<const Sentence> corpus, std::span<const DictEntry> dict,
              std::size_t vocab_size, std::size_t window, std::size_t negatives,
              double unigram_power);

  void epoch(Seed seed, std::size_t epoch, std::size_t shuffle_buffer,
             const std::function<void(const TrainingPair&)>& sink) const;

  std::size_t unit_count() const noexcept { return corpus_.size() + dict_.size(); }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  // Probability of drawing `id` as a negative before exclusion.
  double negative_probability(TokenId id) const;

 private:
  void emit_unit(std::size_t unit, Engine& rng, std::vector<TrainingPair>& out) const;
  void add_negatives(TokenId center, TokenId context, Engine& rng,
                     std::vector<TrainingPair>& out) const;

  std::span<const Sentence> corpus_;
  std::span<const DictEntry> dict_;
  std::size_t vocab_size_;
  std::size_t window_;
  std::size_t negatives_;
  std::vector<double> cumulative_;  // unnormalised CDF over ids
  std::vector<TokenId> support_;    // ids with non-zero probability
};

// One epoch of pairs in emission order, without the shuffle buffer.
// Throws ValidationError when both corpus and dictionary are empty or an id
// is out of range.
std::vector<TrainingPair> build_pairs(std::span<const Sentence> corpus,
                                      std::span<const DictEntry> dict, std::size_t vocab_size,
                                      std::size_t window, std::size_t negatives,
                                      double unigram_power, Seed seed);

// Frozen source rows in double precision.
struct SourceTables {
  Eigen::MatrixXd input;
  Eigen::MatrixXd head;

  SourceTables(const EmbeddingMatrix& input, const EmbeddingMatrix& head);
  SourceTables(Eigen::MatrixXd input, Eigen::MatrixXd head);
  std::size_t n_source() const noexcept { return static_cast<std::size_t>(input.rows()); }
};

struct Gradients {
  double loss = 0.0;
  MixingWeights input;  // dL/dA, dL/dB for the input-side mixture
  MixingWeights head;
};

// Sum over the batch of -log s(u.v) for positives and -log s(-u.v) for
// negatives, u from the input table and v from the LM-head table.
double forward_loss(std::span<const TrainingPair> batch, const MixingWeights& input,
                    const MixingWeights& head, const SourceTables& sources);

// Loss and its gradient with respect to the four factors. Source rows carry
// no parameters, so a batch of source-only pairs yields all-zero gradients.
Gradients backward(std::span<const TrainingPair> batch, const MixingWeights& input,
                   const MixingWeights& head, const SourceTables& sources);

struct TrainResult {
  MixingWeights input;
  MixingWeights head;
  std::vector<double> epoch_loss;  // mean loss per pair, one per epoch
};

// Raised when a batch loss turns non-finite. last_good() holds the state
// before that batch.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, TrainResult last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const TrainResult& last_good() const noexcept { return last_good_; }

 private:
  TrainResult last_good_;
};

// Called after every epoch with the epoch index, current mixtures and mean loss.
using EpochCallback =
    std::function<void(std::size_t, const MixingWeights&, const MixingWeights&, double)>;

TrainResult train(std::span<const Sentence> corpus, std::span<const DictEntry> dict,
                  const EmbeddingMatrix& sources_input, const EmbeddingMatrix& sources_head,
                  std::size_t n_target, const Cw2vConfig& config,
                  const EpochCallback& on_epoch = {});

// Target block softmax(A B) E_s.
EmbeddingMatrix materialize(const MixingWeights& mixing, const EmbeddingMatrix& sources);

}  // namespace vocabhull::cw2v
