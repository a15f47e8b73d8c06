#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vocabhull/cw2v.hpp"

namespace vocabhull::cw2v {

namespace {

constexpr std::size_t kMaxNegativeRetries = 32;
constexpr std::uint64_t kOrderStream = 0xffffffffffffffffULL;
constexpr std::uint64_t kBufferStream = 0xfffffffffffffffeULL;

void check_id(TokenId id, std::size_t vocab_size, const char* what) {
  if (id >= vocab_size) {
    throw ValidationError(std::string(what) + " id " + std::to_string(id) +
                          " is outside the expanded vocabulary of size " +
                          std::to_string(vocab_size));
  }
}

}  // namespace

PairSampler::PairSampler(std::span<const Sentence> corpus, std::span<const DictEntry> dict,
                         std::size_t vocab_size, std::size_t window, std::size_t negatives,
                         double unigram_power)
    : corpus_(corpus),
      dict_(dict),
      vocab_size_(vocab_size),
      window_(window),
      negatives_(negatives) {
  if (window < 1) throw ValidationError("window must be >= 1");
  if (!(unigram_power >= 0.0)) throw ValidationError("unigram_power must be >= 0");

  std::vector<std::uint64_t> counts(vocab_size, 0);
  std::uint64_t total = 0;
  for (const auto& sentence : corpus) {
    for (TokenId id : sentence) {
      check_id(id, vocab_size, "corpus");
      ++counts[id];
      ++total;
    }
  }
  for (const auto& e : dict) {
    check_id(e.source, vocab_size, "dictionary source");
    check_id(e.target, vocab_size, "dictionary target");
    ++counts[e.source];
    ++counts[e.target];
    total += 2;
  }
  if (total == 0) throw ValidationError("empty corpus and empty dictionary");

  double acc = 0.0;
  for (std::size_t id = 0; id < vocab_size; ++id) {
    if (counts[id] == 0) continue;
    acc += std::pow(static_cast<double>(counts[id]), unigram_power);
    cumulative_.push_back(acc);
    support_.push_back(static_cast<TokenId>(id));
  }
}

double PairSampler::negative_probability(TokenId id) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), id);
  if (it == support_.end() || *it != id) return 0.0;
  const auto k = static_cast<std::size_t>(it - support_.begin());
  const double lo = k == 0 ? 0.0 : cumulative_[k - 1];
  return (cumulative_[k] - lo) / cumulative_.back();
}

void PairSampler::add_negatives(TokenId center, TokenId context, Engine& rng,
                                std::vector<TrainingPair>& out) const {
  if (negatives_ == 0) return;
  if (support_.size() == 1 && support_.front() == context) return;
  std::uniform_real_distribution<double> uniform(0.0, cumulative_.back());
  for (std::size_t k = 0; k < negatives_; ++k) {
    for (std::size_t attempt = 0; attempt < kMaxNegativeRetries; ++attempt) {
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), uniform(rng));
      if (it == cumulative_.end()) --it;
      const TokenId id = support_[static_cast<std::size_t>(it - cumulative_.begin())];
      if (id != context) {
        out.push_back({center, id, Label::negative});
        break;
      }
    }
  }
}

void PairSampler::emit_unit(std::size_t unit, Engine& rng, std::vector<TrainingPair>& out) const {
  if (unit < corpus_.size()) {
    const Sentence& s = corpus_[unit];
    const std::size_t len = s.size();
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t lo = i >= window_ ? i - window_ : 0;
      const std::size_t hi = std::min(len - 1, i + window_);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        out.push_back({s[i], s[j], Label::positive});
        add_negatives(s[i], s[j], rng, out);
      }
    }
    return;
  }
  const DictEntry& e = dict_[unit - corpus_.size()];
  out.push_back({e.source, e.target, Label::positive});
  add_negatives(e.source, e.target, rng, out);
  out.push_back({e.target, e.source, Label::positive});
  add_negatives(e.target, e.source, rng, out);
}

void PairSampler::epoch(Seed seed, std::size_t epoch, std::size_t shuffle_buffer,
                        const std::function<void(const TrainingPair&)>& sink) const {
  const Seed epoch_seed = derive(seed, epoch);
  std::vector<std::size_t> order(unit_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto order_rng = make_engine(epoch_seed, kOrderStream);
  std::shuffle(order.begin(), order.end(), order_rng);

  auto buffer_rng = make_engine(epoch_seed, kBufferStream);
  std::vector<TrainingPair> buffer;
  buffer.reserve(std::min<std::size_t>(shuffle_buffer, 1 << 20));
  std::vector<TrainingPair> unit_pairs;

  for (std::size_t unit : order) {
    unit_pairs.clear();
    auto rng = make_engine(epoch_seed, unit);
    emit_unit(unit, rng, unit_pairs);
    for (const auto& p : unit_pairs) {
      if (shuffle_buffer <= 1) {
        sink(p);
      } else if (buffer.size() < shuffle_buffer) {
        buffer.push_back(p);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
        auto& slot = buffer[pick(buffer_rng)];
        sink(slot);
        slot = p;
      }
    }
  }
  std::shuffle(buffer.begin(), buffer.end(), buffer_rng);
  for (const auto& p : buffer) sink(p);
}

std::vector<TrainingPair> build_pairs(std::span<const Sentence> corpus,
                                      std::span<const DictEntry> dict, std::size_t vocab_size,
                                      std::size_t window, std::size_t negatives,
                                      double unigram_power, Seed seed) {
  const PairSampler sampler(corpus, dict, vocab_size, window, negatives, unigram_power);
  std::vector<TrainingPair> out;
  sampler.epoch(seed, 0, 0, [&](const TrainingPair& p) { out.push_back(p); });
  return out;
}

}  // namespace vocabhull::cw2v
