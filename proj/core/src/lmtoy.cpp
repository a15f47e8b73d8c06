#include "vocabhull/lmtoy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "vocabhull/error.hpp"
#include "vocabhull/parallel.hpp"

namespace vocabhull::lmtoy {

namespace {

constexpr std::uint64_t kEncoderStream = 1;
constexpr std::uint64_t kPromptStream = 2;
constexpr std::size_t kMaxPromptLength = 8;

// Row-major double copy of head rows [first, rows) for the decode inner loop.
struct HeadTable {
  std::size_t rows;
  std::size_t dim;
  std::size_t first;
  std::vector<double> data;

  explicit HeadTable(const EmbeddingMatrix& m, std::size_t first_row = 0)
      : rows(m.rows()),
        dim(m.dim()),
        first(first_row),
        data(m.data().begin() + static_cast<std::ptrdiff_t>(first_row * m.dim()), m.data().end()) {}

  // Returns (argmax, max value), lowest index on ties.
  std::pair<TokenId, double> best(std::span<const double> h) const {
    std::size_t arg = first;
    double best = -INFINITY;
    for (std::size_t j = first; j < rows; ++j) {
      const double* r = data.data() + (j - first) * dim;
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc += h[k] * r[k];
      if (j == first || acc > best) {
        best = acc;
        arg = j;
      }
    }
    return {static_cast<TokenId>(arg), best};
  }
};

DecodeTrace decode(std::span<const TokenId> prompt, const HeadTable& head,
                   const PrefixEncoder& encoder, std::size_t steps) {
  DecodeTrace trace;
  trace.prompt.assign(prompt.begin(), prompt.end());
  trace.generated.reserve(steps);
  trace.max_logits.reserve(steps);
  std::vector<TokenId> sequence(prompt.begin(), prompt.end());
  std::vector<double> h(encoder.dim());
  for (std::size_t s = 0; s < steps; ++s) {
    encoder.encode_into(sequence, h);
    const auto [token, value] = head.best(h);
    trace.generated.push_back(token);
    trace.max_logits.push_back(value);
    sequence.push_back(token);
  }
  return trace;
}

void check_prompt(std::span<const TokenId> prompt, std::size_t vocab) {
  for (TokenId t : prompt) {
    if (t >= vocab) {
      throw ValidationError("prompt token " + std::to_string(t) + " outside head of " +
                            std::to_string(vocab) + " rows");
    }
  }
}

}  // namespace

PrefixEncoder::PrefixEncoder(Seed seed, std::size_t dim) : seed_(seed), dim_(dim) {
  if (dim < 1) throw ValidationError("encoder dim must be >= 1");
}

std::vector<double> PrefixEncoder::encode(std::span<const TokenId> tokens) const {
  std::vector<double> h(dim_);
  encode_into(tokens, h);
  return h;
}

void PrefixEncoder::encode_into(std::span<const TokenId> tokens, std::span<double> out) const {
  if (out.size() != dim_) throw ValidationError("encoder output has wrong dim");
  std::uint64_t key = mix64(seed_.value ^ 0x5851f42d4c957f2dULL);
  for (TokenId t : tokens) key = mix64(key ^ mix64(static_cast<std::uint64_t>(t) + 1));
  key = mix64(key ^ tokens.size());

  double norm2 = 0.0;
  for (std::uint64_t block = 0; norm2 == 0.0; ++block) {
    for (std::size_t k = 0; k < dim_; ++k) {
      out[k] = counter_normal(key, block * dim_ + k);
      norm2 += out[k] * out[k];
    }
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
}

DecodeTrace greedy_decode(std::span<const TokenId> prompt, const EmbeddingMatrix& head,
                          const PrefixEncoder& encoder, std::size_t steps) {
  if (steps < 1) throw ValidationError("steps must be >= 1");
  if (head.dim() != encoder.dim()) {
    throw ValidationError("head dim " + std::to_string(head.dim()) + " != encoder dim " +
                          std::to_string(encoder.dim()));
  }
  check_prompt(prompt, head.rows());
  return decode(prompt, HeadTable(head), encoder, steps);
}

std::vector<TokenId> sample_prompt(Seed seed, std::size_t index, std::size_t n_source) {
  if (n_source < 1) throw ValidationError("empty source vocabulary");
  auto rng = make_engine(derive(seed, kPromptStream), index);
  std::uniform_int_distribution<std::size_t> length(1, kMaxPromptLength);
  std::uniform_int_distribution<TokenId> token(0, static_cast<TokenId>(n_source - 1));
  std::vector<TokenId> prompt(length(rng));
  for (auto& t : prompt) t = token(rng);
  return prompt;
}

std::vector<PreservationReport> preservation_reports(
    const EmbeddingMatrix& source_head, std::span<const EmbeddingMatrix> expanded_heads,
    std::size_t n_prompts, std::size_t steps, Seed seed) {
  if (steps < 1) throw ValidationError("steps must be >= 1");
  if (n_prompts < 1) throw ValidationError("n_prompts must be >= 1");
  const std::size_t n = source_head.rows();
  for (const auto& head : expanded_heads) {
    if (head.dim() != source_head.dim()) {
      throw ValidationError("expanded head dim differs from the source head");
    }
    if (head.rows() < n) {
      throw ValidationError("expanded head has fewer rows than the source head");
    }
  }

  const PrefixEncoder encoder(derive(seed, kEncoderStream), source_head.dim());
  const HeadTable source_table(source_head);
  // Intact heads: score target rows only, a target must beat the source max strictly.
  std::vector<char> intact(expanded_heads.size());
  std::vector<HeadTable> tables;
  tables.reserve(expanded_heads.size());
  for (std::size_t e = 0; e < expanded_heads.size(); ++e) {
    const auto& head = expanded_heads[e];
    intact[e] = std::equal(source_head.data().begin(), source_head.data().end(),
                           head.data().begin()) &&
                head.rows() > n;
    tables.emplace_back(head, intact[e] ? n : 0);
  }

  // found[e][p] is meaningful only where diverged[e][p] is set.
  std::vector<std::vector<Divergence>> found(expanded_heads.size(),
                                             std::vector<Divergence>(n_prompts));
  std::vector<std::vector<char>> diverged(expanded_heads.size(), std::vector<char>(n_prompts, 0));

  // Hidden states are shared along the source trace until first divergence.
  parallel_for(n_prompts, [&](std::size_t p) {
    std::vector<TokenId> sequence = sample_prompt(seed, p, n);
    std::vector<double> h(encoder.dim());
    std::size_t open = tables.size();
    for (std::size_t s = 0; s < steps && open > 0; ++s) {
      encoder.encode_into(sequence, h);
      const auto [reference, reference_value] = source_table.best(h);
      for (std::size_t e = 0; e < tables.size(); ++e) {
        if (diverged[e][p]) continue;
        TokenId token;
        if (intact[e]) {
          const auto [t, v] = tables[e].best(h);
          token = v > reference_value ? t : reference;
        } else {
          token = tables[e].best(h).first;
        }
        if (token != reference) {
          diverged[e][p] = 1;
          found[e][p] = {p, s, reference, token, token >= n};
          --open;
        }
      }
      sequence.push_back(reference);
    }
  }, 16);

  std::vector<PreservationReport> reports(expanded_heads.size());
  for (std::size_t e = 0; e < reports.size(); ++e) {
    auto& r = reports[e];
    r.prompts = n_prompts;
    for (std::size_t p = 0; p < n_prompts; ++p) {
      if (diverged[e][p]) {
        r.divergences.push_back(found[e][p]);
      } else {
        ++r.matched;
      }
    }
    r.match_fraction = static_cast<double>(r.matched) / static_cast<double>(n_prompts);
  }
  return reports;
}

PreservationReport preservation_report(const EmbeddingMatrix& source_head,
                                       const ExpandedModel& expanded, std::size_t n_prompts,
                                       std::size_t steps, Seed seed) {
  if (expanded.source_size != source_head.rows()) {
    throw ValidationError("expanded model boundary " + std::to_string(expanded.source_size) +
                          " != source head rows " + std::to_string(source_head.rows()));
  }
  if (expanded.lm_head.rows() != expanded.source_size + expanded.target_size) {
    throw ValidationError("expanded LM head row count does not match its boundary");
  }
  const EmbeddingMatrix heads[] = {expanded.lm_head};
  return preservation_reports(source_head, heads, n_prompts, steps, seed).front();
}

}  // namespace vocabhull::lmtoy
