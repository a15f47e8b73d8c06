#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/manifest.hpp"
#include "json.hpp"
#include "vocabhull/cw2v.hpp"
#include "vocabhull/hull.hpp"
#include "vocabhull/lmtoy.hpp"
#include "vocabhull/random.hpp"
#include "vocabhull/tokenize.hpp"

namespace vocabhull::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct Context {
  RunManifest& manifest;
  std::ostream& log;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<json(Context&)> run;
};

std::vector<Command> register_commands(CLI::App& root);

// Runs the whole expansion described by an INI-style config.
json run_pipeline(const fs::path& config, Context& ctx);

// A pipeline stage failed; carries the exit code of the underlying error.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, const std::string& message, int code)
      : std::runtime_error("stage " + stage + ": " + message),
        stage_(std::move(stage)),
        code_(code) {}
  const std::string& stage() const noexcept { return stage_; }
  int code() const noexcept { return code_; }

 private:
  std::string stage_;
  int code_;
};

Seed require_seed(const std::optional<std::uint64_t>& seed, const std::string& why);

// Refuses to overwrite any input.
void check_outputs(const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs);

// Every regular file of `path` (or `path` itself), in name order.
std::vector<fs::path> corpus_files(const fs::path& path);

// One sentence per line. Whitespace-only tokens are dropped and a sentence is
// split wherever the tokenizer needed a byte fallback, so every id is a
// vocabulary row.
std::vector<cw2v::Sentence> tokenize_corpus(const std::vector<fs::path>& files,
                                            const tokenize::LongestMatchTokenizer& tok);

struct Dictionary {
  std::vector<cw2v::DictEntry> entries;
  std::size_t skipped = 0;  // lines whose words are not single vocabulary tokens
};

// `source_word<TAB>target_word` per line.
Dictionary read_dictionary(const fs::path& path, const tokenize::LongestMatchTokenizer& tok);

// One JSON object per epoch.
std::string loss_log(const std::vector<double>& epoch_loss);

json parameter_json(const cw2v::ParameterCount& p);

}  // namespace vocabhull::cli

namespace vocabhull::cli {

struct HullCheck {
  std::size_t probe = 0;
  std::optional<Seed> seed;
  double tol = hull::kDefaultTol;
  std::size_t max_iters = hull::kDefaultMaxIters;
};

json hull_report(const EmbeddingMatrix& targets, const EmbeddingMatrix& sources,
                 const HullCheck& check);

json preservation_json(const lmtoy::PreservationReport& r, std::size_t steps);

}  // namespace vocabhull::cli
