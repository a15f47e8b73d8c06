#include "cli/common.hpp"

#include <algorithm>
#include <sstream>

#include "vocabhull/error.hpp"
#include "vocabhull/io.hpp"

namespace vocabhull::cli {

namespace {

bool whitespace_only(const std::string& piece) {
  return std::all_of(piece.begin(), piece.end(),
                     [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

std::optional<TokenId> single_token(const std::string& word,
                                    const tokenize::LongestMatchTokenizer& tok) {
  for (const std::string& text : {std::string(tokenize::kSpace) + word, word}) {
    std::vector<TokenId> kept;
    bool fallback = false;
    for (TokenId id : tok.encode(text)) {
      if (tok.is_fallback(id)) fallback = true;
      if (!whitespace_only(tok.piece(id))) kept.push_back(id);
    }
    if (!fallback && kept.size() == 1) return kept.front();
  }
  return std::nullopt;
}

}  // namespace

Seed require_seed(const std::optional<std::uint64_t>& seed, const std::string& why) {
  if (!seed) throw ValidationError("--seed is required " + why);
  return Seed{*seed};
}

void check_outputs(const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
  for (const auto& out : outputs) {
    const auto o = fs::weakly_canonical(out);
    for (const auto& in : inputs) {
      if (o == fs::weakly_canonical(in)) {
        throw ValidationError("output " + out.string() + " would overwrite input " + in.string());
      }
    }
  }
}

std::vector<fs::path> corpus_files(const fs::path& path) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec)) return {path};
  if (!fs::is_directory(path, ec)) throw IoError("corpus not found: " + path.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("corpus directory has no files: " + path.string());
  return files;
}

std::vector<cw2v::Sentence> tokenize_corpus(const std::vector<fs::path>& files,
                                            const tokenize::LongestMatchTokenizer& tok) {
  std::vector<cw2v::Sentence> sentences;
  for (const auto& f : files) {
    for (const auto& line : read_lines(f)) {
      cw2v::Sentence current;
      for (TokenId id : tok.encode(std::string(tokenize::kSpace) + line)) {
        if (tok.is_fallback(id)) {
          if (!current.empty()) sentences.push_back(std::move(current));
          current.clear();
        } else if (!whitespace_only(tok.piece(id))) {
          current.push_back(id);
        }
      }
      if (!current.empty()) sentences.push_back(std::move(current));
    }
  }
  return sentences;
}

Dictionary read_dictionary(const fs::path& path, const tokenize::LongestMatchTokenizer& tok) {
  Dictionary dict;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError("dictionary line " + std::to_string(line_no) +
                            ": expected source_word<TAB>target_word");
    }
    const auto src = single_token(line.substr(0, tab), tok);
    const auto tgt = single_token(line.substr(tab + 1), tok);
    if (src && tgt) {
      dict.entries.push_back({*src, *tgt});
    } else {
      ++dict.skipped;
    }
  }
  return dict;
}

std::string loss_log(const std::vector<double>& epoch_loss) {
  std::ostringstream os;
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    os << json{{"epoch", e + 1}, {"mean_loss", epoch_loss[e]}}.dump() << '\n';
  }
  return os.str();
}

json parameter_json(const cw2v::ParameterCount& p) {
  return {{"factorized_per_matrix", p.factorized_per_matrix},
          {"factorized_total", p.factorized_total},
          {"full_w_per_matrix", p.full_w_per_matrix},
          {"full_w_total", p.full_w_total},
          {"unfactorized_expanded", p.unfactorized_expanded}};
}

}  // namespace vocabhull::cli
