#include <map>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cli/cli.hpp"
#include "cli/common.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/initializers.hpp"
#include "vocabhull/io.hpp"

namespace vocabhull::cli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kKeys = {
    {"model", {"source_input", "source_head"}},
    {"merge", {"source_vocab", "target_vocab", "n_new"}},
    {"init", {"method", "seed", "cov_scale", "weights"}},
    {"cw2v",
     {"corpus", "dict", "window", "negatives", "rank", "epochs", "lr", "batch_size",
      "unigram_power", "shuffle_buffer"}},
    {"verify", {"probe", "prompts", "steps", "seed", "tol", "max_iters"}},
    {"output", {"dir"}},
};

template <class F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const StageFailure&) {
    throw;
  } catch (const FormatError& e) {
    throw StageFailure(name, e.what(), kIo);
  } catch (const IoError& e) {
    throw StageFailure(name, e.what(), kIo);
  } catch (const fs::filesystem_error& e) {
    throw StageFailure(name, e.what(), kIo);
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what(), kValidation);
  }
}

class Config {
 public:
  Config(const fs::path& file) : base_(file.parent_path()) {
    try {
      pt::read_ini(file.string(), tree_);
    } catch (const pt::ini_parser_error& e) {
      if (!fs::exists(file)) throw IoError("cannot open config " + file.string());
      throw ValidationError(e.what());
    }
    for (const auto& [section, body] : tree_) {
      auto known = kKeys.find(section);
      if (known == kKeys.end()) throw ValidationError("unknown config section [" + section + "]");
      for (const auto& [key, value] : body) {
        if (!known->second.contains(key)) {
          throw ValidationError("unknown key '" + key + "' in [" + section + "]");
        }
      }
    }
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    auto v = tree_.get_optional<std::string>(section + "." + key);
    if (v && v->empty()) return std::nullopt;
    return v ? std::optional<std::string>(*v) : std::nullopt;
  }

  std::optional<fs::path> path(const std::string& section, const std::string& key) const {
    auto v = text(section, key);
    if (!v) return std::nullopt;
    fs::path p(*v);
    return p.is_absolute() ? p : base_ / p;
  }

  fs::path required_path(const std::string& section, const std::string& key) const {
    auto p = path(section, key);
    if (!p) throw ValidationError("[" + section + "] " + key + " is required");
    return *p;
  }

  template <class T>
  std::optional<T> number(const std::string& section, const std::string& key) const {
    auto v = text(section, key);
    if (!v) return std::nullopt;
    try {
      return tree_.get<T>(section + "." + key);
    } catch (const pt::ptree_bad_data&) {
      throw ValidationError("[" + section + "] " + key + ": not a number: " + *v);
    }
  }

  template <class T>
  T number(const std::string& section, const std::string& key, T fallback) const {
    return number<T>(section, key).value_or(fallback);
  }

 private:
  pt::ptree tree_;
  fs::path base_;
};

struct Blocks {
  EmbeddingMatrix input;
  EmbeddingMatrix head;
};

}  // namespace

json run_pipeline(const fs::path& config_path, Context& ctx) {
  auto& manifest = ctx.manifest;
  const Config cfg = stage("config", [&] { return Config(config_path); });
  manifest.add_input(config_path);

  const fs::path out_dir = stage("config", [&] { return cfg.required_path("output", "dir"); });
  const auto method_name = cfg.text("init", "method").value_or("mean");
  const bool use_cw2v = method_name == "cw2v";

  json stages = json::object();
  json artifacts = json::object();
  const auto emit = [&](const std::string& key, const fs::path& p) {
    manifest.add_output(p);
    artifacts[key] = p.string();
  };

  // Model and vocabulary inputs.
  const auto src_in_path = stage("config", [&] { return cfg.required_path("model", "source_input"); });
  const auto src_head_path = cfg.path("model", "source_head");
  const bool tied = !src_head_path || fs::weakly_canonical(*src_head_path) ==
                                          fs::weakly_canonical(src_in_path);
  const auto [s_in, s_head] = stage("load", [&] {
    auto in = read_matrix(src_in_path);
    manifest.add_input(src_in_path);
    if (tied) return std::pair{in, in};
    auto head = read_matrix(*src_head_path);
    manifest.add_input(*src_head_path);
    if (head.rows() != in.rows()) throw ValidationError("source head and input row counts differ");
    return std::pair{std::move(in), std::move(head)};
  });
  stage("output", [&] { fs::create_directories(out_dir); return 0; });

  std::optional<Vocab> merged_vocab;
  const std::size_t n_new = stage("merge-vocab", [&]() -> std::size_t {
    const auto src_vocab = cfg.path("merge", "source_vocab");
    const auto tgt_vocab = cfg.path("merge", "target_vocab");
    if (src_vocab && tgt_vocab) {
      const auto source = read_vocab(*src_vocab);
      const auto target = read_vocab(*tgt_vocab);
      manifest.add_input(*src_vocab);
      manifest.add_input(*tgt_vocab);
      if (source.size() != s_in.rows()) {
        throw ValidationError("source vocabulary has " + std::to_string(source.size()) +
                              " tokens but the source matrices have " +
                              std::to_string(s_in.rows()) + " rows");
      }
      const auto merged = tokenize::fuzzy_match(source, target);
      merged_vocab = merged.merged();
      std::string tsv;
      for (const auto& [token, row] : merged.copied) {
        tsv += escape_token(token) + '\t' + std::to_string(row) + '\n';
      }
      write_vocab(*merged_vocab, out_dir / "merged.vocab");
      write_text(tsv, out_dir / "copied.tsv");
      emit("merged_vocab", out_dir / "merged.vocab");
      emit("copied_map", out_dir / "copied.tsv");
      stages["merge-vocab"] = {{"source_size", source.size()},
                               {"target_size", target.size()},
                               {"copied", merged.copied.size()},
                               {"added", merged.added.size()}};
      if (merged.added.size() == 0) throw ValidationError("every target token already exists");
      return merged.added.size();
    }
    if (src_vocab || tgt_vocab) {
      throw ValidationError("[merge] needs both source_vocab and target_vocab");
    }
    const auto n = cfg.number<std::size_t>("merge", "n_new");
    if (!n || *n == 0) throw ValidationError("[merge] needs vocabularies or n_new >= 1");
    return *n;
  });

  const std::optional<std::uint64_t> init_seed = cfg.number<std::uint64_t>("init", "seed");
  Blocks blocks = stage(use_cw2v ? "train-cw2v" : "init", [&]() -> Blocks {
    if (use_cw2v) {
      if (!merged_vocab) throw ValidationError("cw2v needs [merge] source_vocab and target_vocab");
      cw2v::Cw2vConfig c;
      c.seed = require_seed(init_seed, "in [init] for cw2v");
      manifest.add_seed("init", c.seed.value);
      c.window = cfg.number("cw2v", "window", c.window);
      c.negatives = cfg.number("cw2v", "negatives", c.negatives);
      c.rank = cfg.number("cw2v", "rank", c.rank);
      c.epochs = cfg.number("cw2v", "epochs", c.epochs);
      c.lr = cfg.number("cw2v", "lr", c.lr);
      c.batch_size = cfg.number("cw2v", "batch_size", c.batch_size);
      c.unigram_power = cfg.number("cw2v", "unigram_power", c.unigram_power);
      c.shuffle_buffer = cfg.number("cw2v", "shuffle_buffer", c.shuffle_buffer);
      c.validate();

      const tokenize::LongestMatchTokenizer tok(*merged_vocab);
      const auto corpus_path = cfg.required_path("cw2v", "corpus");
      const auto sentences = tokenize_corpus(corpus_files(corpus_path), tok);
      manifest.add_input(corpus_path);
      Dictionary dict;
      if (auto d = cfg.path("cw2v", "dict")) {
        dict = read_dictionary(*d, tok);
        manifest.add_input(*d);
      }
      auto& log = ctx.log;
      const auto result = cw2v::train(
          sentences, dict.entries, s_in, s_head, n_new, c,
          [&](std::size_t e, const cw2v::MixingWeights&, const cw2v::MixingWeights&, double loss) {
            log << "train-cw2v: epoch " << e + 1 << "/" << c.epochs << " mean loss " << loss << '\n';
          });
      write_text(loss_log(result.epoch_loss), out_dir / "loss.jsonl");
      emit("loss_log", out_dir / "loss.jsonl");
      stages["train-cw2v"] = {{"sentences", sentences.size()},
                              {"dict_entries", dict.entries.size()},
                              {"dict_skipped", dict.skipped},
                              {"epoch_loss", result.epoch_loss},
                              {"parameters",
                               parameter_json(cw2v::parameter_count(s_in.rows(), n_new, c.rank))}};
      auto input = cw2v::materialize(result.input, s_in);
      auto head = cw2v::materialize(tied ? result.input : result.head, s_head);
      return {std::move(input), std::move(head)};
    }

    const auto method = init::parse_method(method_name);
    if (!method) throw ValidationError("[init] method: unknown initializer '" + method_name + "'");
    init::InitSpec spec;
    spec.kind = *method;
    spec.cov_scale = cfg.number("init", "cov_scale", init::kDefaultCovScale);
    const bool stochastic = *method == init::Method::random ||
                            *method == init::Method::univariate ||
                            *method == init::Method::multivariate;
    Seed seed{};
    if (stochastic) {
      seed = require_seed(init_seed, "in [init] for method " + method_name);
      manifest.add_seed("init", seed.value);
    }
    Eigen::MatrixXd logits;
    if (*method == init::Method::convex) {
      const auto w_path = cfg.required_path("init", "weights");
      const auto w = read_matrix(w_path);
      manifest.add_input(w_path);
      if (w.rows() != n_new || w.dim() != s_in.rows()) {
        throw ValidationError("[init] weights must be " + std::to_string(n_new) + " x " +
                              std::to_string(s_in.rows()));
      }
      logits = w.to_eigen();
      spec.logits = &logits;
    }
    spec.seed = derive(seed, 0);
    auto input = init::initialize(spec, n_new, s_in);
    if (tied) {
      auto head = input;
      stages["init"] = {{"method", method_name}, {"n_new", n_new}, {"tied", true}};
      return {std::move(input), std::move(head)};
    }
    spec.seed = derive(seed, 1);
    auto head = init::initialize(spec, n_new, s_head);
    stages["init"] = {{"method", method_name}, {"n_new", n_new}, {"tied", false}};
    return {std::move(input), std::move(head)};
  });

  const ExpandedModel model = stage("expand", [&] {
    write_matrix(blocks.input, out_dir / "target_input.vxe");
    write_matrix(blocks.head, out_dir / "target_head.vxe");
    emit("target_input", out_dir / "target_input.vxe");
    emit("target_head", out_dir / "target_head.vxe");
    auto m = expand(s_in, s_head, blocks.input, blocks.head);
    write_matrix(m.input, out_dir / "expanded_input.vxe");
    write_matrix(m.lm_head, out_dir / "expanded_head.vxe");
    emit("expanded_input", out_dir / "expanded_input.vxe");
    emit("expanded_head", out_dir / "expanded_head.vxe");
    stages["expand"] = {{"source_size", m.source_size}, {"target_size", m.target_size},
                        {"dim", m.input.dim()}};
    return m;
  });

  const std::optional<std::uint64_t> verify_seed = cfg.number<std::uint64_t>("verify", "seed");
  json verification = json::object();
  stage("verify-hull", [&] {
    HullCheck check;
    check.probe = cfg.number<std::size_t>("verify", "probe", 0);
    check.tol = cfg.number("verify", "tol", hull::kDefaultTol);
    check.max_iters = cfg.number("verify", "max_iters", hull::kDefaultMaxIters);
    if (check.probe > 0) {
      check.seed = require_seed(verify_seed, "in [verify] when probe > 0");
      manifest.add_seed("verify", check.seed->value);
    }
    json hull = {{"input", hull_report(blocks.input, s_in, check)}};
    if (!tied) hull["head"] = hull_report(blocks.head, s_head, check);
    verification["hull"] = hull;
    return 0;
  });
  stage("verify-preservation", [&] {
    const auto prompts = cfg.number<std::size_t>("verify", "prompts", 1000);
    const auto steps = cfg.number<std::size_t>("verify", "steps", 20);
    if (prompts == 0) return 0;
    const Seed seed = require_seed(verify_seed, "in [verify] for preservation prompts");
    manifest.add_seed("verify", seed.value);
    const auto r = lmtoy::preservation_report(s_head, model, prompts, steps, seed);
    verification["preservation"] = preservation_json(r, steps);
    return 0;
  });

  manifest.attach("verification", verification);
  json report = {{"stages", stages}, {"artifacts", artifacts}, {"manifest", manifest.stable_json()}};
  const auto report_path = out_dir / "report.json";
  stage("report", [&] { write_text(report.dump(2) + "\n", report_path); return 0; });
  report["report"] = report_path.string();
  report["verification"] = verification;
  return report;
}

}  // namespace vocabhull::cli
