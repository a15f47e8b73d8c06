#include <algorithm>
#include <cmath>

#include "cli/common.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/initializers.hpp"
#include "vocabhull/io.hpp"

namespace vocabhull::cli {

json hull_report(const EmbeddingMatrix& targets, const EmbeddingMatrix& sources,
                 const HullCheck& check) {
  if (targets.dim() != sources.dim()) {
    throw ValidationError("targets dim " + std::to_string(targets.dim()) + " != sources dim " +
                          std::to_string(sources.dim()));
  }
  hull::ProjectionOptions opts;
  opts.tol = check.tol;
  opts.max_iters = check.max_iters;
  const auto rows = hull::membership_rows(targets, sources, opts);

  std::size_t inside = 0;
  std::size_t worst_row = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].inside) ++inside;
    if (rows[i].certificate.residual > worst) {
      worst = rows[i].certificate.residual;
      worst_row = i;
    }
  }

  json report = {{"rows", rows.size()},
                 {"inside_count", inside},
                 {"outside_count", rows.size() - inside},
                 {"worst_residual", worst},
                 {"worst_row", worst_row},
                 {"tol", check.tol},
                 {"probe_directions", check.probe},
                 {"probe_violations", 0}};

  if (inside < rows.size()) {
    const hull::SourceHull h(sources);
    const auto w = h.separating_direction(targets.row_as_double(worst_row), opts);
    report["witness"] = {{"row", worst_row}, {"margin", w.margin}, {"direction", w.direction}};
  }
  if (check.probe > 0) {
    const auto probe =
        hull::probe_condition(targets, sources, check.probe, check.seed.value(), check.tol);
    report["probe_violations"] = probe.violations;
    report["probe_worst_margin"] = probe.worst_margin;
    if (probe.violations > 0) {
      report["probe_witness"] = {{"row", probe.worst_target_row},
                                 {"margin", probe.worst_margin},
                                 {"direction", probe.worst_direction}};
    }
  }
  return report;
}

json preservation_json(const lmtoy::PreservationReport& r, std::size_t steps) {
  json divs = json::array();
  for (const auto& d : r.divergences) {
    divs.push_back({{"prompt", d.prompt_index},
                    {"step", d.step},
                    {"source_token", d.source_token},
                    {"expanded_token", d.expanded_token},
                    {"target_row", d.target_row}});
  }
  return {{"match_fraction", r.match_fraction},
          {"prompts", r.prompts},
          {"matched", r.matched},
          {"steps", steps},
          {"divergences", divs}};
}

namespace {

EmbeddingMatrix load_matrix(Context& ctx, const fs::path& p) {
  auto m = read_matrix(p);
  ctx.manifest.add_input(p);
  return m;
}

Vocab load_vocab(Context& ctx, const fs::path& p) {
  auto v = read_vocab(p);
  ctx.manifest.add_input(p);
  return v;
}

Command init_command(CLI::App& root) {
  struct Opts {
    std::string method;
    fs::path sources, weights, out;
    std::size_t n_new = 0;
    double cov_scale = init::kDefaultCovScale;
    std::optional<std::uint64_t> seed;
  };
  auto o = std::make_shared<Opts>();
  auto* app = root.add_subcommand("init", "Initialize a target block from source embeddings");
  app->add_option("--method", o->method, "random|mean|univariate|multivariate|convex")->required();
  app->add_option("--sources", o->sources, "source matrix (VXE1)")->required();
  app->add_option("--n-new", o->n_new, "number of target rows")->required();
  app->add_option("--cov-scale", o->cov_scale, "covariance scale for multivariate")
      ->capture_default_str();
  app->add_option("--seed", o->seed, "RNG seed");
  app->add_option("--weights", o->weights, "logits matrix n_new x n_source (convex)");
  app->add_option("--out", o->out, "output target block (VXE1)")->required();

  return {app, [o](Context& ctx) -> json {
    const auto method = init::parse_method(o->method);
    if (!method) throw ValidationError("--method: unknown initializer '" + o->method + "'");
    if (o->n_new < 1) throw ValidationError("--n-new must be >= 1");
    std::vector<fs::path> inputs{o->sources};
    if (!o->weights.empty()) inputs.push_back(o->weights);
    check_outputs(inputs, {o->out});

    init::InitSpec spec;
    spec.kind = *method;
    spec.cov_scale = o->cov_scale;
    if (*method == init::Method::random || *method == init::Method::univariate ||
        *method == init::Method::multivariate) {
      spec.seed = require_seed(o->seed, "for --method " + o->method);
      ctx.manifest.add_seed("seed", spec.seed.value);
    }
    const auto sources = load_matrix(ctx, o->sources);
    Eigen::MatrixXd logits;
    if (*method == init::Method::convex) {
      if (o->weights.empty()) throw ValidationError("--weights is required for --method convex");
      const auto w = load_matrix(ctx, o->weights);
      if (w.rows() != o->n_new || w.dim() != sources.rows()) {
        throw ValidationError("--weights must be " + std::to_string(o->n_new) + " x " +
                              std::to_string(sources.rows()) + ", got " +
                              std::to_string(w.rows()) + " x " + std::to_string(w.dim()));
      }
      logits = w.to_eigen();
      spec.logits = &logits;
    }
    const auto block = init::initialize(spec, o->n_new, sources);
    write_matrix(block, o->out);
    ctx.manifest.add_output(o->out);
    return {{"method", init::method_name(*method)},
            {"n_new", block.rows()},
            {"dim", block.dim()},
            {"out", o->out.string()}};
  }};
}

Command merge_command(CLI::App& root) {
  struct Opts {
    fs::path source, target, out, map;
  };
  auto o = std::make_shared<Opts>();
  auto* app = root.add_subcommand("merge-vocab", "Merge a target vocabulary into a source vocabulary");
  app->add_option("--source", o->source, "source vocabulary")->required();
  app->add_option("--target", o->target, "target vocabulary")->required();
  app->add_option("--out", o->out, "merged vocabulary")->required();
  app->add_option("--map", o->map, "TSV of copied target tokens and their source rows")->required();

  return {app, [o](Context& ctx) -> json {
    check_outputs({o->source, o->target}, {o->out, o->map});
    const auto source = load_vocab(ctx, o->source);
    const auto target = load_vocab(ctx, o->target);
    const auto merged = tokenize::fuzzy_match(source, target);
    write_vocab(merged.merged(), o->out);
    std::string tsv;
    for (const auto& [token, row] : merged.copied) {
      tsv += escape_token(token) + '\t' + std::to_string(row) + '\n';
    }
    write_text(tsv, o->map);
    ctx.manifest.add_output(o->out);
    ctx.manifest.add_output(o->map);
    return {{"source_size", source.size()},
            {"target_size", target.size()},
            {"copied", merged.copied.size()},
            {"added", merged.added.size()},
            {"merged_size", source.size() + merged.added.size()}};
  }};
}

Command fertility_command(CLI::App& root) {
  struct Opts {
    fs::path vocab, corpus;
  };
  auto o = std::make_shared<Opts>();
  auto* app = root.add_subcommand("fertility", "Tokens per whitespace word of a corpus");
  app->add_option("--vocab", o->vocab, "vocabulary")->required();
  app->add_option("--corpus", o->corpus, "text file or directory, one sentence per line")
      ->required();

  return {app, [o](Context& ctx) -> json {
    const auto vocab = load_vocab(ctx, o->vocab);
    std::vector<std::string> lines;
    for (const auto& f : corpus_files(o->corpus)) {
      auto more = read_lines(f);
      lines.insert(lines.end(), std::make_move_iterator(more.begin()),
                   std::make_move_iterator(more.end()));
    }
    ctx.manifest.add_input(o->corpus);
    const auto r = tokenize::fertility(lines, vocab);
    return {{"tokens_per_word", r.tokens_per_word},
            {"word_count", r.word_count},
            {"token_count", r.token_count}};
  }};
}

Command train_command(CLI::App& root) {
  struct Opts {
    fs::path corpus, dict, sources_input, sources_head, vocab, out_input, out_head, loss_log;
    cw2v::Cw2vConfig config;
    std::optional<std::uint64_t> seed;
    bool tied = false;
  };
  auto o = std::make_shared<Opts>();
  auto& c = o->config;
  auto* app = root.add_subcommand("train-cw2v", "Train convex-mixture target embeddings");
  app->add_option("--corpus", o->corpus, "text file or directory, one sentence per line")
      ->required();
  app->add_option("--dict", o->dict, "bilingual dictionary TSV");
  app->add_option("--sources-input", o->sources_input, "source input embeddings")->required();
  app->add_option("--sources-head", o->sources_head, "source LM head (omit with --tied)");
  app->add_option("--vocab", o->vocab, "merged vocabulary")->required();
  app->add_option("--window", c.window)->capture_default_str();
  app->add_option("--negatives", c.negatives)->capture_default_str();
  app->add_option("--rank", c.rank)->capture_default_str();
  app->add_option("--epochs", c.epochs)->capture_default_str();
  app->add_option("--lr", c.lr)->capture_default_str();
  app->add_option("--batch-size", c.batch_size)->capture_default_str();
  app->add_option("--unigram-power", c.unigram_power)->capture_default_str();
  app->add_option("--shuffle-buffer", c.shuffle_buffer)->capture_default_str();
  app->add_option("--seed", o->seed, "RNG seed");
  app->add_flag("--tied", o->tied, "input and LM head share one matrix");
  app->add_option("--out-input", o->out_input, "target input block")->required();
  app->add_option("--out-head", o->out_head, "target LM-head block")->required();
  app->add_option("--loss-log", o->loss_log, "per-epoch loss, JSON lines");

  return {app, [o](Context& ctx) -> json {
    auto config = o->config;
    config.seed = require_seed(o->seed, "for train-cw2v");
    ctx.manifest.add_seed("seed", config.seed.value);
    config.validate();
    if (!o->tied && o->sources_head.empty()) {
      throw ValidationError("--sources-head is required unless --tied is given");
    }
    std::vector<fs::path> inputs{o->sources_input, o->vocab, o->corpus};
    if (!o->sources_head.empty()) inputs.push_back(o->sources_head);
    if (!o->dict.empty()) inputs.push_back(o->dict);
    std::vector<fs::path> outputs{o->out_input, o->out_head};
    if (!o->loss_log.empty()) outputs.push_back(o->loss_log);
    check_outputs(inputs, outputs);

    const auto s_in = load_matrix(ctx, o->sources_input);
    const auto s_head = o->sources_head.empty() ? s_in : load_matrix(ctx, o->sources_head);
    if (s_head.rows() != s_in.rows()) {
      throw ValidationError("--sources-head has " + std::to_string(s_head.rows()) +
                            " rows, --sources-input has " + std::to_string(s_in.rows()));
    }
    const auto vocab = load_vocab(ctx, o->vocab);
    if (vocab.size() <= s_in.rows()) {
      throw ValidationError("--vocab has " + std::to_string(vocab.size()) +
                            " tokens, no more than the " + std::to_string(s_in.rows()) +
                            " source rows");
    }
    const std::size_t n_target = vocab.size() - s_in.rows();
    const tokenize::LongestMatchTokenizer tok(vocab);
    const auto sentences = tokenize_corpus(corpus_files(o->corpus), tok);
    ctx.manifest.add_input(o->corpus);
    Dictionary dict;
    if (!o->dict.empty()) {
      dict = read_dictionary(o->dict, tok);
      ctx.manifest.add_input(o->dict);
    }

    const auto write = [&](const cw2v::TrainResult& r) {
      const auto t_in = cw2v::materialize(r.input, s_in);
      const auto t_head = cw2v::materialize(o->tied ? r.input : r.head, s_head);
      write_matrix(t_in, o->out_input);
      write_matrix(t_head, o->out_head);
      ctx.manifest.add_output(o->out_input);
      ctx.manifest.add_output(o->out_head);
      if (!o->loss_log.empty()) {
        write_text(loss_log(r.epoch_loss), o->loss_log);
        ctx.manifest.add_output(o->loss_log);
      }
    };

    auto& log = ctx.log;
    const auto progress = [&](std::size_t epoch, const cw2v::MixingWeights&,
                              const cw2v::MixingWeights&, double loss) {
      log << "epoch " << epoch + 1 << "/" << config.epochs << " mean loss " << loss << '\n';
    };
    cw2v::TrainResult result;
    try {
      result = cw2v::train(sentences, dict.entries, s_in, s_head, n_target, config, progress);
    } catch (const cw2v::TrainingDiverged& e) {
      write(e.last_good());
      throw;
    }
    write(result);
    return {{"n_source", s_in.rows()},
            {"n_target", n_target},
            {"rank", config.rank},
            {"epochs", config.epochs},
            {"sentences", sentences.size()},
            {"dict_entries", dict.entries.size()},
            {"dict_skipped", dict.skipped},
            {"tied", o->tied},
            {"epoch_loss", result.epoch_loss},
            {"parameters", parameter_json(cw2v::parameter_count(s_in.rows(), n_target,
                                                                config.rank))}};
  }};
}

Command verify_hull_command(CLI::App& root) {
  struct Opts {
    fs::path targets, sources;
    HullCheck check;
    std::optional<std::uint64_t> seed;
  };
  auto o = std::make_shared<Opts>();
  auto* app = root.add_subcommand("verify-hull", "Check target rows lie in the source hull");
  app->add_option("--targets", o->targets, "target block")->required();
  app->add_option("--sources", o->sources, "source matrix")->required();
  app->add_option("--probe", o->check.probe, "random directions for the probe check")
      ->capture_default_str();
  app->add_option("--seed", o->seed, "probe seed");
  app->add_option("--tol", o->check.tol, "membership tolerance")->capture_default_str();
  app->add_option("--max-iters", o->check.max_iters)->capture_default_str();

  return {app, [o](Context& ctx) -> json {
    auto check = o->check;
    if (check.probe > 0) {
      check.seed = require_seed(o->seed, "when --probe > 0");
      ctx.manifest.add_seed("seed", check.seed->value);
    }
    const auto targets = load_matrix(ctx, o->targets);
    const auto sources = load_matrix(ctx, o->sources);
    return hull_report(targets, sources, check);
  }};
}

Command verify_preservation_command(CLI::App& root) {
  struct Opts {
    fs::path source_head, expanded_input, expanded_head;
    std::size_t boundary = 0;
    std::size_t prompts = 1000;
    std::size_t steps = 20;
    std::optional<std::uint64_t> seed;
  };
  auto o = std::make_shared<Opts>();
  auto* app = root.add_subcommand("verify-preservation",
                                  "Compare greedy decoding before and after expansion");
  app->add_option("--source-head", o->source_head, "source LM head")->required();
  app->add_option("--expanded-input", o->expanded_input, "expanded input embeddings")
      ->required();
  app->add_option("--expanded-head", o->expanded_head, "expanded LM head")->required();
  app->add_option("--boundary", o->boundary, "number of source rows")->required();
  app->add_option("--prompts", o->prompts)->capture_default_str();
  app->add_option("--steps", o->steps)->capture_default_str();
  app->add_option("--seed", o->seed, "prompt and encoder seed");

  return {app, [o](Context& ctx) -> json {
    const Seed seed = require_seed(o->seed, "for verify-preservation");
    ctx.manifest.add_seed("seed", seed.value);
    const auto source_head = load_matrix(ctx, o->source_head);
    auto input = load_matrix(ctx, o->expanded_input);
    auto head = load_matrix(ctx, o->expanded_head);
    if (o->boundary != source_head.rows()) {
      throw ValidationError("--boundary " + std::to_string(o->boundary) + " != source head rows " +
                            std::to_string(source_head.rows()));
    }
    if (input.rows() != head.rows() || head.rows() < o->boundary) {
      throw ValidationError("expanded matrices disagree on row count or are smaller than --boundary");
    }
    const auto head_rows = head.rows();
    const bool intact = slice_rows(head, 0, o->boundary) == source_head;
    ExpandedModel model{std::move(input), std::move(head), o->boundary, head_rows - o->boundary};
    const auto r = lmtoy::preservation_report(source_head, model, o->prompts, o->steps, seed);
    auto report = preservation_json(r, o->steps);
    report["source_rows_intact"] = intact;
    return report;
  }};
}

Command expand_command(CLI::App& root) {
  struct Opts {
    fs::path config, sources_input, sources_head, target_input, target_head, out_input, out_head;
  };
  auto o = std::make_shared<Opts>();
  auto* app = root.add_subcommand("expand", "Append target blocks, or run a whole pipeline");
  app->add_option("--config", o->config, "pipeline config (INI sections per stage)");
  app->add_option("--sources-input", o->sources_input);
  app->add_option("--sources-head", o->sources_head, "defaults to --sources-input (tied)");
  app->add_option("--target-input", o->target_input);
  app->add_option("--target-head", o->target_head, "defaults to --target-input");
  app->add_option("--out-input", o->out_input);
  app->add_option("--out-head", o->out_head);

  return {app, [o](Context& ctx) -> json {
    if (!o->config.empty()) return run_pipeline(o->config, ctx);
    for (const auto& [flag, value] :
         {std::pair{"--sources-input", &o->sources_input}, {"--target-input", &o->target_input},
          {"--out-input", &o->out_input}, {"--out-head", &o->out_head}}) {
      if (value->empty()) throw ValidationError(std::string(flag) + " is required without --config");
    }
    const auto s_head_path = o->sources_head.empty() ? o->sources_input : o->sources_head;
    const auto t_head_path = o->target_head.empty() ? o->target_input : o->target_head;
    check_outputs({o->sources_input, s_head_path, o->target_input, t_head_path},
                  {o->out_input, o->out_head});
    const auto s_in = load_matrix(ctx, o->sources_input);
    const auto s_head = o->sources_head.empty() ? s_in : load_matrix(ctx, s_head_path);
    const auto t_in = load_matrix(ctx, o->target_input);
    const auto t_head = o->target_head.empty() ? t_in : load_matrix(ctx, t_head_path);
    const auto model = expand(s_in, s_head, t_in, t_head);
    write_matrix(model.input, o->out_input);
    write_matrix(model.lm_head, o->out_head);
    ctx.manifest.add_output(o->out_input);
    ctx.manifest.add_output(o->out_head);
    return {{"source_size", model.source_size},
            {"target_size", model.target_size},
            {"dim", model.input.dim()}};
  }};
}

Command param_count_command(CLI::App& root) {
  struct Opts {
    std::uint64_t n_source = 0, n_target = 0, rank = 1024;
  };
  auto o = std::make_shared<Opts>();
  auto* app = root.add_subcommand("param-count", "Trainable parameters of the mixing matrices");
  app->add_option("--n-source", o->n_source)->required();
  app->add_option("--n-target", o->n_target)->required();
  app->add_option("--rank", o->rank)->capture_default_str();

  return {app, [o](Context&) -> json {
    const auto p = cw2v::parameter_count(o->n_source, o->n_target, o->rank);
    auto j = parameter_json(p);
    j["n_source"] = o->n_source;
    j["n_target"] = o->n_target;
    j["rank"] = o->rank;
    return j;
  }};
}

}  // namespace

std::vector<Command> register_commands(CLI::App& root) {
  return {init_command(root),          merge_command(root),
          fertility_command(root),     train_command(root),
          verify_hull_command(root),   verify_preservation_command(root),
          expand_command(root),        param_count_command(root)};
}

}  // namespace vocabhull::cli
