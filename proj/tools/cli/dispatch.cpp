#include <algorithm>
#include <memory>

#include "cli/cli.hpp"
#include "cli/common.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/parallel.hpp"

namespace vocabhull::cli {

namespace {

int report_error(std::ostream& out, std::ostream& err, const std::string& command,
                 const std::string& kind, const std::string& message, int code) {
  err << kToolName << ": " << message << '\n';
  out << json{{"status", "error"},
              {"command", command},
              {"error", {{"kind", kind}, {"message", message}}},
              {"exit_code", code}}
             .dump(2)
      << '\n';
  return code;
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vocabulary expansion with convex-hull guarantees", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker cap (0 = all cores)")->capture_default_str();
  auto commands = register_commands(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    const std::string name = subs.empty() ? "" : subs.front()->get_name();
    err << (subs.empty() ? app.help() : subs.front()->help());
    std::string message = e.what();
    if (subs.empty()) {
      auto word = std::find_if(args.begin(), args.end(),
                               [](const std::string& a) { return !a.starts_with("-"); });
      if (word != args.end()) message = "unknown subcommand '" + *word + "'";
    }
    return report_error(out, err, name, "usage", message, kValidation);
  }

  auto it = std::find_if(commands.begin(), commands.end(),
                         [](const Command& c) { return c.app->parsed(); });
  const std::string name = it->app->get_name();
  set_max_threads(threads);

  RunManifest manifest(name, args);
  Context ctx{manifest, err};
  try {
    json result = it->run(ctx);
    result["status"] = "ok";
    result["command"] = name;
    result["manifest"] = manifest.json();
    out << result.dump(2) << '\n';
    return kOk;
  } catch (const StageFailure& e) {
    return report_error(out, err, name, "stage:" + e.stage(), e.what(), e.code());
  } catch (const FormatError& e) {
    return report_error(out, err, name, "format", e.what(), kIo);
  } catch (const IoError& e) {
    return report_error(out, err, name, "io", e.what(), kIo);
  } catch (const ValidationError& e) {
    return report_error(out, err, name, "validation", e.what(), kValidation);
  } catch (const NumericError& e) {
    return report_error(out, err, name, "numeric", e.what(), kValidation);
  } catch (const fs::filesystem_error& e) {
    return report_error(out, err, name, "io", e.what(), kIo);
  } catch (const std::exception& e) {
    return report_error(out, err, name, "internal", e.what(), kValidation);
  }
}

}  // namespace vocabhull::cli
