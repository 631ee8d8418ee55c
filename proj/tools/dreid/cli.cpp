#include "cli.hpp"

#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dreid/error.hpp"

namespace dreid::cli {

namespace {

using Command = std::function<int(const json&, std::ostream&)>;

struct Subcommand {
  const char* name;
  const char* help;
  Command fn;
};

const Subcommand kSubcommands[] = {
    {"extract", "Compute per-frame descriptors for every frame in the dataset manifest", cmd_extract},
    {"evaluate", "Run the re-identification protocol on extracted descriptors", cmd_evaluate},
    {"transfer-train", "Fit the RGB-to-depth transfer model on an auxiliary set", cmd_transfer_train},
    {"transfer-apply", "Estimate depth distances for an RGB target set and fuse scores", cmd_transfer_apply},
    {"synth", "Write a synthetic dataset (bodies, paired features or corruption benchmark)", cmd_synth},
    {"verify", "Run the covariance property checks and print the largest deviations", cmd_verify},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth-based person re-identification toolkit", "dreid"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", sets, "Override a config value, key=value (dotted keys)");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective config and exit");

  const Subcommand* chosen = nullptr;
  for (const auto& sc : kSubcommands) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.help);
    sub->allow_extras();
    sub->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->callback([&chosen, &sc] { chosen = &sc; });
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    json config = config_path.empty() ? default_config() : load_config(config_path);
    for (const auto& s : sets) apply_override(config, s);
    for (const auto& extra : app.get_subcommands().front()->remaining()) {
      if (extra.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + extra + "'");
      apply_override(config, std::string_view(extra).substr(2));
    }
    validate_config(config);
    if (print_config) {
      out << config.dump(2) << "\n";
      return kExitOk;
    }
    return chosen->fn(config, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? kExitNumerical : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace dreid::cli
