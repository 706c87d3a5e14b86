// Command-line front end: analyze closed-form predictions, run the
// event-driven simulator, integrate the piecewise-linear flow, or do the
// full analyze/simulate/fluid-limit validation pass.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "frontflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"annihilation-boundary analysis and simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string format_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  bool face_table = false;

  for (const char* name : {"analyze", "simulate", "flow", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format_override, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    if (std::string(name) == "analyze")
      sub->add_flag("--faces", face_table, "include the per-face classification");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read config file: " << config_path << "\n";
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();

  frontflow::RunConfig cfg;
  try {
    cfg = frontflow::parse_config(buf.str());
  } catch (const frontflow::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (seed_given) cfg.seed = seed_override;
  if (format_override == "csv") cfg.format = frontflow::OutputFormat::Csv;
  if (format_override == "json") cfg.format = frontflow::OutputFormat::Json;

  const auto cmd = frontflow::command_from_name(app.get_subcommands().front()->get_name());
  if (!cmd) return 2;
  return frontflow::run_command(*cmd, cfg, out_dir, std::cerr, face_table);
}
