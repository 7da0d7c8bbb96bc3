#include <iostream>

#include <CLI11.hpp>

#include "dualext/commands.hpp"

using namespace dualext;

int main(int argc, char** argv) {
  CLI::App app{"Dissipativity checks for non-proper extensions of dual pairs"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config;
  Overrides o;
  std::string format, meshes;
  double tol = 0.0;

  const auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "scenario config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output path, - for stdout");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    return sub;
  };
  add("check", "evaluate the criterion for the configured extension");
  CLI::App* sweep = add("sweep", "classify a rectangle of boundary parameters");
  CLI::App* oracle = add("oracle", "compare the verdict with the discretized numerical range");
  oracle->add_option("--meshes", meshes, "comma separated element counts, e.g. 64,128,256");
  oracle->add_option("--tol", tol, "tolerance on the extrapolated infimum")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 uses exit code 0 for --help, nonzero otherwise; keep usage errors at 2
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Command cmd = Command::check;
  if (sweep->parsed()) cmd = Command::sweep;
  if (oracle->parsed()) cmd = Command::oracle;
  if (!format.empty()) o.format = format == "csv" ? OutputFormat::csv : OutputFormat::json;
  if (tol > 0.0) o.tol = tol;
  if (!meshes.empty()) {
    try {
      o.meshes = parse_mesh_list(meshes);
    } catch (const Error& e) {
      std::cout << error_output(e.code(), e.what()).text;
      return 2;
    }
  }
  return run_command(cmd, config, o, std::cout);
}
