#include <iostream>

#include "CLI11.hpp"

#include "halfline/workbench.hpp"

using namespace halfline;

namespace {

int report_issues(const std::vector<workbench::ConfigIssue>& issues) {
  for (const auto& i : issues) std::cerr << "error: " << (i.pointer.empty() ? "/" : i.pointer) << ": " << i.message << "\n";
  return issues.empty() ? workbench::kSuccess : workbench::kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Half-line matrix Schroedinger scattering workbench"};
  app.require_subcommand(1);

  std::string config_path;
  workbench::RunFlags flags;

  auto* run = app.add_subcommand("run", "run a pipeline and write its artifacts");
  run->add_option("--config", config_path, "job configuration (JSON)")->required();
  run->add_option("--mode", flags.mode, "override the configured mode")
      ->check(CLI::IsMember(workbench::kModes));
  run->add_option("--out", flags.out, "output directory");
  run->add_option("--parallel", flags.parallel, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--strict", flags.strict, "exit 4 when the run produced warnings");

  auto* validate = app.add_subcommand("validate", "check a configuration without running numerics");
  validate->add_option("--config", config_path, "job configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : workbench::kConfigError;
  }

  workbench::JobConfig config;
  if (const int code = report_issues(workbench::load(config_path, config)); code != 0) return code;
  if (*validate) return 0;

  const auto result = workbench::run(config, flags);
  if (result.exit_code == workbench::kNumericalFailure)
    std::cerr << "error [" << result.stage << "]: " << result.message << "\n";
  else if (result.exit_code != workbench::kSuccess)
    std::cerr << "error: " << result.message << "\n";
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& e : result.manifest) std::cout << e.sha256 << "  " << e.path << "\n";
  return result.exit_code;
}
