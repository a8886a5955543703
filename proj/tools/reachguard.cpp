#include "reachguard/config.hpp"
#include "reachguard/error.hpp"
#include "reachguard/models.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

void configure_logging() {
  const char* level = std::getenv("REACHGUARD_LOG");
  spdlog::set_level(spdlog::level::warn);
  if (!level) return;
  const std::string s(level);
  if (s == "error") spdlog::set_level(spdlog::level::err);
  else if (s == "info") spdlog::set_level(spdlog::level::info);
  else if (s == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::warn("ignoring REACHGUARD_LOG={} (expected error, info or debug)", s);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw reachguard::Error(reachguard::ErrorCode::kIo, "cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"reachguard: simulation-based bounded-time safety verification"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::string output;
  int workers = 0;
  long long seed = -1;
  app.add_option("--output", output, "output directory (overrides the config)");
  app.add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed (overrides the config)")->check(CLI::NonNegativeNumber);

  std::string config_path;
  auto* verify = app.add_subcommand("verify", "run the partition-and-refine safety check");
  verify->add_option("config", config_path, "problem file (JSON)")->required();
  auto* ldf = app.add_subcommand("ldf", "compute discrepancy coefficients and one reach tube");
  ldf->add_option("config", config_path, "problem file (JSON)")->required();
  auto* isldf = app.add_subcommand("isldf", "input-to-state discrepancy for a model with inputs");
  isldf->add_option("config", config_path, "problem file (JSON)")->required();
  auto* models = app.add_subcommand("models", "list builtin models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  if (models->parsed()) {
    for (const auto& name : reachguard::builtin_model_names()) {
      const auto m = reachguard::get_model(name);
      std::cout << name << "\tn=" << m.n << " p=" << m.p << "\t" << m.description << "\n";
    }
    return 0;
  }

  reachguard::RunConfig cfg;
  try {
    cfg = reachguard::parse_config(slurp(config_path));
  } catch (const reachguard::Error& e) {
    spdlog::error("{}: {}", config_path, e.what());
    return 3;
  }
  cfg.mode = verify->parsed() ? "verify" : ldf->parsed() ? "ldf" : "isldf";
  if (cfg.mode == "verify" && cfg.unsafe.empty()) {
    spdlog::error("{}: config field 'unsafe': required in verify mode", config_path);
    return 3;
  }
  if (!output.empty()) cfg.output = output;
  if (workers > 0) cfg.workers = workers;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);

  spdlog::info("{} {} -> {}", cfg.mode, cfg.model, cfg.output);
  std::ostringstream err;
  const int code = reachguard::run(cfg, err);
  if (code == 3) spdlog::error("{}", err.str());
  else spdlog::info("exit {}", code);
  if (code <= 2 && cfg.mode == "verify") {
    std::cout << (code == 0 ? "SAFE" : code == 1 ? "UNSAFE" : "UNKNOWN") << "\n";
  }
  return code;
}
