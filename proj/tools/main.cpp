#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>

#include "commands.hpp"

using namespace ultraloc;

int main(int argc, char** argv) {
  CLI::App app{"Phase-space quantisation with super-exponential windows and symbols"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  cli::Options opt;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomised suites (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency")->capture_default_str();
  app.add_flag("--strict", opt.strict, "treat truncation warnings as failures");

  using Command = int (*)(const io::json&, const cli::Options&);
  const std::pair<const char*, Command> commands[] = {
      {"transform", cli::cmd_transform}, {"verify", cli::cmd_verify}, {"locop", cli::cmd_locop}, {"weights", cli::cmd_weights}};
  const char* help[] = {"STFT / Wigner transforms to CSV", "property suites and bound fits",
                        "localisation operator pairing by both routes", "weight sequences and associated functions"};
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (std::size_t k = 0; k < std::size(commands); ++k) subs.emplace_back(app.add_subcommand(commands[k].first, help[k]), commands[k].second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kOk : cli::kConfigError;
  }
  if (*seed_opt) opt.seed = seed;
  set_thread_count(threads);
  opt.config_dir = std::filesystem::path(config).parent_path().string();

  try {
    const auto cfg = io::read_json_file(config);
    for (const auto& [sub, run] : subs)
      if (sub->parsed()) return run(cfg, opt);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    const bool config_error = e.kind() == ErrorKind::ConfigInvalid || e.kind() == ErrorKind::InvalidParameter;
    return config_error ? cli::kConfigError : cli::kNumericalFailure;
  } catch (const io::json::exception& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return cli::kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kNumericalFailure;
  }
  return cli::kConfigError;
}
