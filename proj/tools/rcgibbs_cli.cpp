// rcgibbs run <manifest> [--seed N] [--out DIR] [--threads K] [--override section.key=value ...]
#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "rcgibbs/rcgibbs.h"

int main(int argc, char** argv) {
  CLI::App app{"Quenched Gibbs states of unbounded spins on random point configurations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rcg_version()));

  auto* run = app.add_subcommand("run", "Run the study described by a manifest");
  std::string manifest;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 0;
  std::vector<std::string> overrides;
  run->add_option("manifest", manifest, "Experiment manifest")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (replaces study.seed)");
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (replaces study.output)");
  auto* threads_opt = run->add_option("--threads", threads, "Worker threads (default: $RCGIBBS_THREADS, then study.threads)")
                          ->check(CLI::PositiveNumber);
  run->add_option("--override", overrides, "Manifest override section.key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  if (threads_opt->count() == 0) {
    if (const char* env = std::getenv("RCGIBBS_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 1) {
        std::fprintf(stderr, "error: RCGIBBS_THREADS must be a positive integer, got '%s'\n", env);
        return RCG_INVALID_ARGUMENT;
      }
      threads = static_cast<int>(v);
    }
  }

  std::vector<const char*> raw;
  for (const auto& o : overrides) raw.push_back(o.c_str());
  rcg_run_options opts{};
  opts.has_seed = seed_opt->count() > 0;
  opts.seed = seed;
  opts.out_dir = out_opt->count() ? out_dir.c_str() : nullptr;
  opts.threads = threads;
  opts.overrides = raw.data();
  opts.override_count = raw.size();

  const rcg_status status = rcg_run(manifest.c_str(), &opts);
  if (status != RCG_OK) {
    std::fprintf(stderr, "error (%s): %s\n", rcg_status_name(status), rcg_last_error());
    return static_cast<int>(status);
  }
  return 0;
}
