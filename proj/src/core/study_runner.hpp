#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "spin_model.hpp"

namespace rcg {

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides study.seed
  std::optional<std::string> out_dir;  // overrides study.output
  std::optional<int> threads;          // overrides study.threads
  std::vector<std::string> overrides;  // "section.key=value"
};

struct RunResult {
  std::string study;
  std::string out_dir;
  std::vector<std::string> artifacts;  // files written, relative to out_dir
};

// Study kinds: graph-stats, correlation, kernel-check, dlr, moments,
// annealed, cesaro. Throws rcg::Error on parse, validation or runtime failure.
RunResult run_manifest(const std::string& manifest_path, const RunOptions& options);
RunResult run_manifest(Manifest manifest, const RunOptions& options);

// Model description file with sections [pair], [single], [tempered]:
//
//   [pair]      kind = ferromagnetic | bilinear | polynomial | none
//               J, matrix, coefficients, range, profile
//   [single]    a, q, kappa, spin_dim
//   [tempered]  alpha, p, M
//
// Its keys are folded into [model]; keys already in [model] win.
void merge_model_file(Manifest& manifest, const Manifest& model_file);
// Merges the file named by model.file, if any.
void resolve_model_file(Manifest& manifest);

// [model] block (after merging an optional model file).
ModelParams model_from_manifest(const Manifest& manifest);

// Validity report as JSON text.
std::string validity_json(const ValidityReport& report);

std::vector<std::string> study_kinds();

}  // namespace rcg
