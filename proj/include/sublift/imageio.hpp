#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sublift/fields.hpp"

namespace sublift {

// Reads binary "P5" or ASCII "P2", maxval up to 65535, '#' comments.
// Samples are normalized to [0,1]. Malformed input raises ConfigError with
// the byte offset.
ScalarField read_pgm(const std::string& path);

// Binary P5, row-major, clamped to [0,1] and rounded half-up. Byte output
// is deterministic for identical inputs.
void write_pgm(const ScalarField& img, const std::string& path, int maxval = 255);

struct MetricsRow {
  int k = 0;
  std::string mode;
  double data_energy = 0.0;
  double tv_energy = 0.0;
  double fidelity = 0.0;
  int noninteg_count = 0;
  int solver_iters = 0;
  double wall_ms = 0.0;
  std::optional<double> diff_to_classic;
};

// CSV with the fixed header
// k,mode,data_energy,tv_energy,fidelity,noninteg_count,solver_iters,wall_ms,diff_to_classic
// 12 significant digits, '.' decimal separator, '\n' newlines.
void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path);

// One key=value per line, keys sorted.
void write_manifest(const std::map<std::string, std::string>& kv, const std::string& path);

}  // namespace sublift
