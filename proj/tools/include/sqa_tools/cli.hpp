#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sqa::tools {

// Runs the `sqa` command line with `args` (program name excluded). Data goes
// to `out`, diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SynthOptions {
  std::uint64_t seed = 0;
  int systems = 6;
  int train_per_system = 10;
  int val_per_system = 5;
  int test_per_system = 5;
  std::size_t embedding_dim = 16;
  int sample_rate = 16000;
  double duration = 1.0;  // seconds
};

// Writes a small labeled singing corpus: WAVs, embedding SQAF files and
// train.csv / val.csv / test.csv manifests. Higher-quality systems sing
// closer to the semitone grid with less noise.
void write_synthetic_corpus(const std::filesystem::path& dir, const SynthOptions& options);

}  // namespace sqa::tools
