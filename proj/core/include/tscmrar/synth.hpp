#pragma once

// Synthetic CASAS-format corpora for running the pipeline without the real
// dataset. Each activity favours a small zone of sensors and each resident a
// preferred sensor inside that zone, so labels are learnable but noisy.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tscmrar {

struct SynthProfile {
  std::size_t sensors = 37;  // first `sensors` tags of the ADLMR vocabulary
  std::size_t residents = 2;
  std::size_t activities = 15;
  std::size_t events_per_file = 400;  // ON events; OFF lines come on top
  std::size_t files = 26;

  // Throws DataError on zero counts or more than 37 sensors.
  void validate() const;
};

// Text of file `index` (0-based). Deterministic in (profile, seed, index).
std::string synth_file_text(const SynthProfile& profile, std::uint64_t seed,
                            std::size_t index);

// Writes files "synth_01.txt" ... into `dir` (created if needed) and returns
// their paths.
std::vector<std::filesystem::path> write_synth_corpus(const SynthProfile& profile,
                                                      std::uint64_t seed,
                                                      const std::filesystem::path& dir);

}  // namespace tscmrar
