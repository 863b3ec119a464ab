#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tscmrar/casas.hpp"
#include "tscmrar/tensor.hpp"

namespace tscmrar {

inline constexpr std::size_t kDefaultWindow = 8;
inline constexpr int kPadSensor = -1;

// The target event and its k-1 predecessors, oldest first. Slots before the
// start of the file are all-zero embeddings.
struct SampleWindow {
  std::vector<Tensor> embeddings;  // k tensors of [1 x N]
  std::vector<int> sensors;        // sensor index per slot, kPadSensor for padding
  LabelPair label;
  std::size_t pad_count = 0;

  std::size_t size() const { return embeddings.size(); }
};

// One window per event. Events must come from a single file; windows never
// span files. Throws DataError if k < 2.
std::vector<SampleWindow> make_windows(std::span<const SensorEvent> events,
                                       std::size_t k, const SensorVocabulary& vocab);

// Builds a window directly from sensor ids (oldest first, kPadSensor allowed
// only as a leading run).
SampleWindow window_from_sensors(std::span<const int> sensors, LabelPair label,
                                 std::size_t vocab_size);

// Strict weak ordering on (sensors, label); independent of storage order.
bool window_less(const SampleWindow& a, const SampleWindow& b);

// Per-file windows for a set of files, concatenated in file order.
struct WindowedFile {
  std::string name;
  std::size_t on_events = 0;
  std::vector<SampleWindow> windows;
};

struct CorpusOptions {
  ParseOptions parse{};
  std::string on_value = "ON";
  std::size_t k = kDefaultWindow;
};

WindowedFile load_windowed_file(const std::filesystem::path& path,
                                const CorpusOptions& options);
std::vector<SampleWindow> concat_windows(std::span<const WindowedFile> files);

// "file,t,pad_count,resident,activity" with 1-based labels.
void write_windows_csv(std::ostream& out, std::span<const WindowedFile> files);

}  // namespace tscmrar
