#include "tscmrar/windowing.hpp"

#include <algorithm>
#include <ostream>

#include "tscmrar/error.hpp"

namespace tscmrar {

SampleWindow window_from_sensors(std::span<const int> sensors, LabelPair label,
                                 std::size_t vocab_size) {
  if (sensors.size() < 2) throw DataError("window needs at least 2 slots");
  SampleWindow w;
  w.label = label;
  w.sensors.assign(sensors.begin(), sensors.end());
  w.embeddings.reserve(sensors.size());
  bool seen_event = false;
  for (int s : sensors) {
    if (s == kPadSensor) {
      if (seen_event) throw DataError("window padding must precede all events");
      ++w.pad_count;
      w.embeddings.emplace_back(Shape{1, vocab_size});
    } else {
      seen_event = true;
      w.embeddings.push_back(one_hot(static_cast<std::size_t>(s), vocab_size));
    }
  }
  if (!seen_event) throw DataError("window has no target event");
  return w;
}

std::vector<SampleWindow> make_windows(std::span<const SensorEvent> events,
                                       std::size_t k, const SensorVocabulary& vocab) {
  if (k < 2) throw DataError("window size k must be >= 2, got " + std::to_string(k));
  std::vector<SampleWindow> out;
  out.reserve(events.size());
  std::vector<int> slots(k);
  for (std::size_t t = 0; t < events.size(); ++t) {
    for (std::size_t slot = 0; slot < k; ++slot) {
      // slot k-1 is event t, slot 0 is event t-k+1
      const std::size_t back = k - 1 - slot;
      slots[slot] = back > t ? kPadSensor : static_cast<int>(events[t - back].sensor);
    }
    out.push_back(window_from_sensors(slots, events[t].label, vocab.size()));
  }
  return out;
}

bool window_less(const SampleWindow& a, const SampleWindow& b) {
  if (a.sensors != b.sensors) return a.sensors < b.sensors;
  if (a.label.resident != b.label.resident) return a.label.resident < b.label.resident;
  return a.label.activity < b.label.activity;
}

WindowedFile load_windowed_file(const std::filesystem::path& path,
                                const CorpusOptions& options) {
  const CasasFile parsed = parse_file(path, options.parse);
  const auto on = filter_on(parsed.events, options.on_value);
  WindowedFile file;
  file.name = parsed.name;
  file.on_events = on.size();
  file.windows = make_windows(on, options.k, *options.parse.vocab);
  return file;
}

std::vector<SampleWindow> concat_windows(std::span<const WindowedFile> files) {
  std::vector<SampleWindow> out;
  for (const auto& f : files) out.insert(out.end(), f.windows.begin(), f.windows.end());
  return out;
}

void write_windows_csv(std::ostream& out, std::span<const WindowedFile> files) {
  out << "file,t,pad_count,resident,activity\n";
  for (const auto& f : files) {
    for (std::size_t t = 0; t < f.windows.size(); ++t) {
      const auto& w = f.windows[t];
      out << f.name << ',' << t << ',' << w.pad_count << ',' << w.label.resident + 1
          << ',' << w.label.activity + 1 << '\n';
    }
  }
}

}  // namespace tscmrar
