#pragma once

// CASAS multi-resident log ingestion. One event per line:
//
//   2009-02-02 12:18:45.51 M13 ON 2 5
//   date       time        tag value resident activity
//
// Resident and activity are 1-based in the file and 0-based in memory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tscmrar/tensor.hpp"

namespace tscmrar {

// Ordered, closed set of sensor tags; a tag's index is its one-hot position.
class SensorVocabulary {
 public:
  explicit SensorVocabulary(std::vector<std::string> tags);

  // M01..M26, M51, I04, I06, D07, D09..D15 (37 tags).
  static const SensorVocabulary& adlmr();

  std::size_t size() const { return tags_.size(); }
  std::optional<std::size_t> index_of(std::string_view tag) const;
  const std::string& tag(std::size_t index) const { return tags_.at(index); }
  const std::vector<std::string>& tags() const { return tags_; }

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Number of resident and activity classes. Defaults match the ADLMR corpus.
struct LabelSpace {
  std::size_t residents = 2;
  std::size_t activities = 15;

  std::size_t composite_classes() const { return residents * activities; }
  bool operator==(const LabelSpace&) const = default;
};

// Activity names of the ADLMR task, indexed by activity id - 1.
std::span<const std::string_view> adlmr_activity_names();

struct LabelPair {
  std::size_t resident = 0;
  std::size_t activity = 0;

  bool operator==(const LabelPair&) const = default;
};

struct SensorEvent {
  std::string date;  // as written, YYYY-MM-DD
  std::string time;  // as written, HH:MM:SS[.fraction]
  std::int64_t day = 0;       // days since 1970-01-01
  double seconds = 0.0;       // seconds since midnight
  std::size_t sensor = 0;     // vocabulary index
  std::string value;
  LabelPair label;
};

enum class UnknownSensorPolicy { kError, kSkip };

struct ParseOptions {
  const SensorVocabulary* vocab = &SensorVocabulary::adlmr();
  LabelSpace labels{};
  UnknownSensorPolicy unknown_sensors = UnknownSensorPolicy::kError;
};

enum class LineStatus { kEvent, kBlank, kUnlabeled, kUnknownSensor };

struct ParsedLine {
  LineStatus status = LineStatus::kBlank;
  SensorEvent event;
};

// Throws ParseError (with `file` and `line_no`) on malformed lines. Lines with
// only four fields are unlabeled and reported as such rather than rejected.
ParsedLine parse_line(std::string_view line, const ParseOptions& options,
                      std::string_view file = "<input>", std::size_t line_no = 0);

// Inverse of parse_line for labeled events.
std::string format_line(const SensorEvent& event, const SensorVocabulary& vocab);

struct CasasFile {
  std::string name;
  std::vector<SensorEvent> events;  // labeled events, all values
  std::size_t unlabeled_skipped = 0;
  std::size_t unknown_skipped = 0;
};

// Also verifies that timestamps never decrease.
CasasFile parse_text(std::string name, std::string_view text,
                     const ParseOptions& options);
CasasFile parse_file(const std::filesystem::path& path, const ParseOptions& options);

// Regular, non-hidden files of `dir` sorted by name. Throws DataError when the
// directory is missing or holds no files.
std::vector<std::filesystem::path> list_corpus_files(const std::filesystem::path& dir);

// Events whose value equals `value` exactly, in order.
std::vector<SensorEvent> filter_on(std::span<const SensorEvent> events,
                                   std::string_view value = "ON");

// [1 x vocab.size()] indicator of the event's sensor.
Tensor one_hot(const SensorEvent& event, const SensorVocabulary& vocab);
Tensor one_hot(std::size_t sensor, std::size_t vocab_size);

struct DatasetSplit {
  std::vector<std::string> train_files;
  std::vector<std::string> test_files;
  std::uint64_t seed = 0;
};

// Shuffles the name-sorted list with `seed` and takes round(ratio * n) files
// for training.
DatasetSplit split_files(std::span<const std::string> files, double ratio,
                         std::uint64_t seed);

// "date,time,sensor,value,resident,activity" with 1-based labels.
void write_events_csv(std::ostream& out, std::span<const SensorEvent> events,
                      const SensorVocabulary& vocab);

}  // namespace tscmrar
