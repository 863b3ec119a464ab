#include "tscmrar/casas.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>

#include "tscmrar/error.hpp"
#include "tscmrar/random.hpp"

namespace tscmrar {

namespace {

std::vector<std::string> adlmr_tags() {
  std::vector<std::string> tags;
  auto numbered = [&tags](char prefix, int id) {
    std::string tag(1, prefix);
    if (id < 10) tag += '0';
    tag += std::to_string(id);
    tags.push_back(std::move(tag));
  };
  for (int id = 1; id <= 26; ++id) numbered('M', id);
  numbered('M', 51);
  numbered('I', 4);
  numbered('I', 6);
  numbered('D', 7);
  for (int id = 9; id <= 15; ++id) numbered('D', id);
  return tags;
}

constexpr std::array<std::string_view, 15> kActivityNames = {
    "Filling medication dispenser",
    "Hanging up clothes",
    "Moving furniture",
    "Reading magazine (R2)",
    "Watering plants",
    "Sweeping floor",
    "Playing checkers",
    "Preparing dinner",
    "Setting table",
    "Reading magazine (R1)",
    "Paying bills",
    "Packing picnic food",
    "Retrieving dishes",
    "Packing picnic supplies",
    "Packing and bring supplies",
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool all_digits(std::string_view text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<std::int64_t> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
      !all_digits(text.substr(8, 2)) || !parse_int(text.substr(0, 4), y) ||
      !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count();
}

std::optional<double> parse_time(std::string_view text) {
  if (text.size() < 8 || text[2] != ':' || text[5] != ':') return std::nullopt;
  int h = 0, m = 0, s = 0;
  if (!all_digits(text.substr(0, 2)) || !all_digits(text.substr(3, 2)) ||
      !all_digits(text.substr(6, 2))) {
    return std::nullopt;
  }
  parse_int(text.substr(0, 2), h);
  parse_int(text.substr(3, 2), m);
  parse_int(text.substr(6, 2), s);
  if (h > 23 || m > 59 || s > 59) return std::nullopt;
  double fraction = 0.0;
  if (text.size() > 8) {
    std::string_view frac = text.substr(9);
    if (text[8] != '.' || !all_digits(frac)) return std::nullopt;
    double scale = 0.1;
    for (char c : frac) {
      fraction += (c - '0') * scale;
      scale *= 0.1;
    }
  }
  return h * 3600.0 + m * 60.0 + s + fraction;
}

std::size_t parse_label(std::string_view text, std::size_t limit, const char* what,
                        std::string_view file, std::size_t line_no) {
  std::size_t value = 0;
  if (!parse_int(text, value) || value < 1 || value > limit) {
    throw ParseError(ParseErrorKind::kLabelRange, std::string(file), line_no,
                     std::string(what) + " '" + std::string(text) +
                         "' not in 1.." + std::to_string(limit));
  }
  return value - 1;
}

}  // namespace

SensorVocabulary::SensorVocabulary(std::vector<std::string> tags)
    : tags_(std::move(tags)) {
  if (tags_.empty()) throw DataError("sensor vocabulary is empty");
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (!index_.emplace(tags_[i], i).second) {
      throw DataError("duplicate sensor tag '" + tags_[i] + "'");
    }
  }
}

const SensorVocabulary& SensorVocabulary::adlmr() {
  static const SensorVocabulary vocab(adlmr_tags());
  return vocab;
}

std::optional<std::size_t> SensorVocabulary::index_of(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::string_view> adlmr_activity_names() { return kActivityNames; }

ParsedLine parse_line(std::string_view line, const ParseOptions& options,
                      std::string_view file, std::size_t line_no) {
  ParsedLine result;
  const auto fields = split_fields(line);
  if (fields.empty()) return result;
  if (fields.size() != 4 && fields.size() != 6) {
    throw ParseError(ParseErrorKind::kFieldCount, std::string(file), line_no,
                     "expected 6 fields (date time sensor value resident activity), got " +
                         std::to_string(fields.size()));
  }
  SensorEvent& ev = result.event;
  const auto day = parse_date(fields[0]);
  const auto seconds = parse_time(fields[1]);
  if (!day || !seconds) {
    throw ParseError(ParseErrorKind::kTimestamp, std::string(file), line_no,
                     "'" + std::string(fields[0]) + " " + std::string(fields[1]) + "'");
  }
  ev.date = fields[0];
  ev.time = fields[1];
  ev.day = *day;
  ev.seconds = *seconds;
  ev.value = fields[3];

  const auto sensor = options.vocab->index_of(fields[2]);
  if (!sensor) {
    if (options.unknown_sensors == UnknownSensorPolicy::kSkip) {
      result.status = LineStatus::kUnknownSensor;
      return result;
    }
    throw ParseError(ParseErrorKind::kUnknownSensor, std::string(file), line_no,
                     "'" + std::string(fields[2]) + "'");
  }
  ev.sensor = *sensor;

  if (fields.size() == 4) {
    result.status = LineStatus::kUnlabeled;
    return result;
  }
  ev.label.resident =
      parse_label(fields[4], options.labels.residents, "resident", file, line_no);
  ev.label.activity =
      parse_label(fields[5], options.labels.activities, "activity", file, line_no);
  result.status = LineStatus::kEvent;
  return result;
}

std::string format_line(const SensorEvent& event, const SensorVocabulary& vocab) {
  std::string out;
  out.reserve(48);
  out += event.date;
  out += ' ';
  out += event.time;
  out += ' ';
  out += vocab.tag(event.sensor);
  out += ' ';
  out += event.value;
  out += ' ';
  out += std::to_string(event.label.resident + 1);
  out += ' ';
  out += std::to_string(event.label.activity + 1);
  return out;
}

CasasFile parse_text(std::string name, std::string_view text,
                     const ParseOptions& options) {
  CasasFile file;
  file.name = std::move(name);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_previous = false;
  std::int64_t prev_day = 0;
  double prev_seconds = 0.0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    ParsedLine parsed = parse_line(line, options, file.name, line_no);
    if (parsed.status == LineStatus::kBlank) continue;
    if (parsed.status == LineStatus::kUnknownSensor) {
      ++file.unknown_skipped;
      continue;
    }
    const SensorEvent& ev = parsed.event;
    if (have_previous &&
        (ev.day < prev_day || (ev.day == prev_day && ev.seconds < prev_seconds))) {
      throw ParseError(ParseErrorKind::kOutOfOrder, file.name, line_no,
                       ev.date + " " + ev.time + " precedes the previous event");
    }
    have_previous = true;
    prev_day = ev.day;
    prev_seconds = ev.seconds;
    if (parsed.status == LineStatus::kUnlabeled) {
      ++file.unlabeled_skipped;
      continue;
    }
    file.events.push_back(std::move(parsed.event));
  }
  return file;
}

CasasFile parse_file(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(ParseErrorKind::kIo, path.string(), 0, "cannot open file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw ParseError(ParseErrorKind::kIo, path.string(), 0, "read failed");
  return parse_text(path.filename().string(), buffer.str(), options);
}

std::vector<std::filesystem::path> list_corpus_files(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw DataError("dataset directory '" + dir.string() + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && !name.empty() && name[0] != '.') {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw DataError("dataset directory '" + dir.string() + "' is empty");
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<SensorEvent> filter_on(std::span<const SensorEvent> events,
                                   std::string_view value) {
  std::vector<SensorEvent> out;
  for (const auto& ev : events) {
    if (ev.value == value) out.push_back(ev);
  }
  return out;
}

Tensor one_hot(std::size_t sensor, std::size_t vocab_size) {
  if (sensor >= vocab_size) {
    throw DataError("sensor index " + std::to_string(sensor) + " outside vocabulary of " +
                    std::to_string(vocab_size));
  }
  Tensor out(Shape{1, vocab_size});
  out[sensor] = 1.0;
  return out;
}

Tensor one_hot(const SensorEvent& event, const SensorVocabulary& vocab) {
  return one_hot(event.sensor, vocab.size());
}

DatasetSplit split_files(std::span<const std::string> files, double ratio,
                         std::uint64_t seed) {
  if (files.empty()) throw DataError("split_files: no files to split");
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw DataError("split_files: ratio must be in (0, 1]");
  }
  std::vector<std::string> order(files.begin(), files.end());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw DataError("split_files: duplicate file names");
  }
  Rng rng(seed);
  rng.shuffle(order);
  const auto train_count = static_cast<std::size_t>(
      std::lround(ratio * static_cast<double>(order.size())));
  DatasetSplit split;
  split.seed = seed;
  split.train_files.assign(order.begin(), order.begin() + train_count);
  split.test_files.assign(order.begin() + train_count, order.end());
  std::sort(split.train_files.begin(), split.train_files.end());
  std::sort(split.test_files.begin(), split.test_files.end());
  return split;
}

void write_events_csv(std::ostream& out, std::span<const SensorEvent> events,
                      const SensorVocabulary& vocab) {
  out << "date,time,sensor,value,resident,activity\n";
  for (const auto& ev : events) {
    out << ev.date << ',' << ev.time << ',' << vocab.tag(ev.sensor) << ',' << ev.value
        << ',' << ev.label.resident + 1 << ',' << ev.label.activity + 1 << '\n';
  }
}

}  // namespace tscmrar
