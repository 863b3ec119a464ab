#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tscmrar/casas.hpp"
#include "tscmrar/error.hpp"

using namespace tscmrar;

namespace {

ParseErrorKind kind_of(std::string_view line) {
  try {
    parse_line(line, ParseOptions{}, "f.txt", 3);
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("expected a ParseError for: " << line);
  return ParseErrorKind::kIo;
}

std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("file" + std::to_string(100 + i));
  return out;
}

}  // namespace

TEST_SUITE("casas") {

TEST_CASE("vocabulary order") {
  const auto& v = SensorVocabulary::adlmr();
  CHECK(v.size() == 37);
  CHECK(v.index_of("M01") == 0u);
  CHECK(v.index_of("M13") == 12u);
  CHECK(v.index_of("M26") == 25u);
  CHECK(v.index_of("M51") == 26u);
  CHECK(v.index_of("I04") == 27u);
  CHECK(v.index_of("I06") == 28u);
  CHECK(v.index_of("D07") == 29u);
  CHECK(v.index_of("D09") == 30u);
  CHECK(v.index_of("D15") == 36u);
  CHECK_FALSE(v.index_of("M99").has_value());
  CHECK_FALSE(v.index_of("D08").has_value());
  CHECK_THROWS_AS(SensorVocabulary({"A", "A"}), DataError);
  CHECK(adlmr_activity_names().size() == 15);
}

TEST_CASE("parse a labeled line") {
  const auto parsed = parse_line("2009-02-02 12:18:45.51 M13 ON 2 5", ParseOptions{});
  REQUIRE(parsed.status == LineStatus::kEvent);
  const SensorEvent& e = parsed.event;
  CHECK(e.sensor == 12);
  CHECK(e.value == "ON");
  CHECK(e.label.resident == 1);
  CHECK(e.label.activity == 4);
  CHECK(e.date == "2009-02-02");
  CHECK(e.time == "12:18:45.51");
  CHECK(e.seconds == doctest::Approx(12 * 3600 + 18 * 60 + 45.51));
  CHECK(e.day == 14277);  // days from 1970-01-01
}

TEST_CASE("blank, unlabeled and tab-separated lines") {
  CHECK(parse_line("", ParseOptions{}).status == LineStatus::kBlank);
  CHECK(parse_line("   \t ", ParseOptions{}).status == LineStatus::kBlank);
  const auto unlabeled = parse_line("2009-02-02 12:18:45 M01 OFF", ParseOptions{});
  CHECK(unlabeled.status == LineStatus::kUnlabeled);
  CHECK(unlabeled.event.sensor == 0);
  const auto tabs = parse_line("2009-02-02\t12:18:45\tD15\tON\t1\t15\r", ParseOptions{});
  REQUIRE(tabs.status == LineStatus::kEvent);
  CHECK(tabs.event.sensor == 36);
  CHECK(tabs.event.label.activity == 14);
}

TEST_CASE("malformed lines raise the documented error kind") {
  CHECK(kind_of("2009-02-02 12:18:45.51 M99 ON 1 1") == ParseErrorKind::kUnknownSensor);
  CHECK(kind_of("2009-02-02 12:18:45.51 M13 ON 2") == ParseErrorKind::kFieldCount);
  CHECK(kind_of("2009-02-02 12:18:45.51 M13 ON 2 5 7") == ParseErrorKind::kFieldCount);
  CHECK(kind_of("2009-02-02") == ParseErrorKind::kFieldCount);
  CHECK(kind_of("2009-02-02 12:18:45.51 M13 ON 3 5") == ParseErrorKind::kLabelRange);
  CHECK(kind_of("2009-02-02 12:18:45.51 M13 ON 0 5") == ParseErrorKind::kLabelRange);
  CHECK(kind_of("2009-02-02 12:18:45.51 M13 ON 1 16") == ParseErrorKind::kLabelRange);
  CHECK(kind_of("2009-02-02 12:18:45.51 M13 ON x 5") == ParseErrorKind::kLabelRange);
  CHECK(kind_of("2009-02-30 12:18:45.51 M13 ON 1 5") == ParseErrorKind::kTimestamp);
  CHECK(kind_of("2009-02-02 25:18:45.51 M13 ON 1 5") == ParseErrorKind::kTimestamp);
  CHECK(kind_of("2009/02/02 12:18:45 M13 ON 1 5") == ParseErrorKind::kTimestamp);
  CHECK(kind_of("2009-02-02 12:18:45,5 M13 ON 1 5") == ParseErrorKind::kTimestamp);
}

TEST_CASE("parse errors carry file and line") {
  try {
    parse_line("2009-02-02 12:18:45.51 M99 ON 1 1", ParseOptions{}, "p17.txt", 42);
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.file() == "p17.txt");
    CHECK(e.line() == 42);
    CHECK(std::string(e.what()).rfind("p17.txt:42: unknown sensor tag", 0) == 0);
  }
}

TEST_CASE("unknown sensors can be skipped") {
  ParseOptions options;
  options.unknown_sensors = UnknownSensorPolicy::kSkip;
  CHECK(parse_line("2009-02-02 12:18:45.51 M99 ON 1 1", options).status ==
        LineStatus::kUnknownSensor);
  const auto file = parse_text("a", "2009-02-02 12:00:00 M99 ON 1 1\n2009-02-02 12:00:01 M01 ON 1 1\n",
                               options);
  CHECK(file.unknown_skipped == 1);
  CHECK(file.events.size() == 1);
}

TEST_CASE("parse_text counts and orders") {
  const std::string text =
      "2009-02-02 12:00:00 M01 ON 1 1\n"
      "\n"
      "2009-02-02 12:00:01 M02 ON\n"
      "2009-02-02 12:00:02 M02 OFF 2 3\n";
  const auto file = parse_text("x.txt", text, ParseOptions{});
  CHECK(file.events.size() == 2);
  CHECK(file.unlabeled_skipped == 1);
  CHECK(file.events[1].value == "OFF");

  try {
    parse_text("x.txt", "2009-02-02 12:00:05 M01 ON 1 1\n2009-02-02 12:00:04 M01 ON 1 1\n",
               ParseOptions{});
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::kOutOfOrder);
    CHECK(e.line() == 2);
  }
  // crossing midnight is in order
  CHECK_NOTHROW(parse_text("x", "2009-02-02 23:59:59 M01 ON 1 1\n2009-02-03 00:00:00 M01 ON 1 1\n",
                           ParseOptions{}));
}

TEST_CASE("format_line round-trips") {
  const std::string line = "2009-02-02 12:18:45.51 M13 ON 2 5";
  const auto e = parse_line(line, ParseOptions{}).event;
  CHECK(format_line(e, SensorVocabulary::adlmr()) == line);
}

TEST_CASE("corpus listing") {
  test::TempDir dir("casas-list");
  CHECK_THROWS_AS(list_corpus_files(dir.path()), DataError);
  CHECK_THROWS_AS(list_corpus_files(dir / "missing"), DataError);
  std::ofstream(dir / "b.txt") << "";
  std::ofstream(dir / "a.txt") << "";
  std::ofstream(dir / ".hidden") << "";
  std::filesystem::create_directories(dir / "sub");
  const auto files = list_corpus_files(dir.path());
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.txt");
  CHECK(files[1].filename() == "b.txt");
  CHECK_THROWS_AS(parse_file(dir / "nope.txt", ParseOptions{}), ParseError);
}

TEST_CASE("filter_on") {
  const auto f = parse_text("x",
                            "2009-02-02 12:00:00 M01 ON 1 1\n"
                            "2009-02-02 12:00:01 M02 OFF 1 1\n"
                            "2009-02-02 12:00:02 M03 ON 1 1\n",
                            ParseOptions{});
  const auto on = filter_on(f.events);
  REQUIRE(on.size() == 2);
  CHECK(on[0].sensor == 0);
  CHECK(on[1].sensor == 2);
  CHECK(filter_on(on).size() == 2);  // idempotent
  CHECK(filter_on(std::span(f.events).subspan(1, 1)).empty());
  CHECK(filter_on(f.events, "on").empty());  // exact match
}

TEST_CASE("one_hot") {
  const auto& v = SensorVocabulary::adlmr();
  const Tensor m01 = one_hot(0, v.size());
  CHECK(m01.shape() == Shape{1, 37});
  CHECK(m01[0] == 1.0);
  const Tensor d15 = one_hot(parse_line("2009-02-02 12:00:00 D15 ON 1 1", ParseOptions{}).event, v);
  CHECK(d15[36] == 1.0);
  for (std::size_t s = 0; s < v.size(); ++s) {
    const Tensor t = one_hot(s, v.size());
    CHECK(std::count(t.data().begin(), t.data().end(), 1.0) == 1);
    CHECK(std::count(t.data().begin(), t.data().end(), 0.0) == 36);
  }
  CHECK_THROWS(one_hot(37, v.size()));
}

TEST_CASE("split sizes") {
  const auto s26 = split_files(numbered(26), 0.7, 1);
  CHECK(s26.train_files.size() == 18);
  CHECK(s26.test_files.size() == 8);
  const auto s10 = split_files(numbered(10), 0.7, 1);
  CHECK(s10.train_files.size() == 7);
  CHECK(s10.test_files.size() == 3);
  CHECK_THROWS_AS(split_files({}, 0.7, 1), DataError);
}

TEST_CASE("split is deterministic, a partition, and independent of input order") {
  auto files = numbered(26);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = split_files(files, 0.7, seed);
    auto reversed = files;
    std::reverse(reversed.begin(), reversed.end());
    const auto b = split_files(reversed, 0.7, seed);
    CHECK(a.train_files == b.train_files);
    CHECK(a.test_files == b.test_files);
    std::set<std::string> all(a.train_files.begin(), a.train_files.end());
    for (const auto& f : a.test_files) CHECK(all.insert(f).second);
    CHECK(all == std::set<std::string>(files.begin(), files.end()));
  }
  CHECK(split_files(files, 0.7, 1).train_files != split_files(files, 0.7, 2).train_files);
}

TEST_CASE("events csv") {
  const auto f = parse_text("x", "2009-02-02 12:00:00 M01 ON 2 15\n", ParseOptions{});
  std::ostringstream out;
  write_events_csv(out, f.events, SensorVocabulary::adlmr());
  CHECK(out.str() == "date,time,sensor,value,resident,activity\n2009-02-02,12:00:00,M01,ON,2,15\n");
}

}  // TEST_SUITE
