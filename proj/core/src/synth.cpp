#include "tscmrar/synth.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "tscmrar/casas.hpp"
#include "tscmrar/error.hpp"
#include "tscmrar/random.hpp"

namespace tscmrar {

namespace {

constexpr std::size_t kZoneSize = 4;

std::string format_date(std::int64_t day) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time(std::int64_t centiseconds) {
  const std::int64_t seconds = centiseconds / 100;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld.%02lld",
                static_cast<long long>(seconds / 3600),
                static_cast<long long>(seconds / 60 % 60),
                static_cast<long long>(seconds % 60),
                static_cast<long long>(centiseconds % 100));
  return buf;
}

// Sensor zones per activity, shared by every file of a corpus.
std::vector<std::vector<std::size_t>> activity_zones(const SynthProfile& profile,
                                                     std::uint64_t seed) {
  Rng rng(derive_seed(seed, "synth-zones"));
  std::vector<std::vector<std::size_t>> zones(profile.activities);
  for (auto& zone : zones) {
    const std::size_t start = static_cast<std::size_t>(rng.below(profile.sensors));
    for (std::size_t i = 0; i < std::min(kZoneSize, profile.sensors); ++i) {
      zone.push_back((start + i) % profile.sensors);
    }
  }
  return zones;
}

}  // namespace

void SynthProfile::validate() const {
  if (sensors == 0 || residents == 0 || activities == 0 || events_per_file == 0 ||
      files == 0) {
    throw DataError("synthetic profile counts must all be positive");
  }
  if (sensors > SensorVocabulary::adlmr().size()) {
    throw DataError("synthetic profile supports at most " +
                    std::to_string(SensorVocabulary::adlmr().size()) + " sensors");
  }
}

std::string synth_file_text(const SynthProfile& profile, std::uint64_t seed,
                            std::size_t index) {
  profile.validate();
  const auto& vocab = SensorVocabulary::adlmr();
  const auto zones = activity_zones(profile, seed);
  Rng rng(derive_seed(seed, "synth-file", index));

  using namespace std::chrono;
  std::int64_t day =
      sys_days{year{2009} / February / 2}.time_since_epoch().count() +
      static_cast<std::int64_t>(index);
  std::int64_t clock = (9 * 3600 + static_cast<std::int64_t>(rng.below(3600))) * 100;

  std::string text;
  auto emit = [&](std::size_t sensor, const char* value, std::size_t resident,
                  std::size_t activity) {
    text += format_date(day);
    text += ' ';
    text += format_time(clock);
    text += ' ';
    text += vocab.tag(sensor);
    text += ' ';
    text += value;
    text += ' ';
    text += std::to_string(resident + 1);
    text += ' ';
    text += std::to_string(activity + 1);
    text += '\n';
  };
  auto advance = [&](std::int64_t lo, std::int64_t hi) {
    clock += lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    if (clock >= 86400 * 100) {
      clock -= 86400 * 100;
      ++day;
    }
  };

  std::size_t emitted = 0;
  while (emitted < profile.events_per_file) {
    const auto activity = static_cast<std::size_t>(rng.below(profile.activities));
    const auto resident = static_cast<std::size_t>(rng.below(profile.residents));
    const auto& zone = zones[activity];
    const std::size_t preferred = zone[(resident * 2 + activity) % zone.size()];
    const std::size_t length = 5 + static_cast<std::size_t>(rng.below(26));
    for (std::size_t i = 0; i < length && emitted < profile.events_per_file; ++i) {
      const double roll = rng.uniform();
      std::size_t sensor;
      if (roll < 0.45) {
        sensor = preferred;
      } else if (roll < 0.85) {
        sensor = zone[static_cast<std::size_t>(rng.below(zone.size()))];
      } else {
        sensor = static_cast<std::size_t>(rng.below(profile.sensors));
      }
      advance(50, 500);
      emit(sensor, "ON", resident, activity);
      ++emitted;
      if (rng.uniform() < 0.7) {
        advance(10, 300);
        emit(sensor, "OFF", resident, activity);
      }
    }
    advance(500, 6000);
  }
  return text;
}

std::vector<std::filesystem::path> write_synth_corpus(const SynthProfile& profile,
                                                      std::uint64_t seed,
                                                      const std::filesystem::path& dir) {
  profile.validate();
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < profile.files; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%02zu.txt", i + 1);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << synth_file_text(profile, seed, i);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
    paths.push_back(path);
  }
  return paths;
}

}  // namespace tscmrar
