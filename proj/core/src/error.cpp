#include "tscmrar/error.hpp"

#include <utility>

namespace tscmrar {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kFieldCount: return "field count mismatch";
    case ParseErrorKind::kTimestamp: return "unparseable timestamp";
    case ParseErrorKind::kUnknownSensor: return "unknown sensor tag";
    case ParseErrorKind::kLabelRange: return "label out of range";
    case ParseErrorKind::kOutOfOrder: return "timestamp out of order";
    case ParseErrorKind::kIo: return "i/o error";
  }
  return "parse error";
}

ParseError::ParseError(ParseErrorKind kind, std::string file, std::size_t line,
                       const std::string& detail)
    : DataError(file + ":" + std::to_string(line) + ": " + to_string(kind) +
                ": " + detail),
      kind_(kind),
      file_(std::move(file)),
      line_(line) {}

}  // namespace tscmrar
