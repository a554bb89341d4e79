#pragma once

#include <map>
#include <string>
#include <vector>

#include "anchored/model.hpp"

namespace anchored {

// Model files: JSON with sections prior/payoffs/cost/anchor/message_space;
// reals are 64-bit floats. Only the named functional families round-trip.
ModelSpec model_from_json_text(const std::string& text);
ModelSpec model_from_json_file(const std::string& path);
std::string model_to_json_text(const ModelSpec& model);

// Dotted-key overrides, e.g. "cost.c=2" or "anchor.sigma=0.5"; applied on
// top of the parsed JSON before construction.
ModelSpec model_from_json_text_with_overrides(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// CSV writer: '#'-prefixed metadata header (command, version, parameters,
// seed), then a header row, '.' decimals, LF endings.
class CsvWriter {
 public:
  CsvWriter(std::string path, std::string command,
            std::map<std::string, std::string> metadata);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void row_raw(const std::vector<std::string>& cells);
  void close();

 private:
  std::string path_;
  std::string buffer_;
  bool closed_{false};
};

std::string format_double(double v);

}  // namespace anchored
