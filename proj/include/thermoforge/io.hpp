#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "thermoforge/potential.hpp"
#include "thermoforge/shift_space.hpp"

namespace thermoforge {

// Text formats. Blank lines and '#' comments are ignored everywhere; errors
// are InputError messages prefixed with "origin:line:".
//
// Shift space:          Potential (additive):     Potential (matrix product):
//   2                     range 2                   matrices 2
//   1 1                   00 0.25                   norm inf
//   1 0                   01 -1                     symbol 0
//                         10 0.5                    2 1
//                                                   1 1
//                                                   symbol 1
//                                                   ...
// Words are digit strings when l <= 10, comma-separated symbols otherwise.
//
// Reversal:
//   kind time_reversal     (or commutation)
//   perm 1 0

ShiftSpace parse_shift_space(std::string_view text, const std::string& origin);
Potential parse_potential(std::string_view text, const ShiftSpace& s, const std::string& origin);
Reversal parse_reversal(std::string_view text, const std::string& origin);
/// One-line form "time_reversal 1 0".
Reversal parse_reversal_inline(std::string_view text, const std::string& origin);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

ShiftSpace load_shift_space(const std::filesystem::path& path);
Potential load_potential(const std::filesystem::path& path, const ShiftSpace& s);
Reversal load_reversal(const std::filesystem::path& path);

std::string format_shift_space(const ShiftSpace& s);
std::string format_reversal(const Reversal& theta);
/// Additive potentials only: one line per admissible range-word.
std::string format_potential(const ShiftSpace& s, const Potential& g);

/// Sectioned key = value file.
struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct ConfigFile {
  std::string origin;
  std::map<std::string, std::map<std::string, ConfigEntry>> sections;

  const ConfigEntry* find(const std::string& section, const std::string& key) const;
};

ConfigFile parse_config(std::string_view text, const std::string& origin);

/// Floats with 17 significant digits; -0 prints as 0.
std::string format_real(double x);

using CsvCell = std::variant<double, long long, std::string>;

class CsvTable {
 public:
  static constexpr std::string_view kHeader = "# thermoforge-csv v1";

  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<CsvCell> row);
  std::size_t rows() const { return rows_.size(); }
  std::string render() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<CsvCell>> rows_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace thermoforge
