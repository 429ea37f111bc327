#include "thermoforge/io.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <openssl/evp.h>
#include <sstream>

#include "thermoforge/errors.hpp"
#include "thermoforge/markov.hpp"

namespace thermoforge {
namespace {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

std::string strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return std::string(hash == std::string_view::npos ? line : line.substr(0, hash));
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::istringstream words(strip_comment(raw));
    Line line{number, {}};
    std::string token;
    while (words >> token) line.tokens.push_back(token);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& message) {
  throw InputError(fmt::format("{}:{}: {}", origin, line, message));
}

double parse_real(const std::string& token, const std::string& origin, int line) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    fail(origin, line, fmt::format("'{}' is not a finite number", token));
  }
  return value;
}

long long parse_integer(const std::string& token, const std::string& origin, int line) {
  long long value = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) fail(origin, line, fmt::format("'{}' is not an integer", token));
  return value;
}

Word parse_word(const std::string& token, int alphabet_size, const std::string& origin, int line) {
  Word w;
  if (alphabet_size <= 10 && token.find(',') == std::string::npos) {
    for (char c : token) {
      if (c < '0' || c > '9') fail(origin, line, fmt::format("bad symbol '{}' in word '{}'", c, token));
      w.push_back(c - '0');
    }
  } else {
    std::istringstream parts(token);
    std::string part;
    while (std::getline(parts, part, ',')) w.push_back(static_cast<Symbol>(parse_integer(part, origin, line)));
  }
  for (Symbol a : w) {
    if (a < 0 || a >= alphabet_size) fail(origin, line, fmt::format("symbol {} outside the alphabet", a));
  }
  return w;
}

std::string spell(const Word& w, int alphabet_size) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (alphabet_size <= 10) {
      out += static_cast<char>('0' + w[i]);
    } else {
      if (i) out += ',';
      out += std::to_string(w[i]);
    }
  }
  return out;
}

Reversal make_reversal(const std::string& kind, std::vector<Symbol> perm, const std::string& origin, int line) {
  if (kind == "time_reversal" || kind == "reversal") return Reversal::time_reversal(std::move(perm));
  if (kind == "commutation") return Reversal::commutation(std::move(perm));
  fail(origin, line, fmt::format("unknown reversal kind '{}' (time_reversal or commutation)", kind));
}

}  // namespace

ShiftSpace parse_shift_space(std::string_view text, const std::string& origin) {
  const auto lines = tokenize(text);
  if (lines.empty()) fail(origin, 0, "empty shift space file");
  if (lines[0].tokens.size() != 1) fail(origin, lines[0].number, "first line must be the alphabet size");
  const long long l = parse_integer(lines[0].tokens[0], origin, lines[0].number);
  if (l < 1 || l > 4096) fail(origin, lines[0].number, "alphabet size must be in 1..4096");
  if (static_cast<long long>(lines.size()) != l + 1) {
    fail(origin, lines.back().number, fmt::format("expected {} matrix rows, found {}", l, lines.size() - 1));
  }
  std::vector<std::vector<int>> rows;
  for (long long i = 1; i <= l; ++i) {
    const Line& line = lines[static_cast<std::size_t>(i)];
    if (static_cast<long long>(line.tokens.size()) != l) {
      fail(origin, line.number, fmt::format("row has {} entries, expected {}", line.tokens.size(), l));
    }
    std::vector<int> row;
    for (const auto& t : line.tokens) row.push_back(static_cast<int>(parse_integer(t, origin, line.number)));
    rows.push_back(std::move(row));
  }
  try {
    return ShiftSpace::make(static_cast<int>(l), rows);
  } catch (const Error& e) {
    fail(origin, lines[1].number, e.what());
  }
}

Potential parse_potential(std::string_view text, const ShiftSpace& s, const std::string& origin) {
  const auto lines = tokenize(text);
  if (lines.empty()) fail(origin, 0, "empty potential file");
  const Line& head = lines[0];
  const int l = s.alphabet_size();
  if (head.tokens[0] == "range") {
    if (head.tokens.size() != 2) fail(origin, head.number, "expected 'range R'");
    const long long r = parse_integer(head.tokens[1], origin, head.number);
    if (r < 1 || r > 16) fail(origin, head.number, "range must be in 1..16");
    std::map<Word, double> table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const Line& line = lines[i];
      if (line.tokens.size() != 2) fail(origin, line.number, "expected 'WORD VALUE'");
      Word w = parse_word(line.tokens[0], l, origin, line.number);
      if (static_cast<long long>(w.size()) != r) {
        fail(origin, line.number, fmt::format("word '{}' has length {}, range is {}", line.tokens[0], w.size(), r));
      }
      if (!table.emplace(std::move(w), parse_real(line.tokens[1], origin, line.number)).second) {
        fail(origin, line.number, fmt::format("duplicate word '{}'", line.tokens[0]));
      }
    }
    try {
      return Potential::additive(s, static_cast<int>(r), table);
    } catch (const Error& e) {
      fail(origin, head.number, e.what());
    }
  }
  if (head.tokens[0] == "matrices") {
    if (head.tokens.size() != 2) fail(origin, head.number, "expected 'matrices DIM'");
    const long long dim = parse_integer(head.tokens[1], origin, head.number);
    if (dim < 1 || dim > 64) fail(origin, head.number, "matrix dimension must be in 1..64");
    MatrixNorm norm = MatrixNorm::kInfinity;
    std::map<Symbol, Eigen::MatrixXd> matrices;
    std::size_t i = 1;
    while (i < lines.size()) {
      const Line& line = lines[i];
      if (line.tokens[0] == "norm" && line.tokens.size() == 2) {
        const std::string& name = line.tokens[1];
        if (name == "inf") {
          norm = MatrixNorm::kInfinity;
        } else if (name == "one") {
          norm = MatrixNorm::kOne;
        } else if (name == "frobenius") {
          norm = MatrixNorm::kFrobenius;
        } else {
          fail(origin, line.number, fmt::format("unknown norm '{}' (inf, one or frobenius)", name));
        }
        ++i;
        continue;
      }
      if (line.tokens[0] != "symbol" || line.tokens.size() != 2) {
        fail(origin, line.number, "expected 'symbol A' or 'norm NAME'");
      }
      const long long a = parse_integer(line.tokens[1], origin, line.number);
      if (a < 0 || a >= l) fail(origin, line.number, fmt::format("symbol {} outside the alphabet", a));
      Eigen::MatrixXd m(dim, dim);
      for (long long row = 0; row < dim; ++row) {
        if (i + 1 + static_cast<std::size_t>(row) >= lines.size()) fail(origin, line.number, "truncated matrix");
        const Line& data = lines[i + 1 + static_cast<std::size_t>(row)];
        if (static_cast<long long>(data.tokens.size()) != dim) {
          fail(origin, data.number, fmt::format("matrix row needs {} entries", dim));
        }
        for (long long col = 0; col < dim; ++col) {
          m(row, col) = parse_real(data.tokens[static_cast<std::size_t>(col)], origin, data.number);
        }
      }
      if (!matrices.emplace(static_cast<Symbol>(a), std::move(m)).second) {
        fail(origin, line.number, fmt::format("symbol {} given twice", a));
      }
      i += 1 + static_cast<std::size_t>(dim);
    }
    if (static_cast<int>(matrices.size()) != l) {
      fail(origin, head.number, fmt::format("need one matrix per symbol ({} given, alphabet {})", matrices.size(), l));
    }
    std::vector<Eigen::MatrixXd> ordered;
    for (auto& [a, m] : matrices) ordered.push_back(std::move(m));
    try {
      return Potential::matrix_product(s, std::move(ordered), norm);
    } catch (const Error& e) {
      fail(origin, head.number, e.what());
    }
  }
  fail(origin, head.number, "potential file must start with 'range R' or 'matrices DIM'");
}

Reversal parse_reversal(std::string_view text, const std::string& origin) {
  std::string kind;
  std::vector<Symbol> perm;
  int kind_line = 0;
  bool have_perm = false;
  for (const Line& line : tokenize(text)) {
    if (line.tokens[0] == "kind" && line.tokens.size() == 2) {
      kind = line.tokens[1];
      kind_line = line.number;
    } else if (line.tokens[0] == "perm") {
      perm.clear();
      for (std::size_t i = 1; i < line.tokens.size(); ++i) {
        perm.push_back(static_cast<Symbol>(parse_integer(line.tokens[i], origin, line.number)));
      }
      have_perm = true;
    } else {
      fail(origin, line.number, "expected 'kind NAME' or 'perm P0 P1 ...'");
    }
  }
  if (kind.empty()) fail(origin, 0, "missing 'kind' line");
  if (!have_perm) fail(origin, 0, "missing 'perm' line");
  return make_reversal(kind, std::move(perm), origin, kind_line);
}

Reversal parse_reversal_inline(std::string_view text, const std::string& origin) {
  const auto lines = tokenize(text);
  if (lines.size() != 1 || lines[0].tokens.size() < 2) {
    fail(origin, 0, "inline reversal must read 'KIND P0 P1 ...'");
  }
  std::vector<Symbol> perm;
  for (std::size_t i = 1; i < lines[0].tokens.size(); ++i) {
    perm.push_back(static_cast<Symbol>(parse_integer(lines[0].tokens[i], origin, 0)));
  }
  return make_reversal(lines[0].tokens[0], std::move(perm), origin, 0);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError(fmt::format("write to '{}' failed", path.string()));
}

ShiftSpace load_shift_space(const std::filesystem::path& path) {
  return parse_shift_space(read_text_file(path), path.string());
}

Potential load_potential(const std::filesystem::path& path, const ShiftSpace& s) {
  return parse_potential(read_text_file(path), s, path.string());
}

Reversal load_reversal(const std::filesystem::path& path) {
  return parse_reversal(read_text_file(path), path.string());
}

std::string format_shift_space(const ShiftSpace& s) {
  std::string out = fmt::format("{}\n", s.alphabet_size());
  for (const auto& row : s.matrix()) out += fmt::format("{}\n", fmt::join(row, " "));
  return out;
}

std::string format_reversal(const Reversal& theta) {
  return fmt::format("kind {}\nperm {}\n",
                     theta.kind == ReversalKind::kTimeReversal ? "time_reversal" : "commutation",
                     fmt::join(theta.perm, " "));
}

std::string format_potential(const ShiftSpace& s, const Potential& g) {
  const auto* a = g.as_additive();
  if (!a) throw ContractError("format_potential: additive potential required");
  std::string out = fmt::format("range {}\n", a->range());
  for (const Word& w : admissible_words(s, a->range())) {
    out += fmt::format("{} {}\n", spell(w, s.alphabet_size()), format_real(a->value(w)));
  }
  return out;
}

const ConfigEntry* ConfigFile::find(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

ConfigFile parse_config(std::string_view text, const std::string& origin) {
  ConfigFile config;
  config.origin = origin;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail(origin, number, "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      config.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, number, "expected 'key = value'");
    if (section.empty()) fail(origin, number, "key outside of any [section]");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) fail(origin, number, "empty key");
    auto [it, inserted] =
        config.sections[section].emplace(key, ConfigEntry{trim(std::string_view(line).substr(eq + 1)), number});
    if (!inserted) fail(origin, number, fmt::format("field '{}' repeated in [{}]", key, section));
  }
  return config;
}

std::string format_real(double x) {
  if (x == 0.0) return "0";
  return fmt::format("{:.17g}", x);
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != columns_.size()) throw ContractError("CsvTable: row width differs from the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out(kHeader);
  out += '\n';
  out += fmt::format("{}\n", fmt::join(columns_, ","));
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      const CsvCell& cell = row[i];
      if (const auto* d = std::get_if<double>(&cell)) {
        out += format_real(*d);
      } else if (const auto* n = std::get_if<long long>(&cell)) {
        out += std::to_string(*n);
      } else {
        out += std::get<std::string>(cell);
      }
    }
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256: digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace thermoforge
