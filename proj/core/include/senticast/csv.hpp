#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace senticast::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name, -1 if absent.
  int column(std::string_view name) const;
};

/// RFC 4180 reader: quoted fields, embedded separators/quotes/newlines,
/// LF or CRLF line endings. First record is the header.
Table read_file(const std::filesystem::path& path);
Table read_string(std::string_view data);

std::string escape_field(std::string_view field);

/// Buffered RFC 4180 writer with LF line endings.
class Writer {
 public:
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return buffer_; }
  /// Writes the buffer to `path`, truncating any existing file.
  void save(const std::filesystem::path& path) const;

 private:
  std::string buffer_;
};

void write_text_file(const std::filesystem::path& path, std::string_view data);
std::string read_text_file(const std::filesystem::path& path);

/// Fixed-decimal formatting used by report CSVs ("%.6f" at decimals=6).
std::string format_fixed(double v, int decimals);
/// Shortest round-trip representation; parsing it recovers the exact double.
std::string format_shortest(double v);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace senticast::csv
