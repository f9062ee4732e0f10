// Plain-text data products: CSV tables with '#' metadata, key = value
// summaries, and a run manifest carrying SHA-256 checksums.
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qkr {

/// Shortest form that parses back to the same double (17 significant digits).
std::string format_number(double value);

std::string sha256_hex(std::string_view data);

struct CsvTable {
  std::vector<std::string> comments;  // written as "# ..." lines
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string render() const;
};

struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

ParsedCsv parse_csv(std::string_view text);

/// Files produced by one run; held in memory until the run succeeds.
class OutputSet {
 public:
  void add(std::string name, std::string content);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  /// Writes every file plus `manifest.txt` into `dir` (created if needed).
  void write(const std::filesystem::path& dir, const std::string& manifest) const;

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Recomputes the checksums listed in dir/manifest.txt. Returns the names
/// of files whose checksum is missing or wrong (empty = intact).
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);

}  // namespace qkr
