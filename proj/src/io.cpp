#include "qkr/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qkr {

std::string format_number(double value) {
  std::array<char, 32> buffer{};
  std::snprintf(buffer.data(), buffer.size(), "%.17g", value);
  return buffer.data();
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string CsvTable::render() const {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::size_t ParsedCsv::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no CSV column '" + name + "'");
}

ParsedCsv parse_csv(std::string_view text) {
  ParsedCsv csv;
  std::istringstream stream{std::string(text)};
  std::string line;
  while (std::getline(stream, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (csv.header.empty()) {
      csv.header = std::move(cells);
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw std::runtime_error("bad CSV number '" + c + "'");
      }
      row.push_back(v);
    }
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

void OutputSet::add(std::string name, std::string content) {
  files_.emplace_back(std::move(name), std::move(content));
}

namespace {

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void OutputSet::write(const std::filesystem::path& dir, const std::string& manifest) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files_) write_file(dir / name, content);
  write_file(dir / "manifest.txt", manifest);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  std::istringstream manifest(read_file(dir / "manifest.txt"));
  std::vector<std::string> bad;
  std::string line;
  bool any = false;
  while (std::getline(manifest, line)) {
    // sha256 <name> = <hex>
    if (line.rfind("sha256 ", 0) != 0) continue;
    any = true;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      bad.push_back(line);
      continue;
    }
    const std::string name = line.substr(7, eq - 7);
    const std::string expected = line.substr(eq + 3);
    const auto path = dir / name;
    if (!std::filesystem::exists(path) || sha256_hex(read_file(path)) != expected) bad.push_back(name);
  }
  if (!any) bad.emplace_back("manifest.txt");
  return bad;
}

}  // namespace qkr
