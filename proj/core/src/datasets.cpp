#include "mlfd/datasets.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <string>

#include "mlfd/errors.h"

namespace mlfd::data {

namespace {

using inference::FreqTable;

FreqTable contiguous(const std::vector<std::uint64_t>& counts) {
  std::vector<FreqTable::Row> rows;
  rows.reserve(counts.size());
  for (std::size_t x = 0; x < counts.size(); ++x) rows.emplace_back(x, counts[x]);
  return FreqTable(std::move(rows));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"lundberg", "taylor", "skellam"};
  return names;
}

FreqTable embedded_fixture(std::string_view name) {
  if (name == "lundberg") {
    return contiguous({187, 185, 200, 164, 107, 68, 49, 39, 21, 12, 11, 2, 5, 2, 3, 1});
  }
  if (name == "taylor") {
    return contiguous({31, 35, 55, 59, 49, 59, 41, 38, 32, 31, 24, 22, 22, 17,
                       16, 10, 8,  8,  11, 4,  3,  6,  9,  4,  7,  6,  8,  8});
  }
  if (name == "skellam") {
    return contiguous({32, 103, 122, 80});
  }
  throw DataError("unknown fixture '" + std::string(name) + "'");
}

FreqTable read_csv(std::istream& in) {
  std::vector<FreqTable::Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw DataError("line " + std::to_string(line_no) + ": expected 'value,count'");
    }
    std::uint64_t value = 0;
    std::uint64_t count = 0;
    const bool ok = parse_u64(view.substr(0, comma), value) && parse_u64(view.substr(comma + 1), count);
    if (!ok) {
      if (!seen_content) {
        seen_content = true;  // header
        continue;
      }
      throw DataError("line " + std::to_string(line_no) + ": expected two non-negative integers 'value,count'");
    }
    seen_content = true;
    if (count == 0) throw DataError("line " + std::to_string(line_no) + ": count must be positive");
    const auto dup = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.first == value; });
    if (dup != rows.end()) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate value " + std::to_string(value));
    }
    rows.emplace_back(value, count);
  }
  if (rows.empty()) throw DataError("no data rows");
  return FreqTable::from_unsorted(std::move(rows));
}

FreqTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return read_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const std::string& name_or_path) {
  const auto& names = fixture_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    if (const char* dir = std::getenv("MLFD_FIXTURES_DIR"); dir != nullptr && *dir != '\0') {
      const std::filesystem::path candidate = std::filesystem::path(dir) / (name_or_path + ".csv");
      if (std::filesystem::exists(candidate)) {
        return Dataset{name_or_path, read_csv_file(candidate), Source::fixture};
      }
    }
    return Dataset{name_or_path, embedded_fixture(name_or_path), Source::fixture};
  }
  return Dataset{name_or_path, read_csv_file(name_or_path), Source::file};
}

}  // namespace mlfd::data
