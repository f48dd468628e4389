#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "mlfd/inference.h"

namespace mlfd::data {

enum class Source { fixture, file };

struct Dataset {
  std::string name;
  inference::FreqTable table;
  Source source = Source::fixture;
};

/// Names of the embedded datasets: lundberg, taylor, skellam.
const std::vector<std::string>& fixture_names();

/// Embedded grouped counts: insurance claims (Lundberg), sickness absences (Taylor) and
/// secondary chromosome associations (Skellam).
inference::FreqTable embedded_fixture(std::string_view name);

/// Parses "value,count" rows. A non-numeric first line is taken as a header; blank lines are
/// skipped; duplicate values are rejected. DataError messages carry the 1-based line number.
inference::FreqTable read_csv(std::istream& in);
inference::FreqTable read_csv_file(const std::filesystem::path& path);

/// Resolves a fixture name or a CSV path. For fixture names, MLFD_FIXTURES_DIR (when set and
/// containing <name>.csv) overrides the embedded table.
Dataset load_dataset(const std::string& name_or_path);

}  // namespace mlfd::data
