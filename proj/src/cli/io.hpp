#pragma once

#include "hico/genome.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hico::cli {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file. Creates parent directories.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);

/// JSON array of integers in {0..999}, length 20 or 140.
Genome read_genome(const std::filesystem::path& path);
nlohmann::json genome_json(const Genome& g);

/// Comma-separated rows with a header line; no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] int column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table);

}  // namespace hico::cli
