#include "cli/io.hpp"

#include "hico/connectome.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace hico::cli {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out.flush()) throw DataError("write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot write " + path.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text_atomic(path, doc.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Genome read_genome(const fs::path& path) {
  const auto doc = read_json(path);
  if (!doc.is_array()) throw DataError(path.string() + ": genome must be a JSON array");
  Genome g;
  for (const auto& v : doc) {
    if (!v.is_number_integer()) throw DataError(path.string() + ": genes must be integers");
    const int gene = v.get<int>();
    if (gene < 0 || gene >= kGeneLevels) throw DataError(path.string() + ": gene out of range");
    g.genes.push_back(gene);
  }
  if (g.size() != kHomogeneousLength && g.size() != kHeterogeneousLength) {
    throw DataError(path.string() + ": genome must have 20 or 140 genes");
  }
  return g;
}

nlohmann::json genome_json(const Genome& g) { return nlohmann::json(g.genes); }

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw DataError("CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty CSV");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) throw DataError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto append = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append(table.header);
  for (const auto& r : table.rows) append(r);
  return out;
}

}  // namespace hico::cli
