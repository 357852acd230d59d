#include "hico/connectome.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hico {

namespace {

constexpr std::array<std::string_view, kNumRsn> kRsnNames = {
    "Visual", "Somatomotor", "DorsalAttention", "VentralAttention",
    "Limbic", "Frontoparietal", "DefaultMode"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line + 1);
}

}  // namespace

std::string_view to_string(RsnLabel label) { return kRsnNames.at(index_of(label)); }

RsnLabel parse_rsn(std::string_view name) {
  for (int r = 0; r < kNumRsn; ++r) {
    if (kRsnNames[r] == name) return static_cast<RsnLabel>(r);
  }
  throw std::invalid_argument("unknown RSN label: '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

Parcellation::Parcellation(std::vector<RsnLabel> rsn_of, std::optional<std::vector<int>> gradient_rank)
    : rsn_of_(std::move(rsn_of)), gradient_rank_(std::move(gradient_rank)) {
  if (rsn_of_.empty()) throw DataError("parcellation has no regions");
  const auto counts = label_counts();
  for (int r = 0; r < kNumRsn; ++r) {
    if (counts[r] == 0) {
      throw DataError("incomplete label coverage: network " + std::string(kRsnNames[r]) +
                      " has no regions");
    }
  }
  if (gradient_rank_ && gradient_rank_->size() != rsn_of_.size()) {
    throw DataError("gradient_rank length does not match n_regions");
  }
}

std::array<int, kNumRsn> Parcellation::label_counts() const {
  std::array<int, kNumRsn> counts{};
  for (auto label : rsn_of_) ++counts[index_of(label)];
  return counts;
}

std::vector<int> Parcellation::regions_of(RsnLabel label) const {
  std::vector<int> out;
  for (int i = 0; i < n_regions(); ++i) {
    if (rsn_of_[i] == label) out.push_back(i);
  }
  return out;
}

Parcellation Parcellation::blocks(int regions_per_rsn) {
  if (regions_per_rsn < 1) throw std::invalid_argument("regions_per_rsn must be >= 1");
  std::vector<RsnLabel> labels;
  labels.reserve(static_cast<std::size_t>(kNumRsn * regions_per_rsn));
  for (auto label : kAllRsn) labels.insert(labels.end(), regions_per_rsn, label);
  return Parcellation(std::move(labels));
}

// ---------------------------------------------------------------------------

StructuralConnectome::StructuralConnectome(Matrix w)
    : weights(std::move(w)), delays(Matrix::Zero(weights.rows(), weights.cols())) {
  validate();
}

StructuralConnectome::StructuralConnectome(Matrix w, Matrix d) : weights(std::move(w)), delays(std::move(d)) {
  validate();
}

bool StructuralConnectome::has_delays() const { return (delays.array() != 0.0).any(); }

void StructuralConnectome::validate() const {
  if (weights.rows() != weights.cols() || weights.rows() == 0) throw DataError("SC must be square and non-empty");
  if (delays.rows() != weights.rows() || delays.cols() != weights.cols()) {
    throw DataError("delay matrix shape does not match SC");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw DataError("SC weights must be finite and non-negative");
  }
  if ((weights.diagonal().array() != 0.0).any()) throw DataError("SC diagonal must be zero");
  if (!delays.allFinite() || (delays.array() < 0.0).any()) {
    throw DataError("delays must be finite and non-negative");
  }
}

void SubjectRecord::validate() const {
  sc.validate();
  const auto n = sc.n_regions();
  if (fc_empirical.rows() != n || fc_empirical.cols() != n) {
    throw DataError("subject " + id + ": FC shape does not match SC");
  }
  for (int i = 0; i < n; ++i) {
    if (fc_empirical(i, i) != 1.0) throw DataError("subject " + id + ": FC diagonal must be 1");
    for (int j = 0; j < n; ++j) {
      const double v = fc_empirical(i, j);
      if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
        throw DataError("subject " + id + ": FC entries must lie in [-1, 1]");
      }
      if (std::abs(v - fc_empirical(j, i)) > 1e-9) throw DataError("subject " + id + ": FC not symmetric");
    }
  }
}

void Cohort::validate() const {
  for (const auto& s : subjects) {
    if (s.sc.n_regions() != parcellation.n_regions()) {
      throw DataError("subject " + s.id + " has " + std::to_string(s.sc.n_regions()) +
                      " regions; parcellation has " + std::to_string(parcellation.n_regions()));
    }
    s.validate();
  }
}

const SubjectRecord& Cohort::subject(std::string_view id) const {
  for (const auto& s : subjects) {
    if (s.id == id) return s;
  }
  throw DataError("no subject with id " + std::string(id));
}

// ---------------------------------------------------------------------------

Parcellation load_parcellation(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<RsnLabel> labels(lines.size());
  std::vector<bool> seen(lines.size(), false);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto cells = split(lines[k], ',');
    if (cells.size() != 2) throw DataError(where(path, k) + ": expected 'region_index,rsn_label'");
    long index = -1;
    const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), index);
    if (ec != std::errc() || ptr != cells[0].data() + cells[0].size()) {
      throw DataError(where(path, k) + ": non-integer region index");
    }
    if (index < 0 || static_cast<std::size_t>(index) >= lines.size() || seen[index]) {
      throw DataError(where(path, k) + ": region indices must be 0-based, contiguous and unique");
    }
    seen[index] = true;
    try {
      labels[index] = parse_rsn(cells[1]);
    } catch (const std::invalid_argument& e) {
      throw DataError(where(path, k) + ": " + e.what());
    }
  }
  return Parcellation(std::move(labels));
}

void save_parcellation(const std::filesystem::path& path, const Parcellation& parcellation) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  for (int i = 0; i < parcellation.n_regions(); ++i) {
    out << i << ',' << to_string(parcellation.rsn_of(i)) << '\n';
  }
}

Matrix load_matrix(const std::filesystem::path& path, int n) {
  const auto lines = read_lines(path);
  if (static_cast<int>(lines.size()) != n) {
    throw DataError(path.string() + ": dimension mismatch: expected " + std::to_string(n) + " rows, found " +
                    std::to_string(lines.size()));
  }
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto cells = split(lines[i], ',');
    if (static_cast<int>(cells.size()) != n) {
      throw DataError(where(path, i) + ": dimension mismatch: expected " + std::to_string(n) + " columns, found " +
                      std::to_string(cells.size()));
    }
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      const auto cell = cells[j];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw DataError(where(path, i) + ": non-numeric cell '" + std::string(cell) + "'");
      }
      if (!std::isfinite(v)) throw DataError(where(path, i) + ": non-finite value '" + std::string(cell) + "'");
      m(i, j) = v;
    }
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::string text;
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) text += ',';
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      text += buf;
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << text;
}

Cohort load_cohort(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest: " + manifest_path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  try {
    auto parcellation = load_parcellation(resolve(doc.at("parcellation_path").get<std::string>()));
    const int n = parcellation.n_regions();
    std::vector<SubjectRecord> subjects;
    for (const auto& entry : doc.at("subjects")) {
      SubjectRecord s;
      s.id = entry.at("id").get<std::string>();
      s.sc = StructuralConnectome(load_matrix(resolve(entry.at("sc_path").get<std::string>()), n));
      s.fc_empirical = load_matrix(resolve(entry.at("fc_path").get<std::string>()), n);
      if (entry.contains("behavior")) {
        for (const auto& [name, value] : entry.at("behavior").items()) s.behavior[name] = value.get<double>();
      }
      subjects.push_back(std::move(s));
    }
    Cohort cohort{std::move(parcellation), std::move(subjects)};
    cohort.validate();
    return cohort;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + manifest_path.string() + ": " + e.what());
  }
}

}  // namespace hico
