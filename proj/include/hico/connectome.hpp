#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hico {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Seven canonical resting-state networks. The enumerator order is the block
/// order used by heterogeneous genomes.
enum class RsnLabel : int {
  Visual = 0,
  Somatomotor,
  DorsalAttention,
  VentralAttention,
  Limbic,
  Frontoparietal,
  DefaultMode,
};

inline constexpr int kNumRsn = 7;
inline constexpr std::array<RsnLabel, kNumRsn> kAllRsn = {
    RsnLabel::Visual,         RsnLabel::Somatomotor, RsnLabel::DorsalAttention,
    RsnLabel::VentralAttention, RsnLabel::Limbic,    RsnLabel::Frontoparietal,
    RsnLabel::DefaultMode};

std::string_view to_string(RsnLabel label);
/// Throws std::invalid_argument on anything but the seven exact names.
RsnLabel parse_rsn(std::string_view name);
inline int index_of(RsnLabel label) { return static_cast<int>(label); }

/// Thrown for malformed inputs (files, manifests, dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Parcellation {
 public:
  /// Validates label coverage; throws DataError.
  explicit Parcellation(std::vector<RsnLabel> rsn_of,
                        std::optional<std::vector<int>> gradient_rank = std::nullopt);

  [[nodiscard]] int n_regions() const { return static_cast<int>(rsn_of_.size()); }
  [[nodiscard]] RsnLabel rsn_of(int region) const { return rsn_of_.at(region); }
  [[nodiscard]] const std::vector<RsnLabel>& labels() const { return rsn_of_; }
  [[nodiscard]] const std::optional<std::vector<int>>& gradient_rank() const { return gradient_rank_; }
  [[nodiscard]] std::array<int, kNumRsn> label_counts() const;
  [[nodiscard]] std::vector<int> regions_of(RsnLabel label) const;

  /// Contiguous blocks: regions [r*k, (r+1)*k) carry label r.
  static Parcellation blocks(int regions_per_rsn);

 private:
  std::vector<RsnLabel> rsn_of_;
  std::optional<std::vector<int>> gradient_rank_;
};

struct StructuralConnectome {
  Matrix weights;  // SC_ij: coupling from region j onto region i
  Matrix delays;   // ms; all-zero by default

  StructuralConnectome() = default;
  explicit StructuralConnectome(Matrix w);
  StructuralConnectome(Matrix w, Matrix d);

  [[nodiscard]] int n_regions() const { return static_cast<int>(weights.rows()); }
  [[nodiscard]] bool has_delays() const;
  /// Throws DataError if any invariant is violated.
  void validate() const;
};

struct SubjectRecord {
  std::string id;
  StructuralConnectome sc;
  Matrix fc_empirical;
  std::map<std::string, double> behavior;

  void validate() const;
};

struct Cohort {
  Parcellation parcellation;
  std::vector<SubjectRecord> subjects;

  void validate() const;
  [[nodiscard]] const SubjectRecord& subject(std::string_view id) const;
};

/// `region_index,rsn_label` rows, 0-based contiguous indices.
Parcellation load_parcellation(const std::filesystem::path& path);
void save_parcellation(const std::filesystem::path& path, const Parcellation& parcellation);

/// N rows of N comma-separated reals; no header. Row-major, untransformed.
Matrix load_matrix(const std::filesystem::path& path, int n);
/// Writes with 17 significant digits so load_matrix round-trips exactly.
void save_matrix(const std::filesystem::path& path, const Matrix& m);

/// Cohort manifest JSON: {parcellation_path, subjects: [{id, sc_path, fc_path, behavior}]}.
/// Relative paths resolve against the manifest's directory.
Cohort load_cohort(const std::filesystem::path& manifest_path);

}  // namespace hico
