#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lesiontrack {

struct ScanRecord {
  std::string scan_id;
  /// Annotation flag from the metadata, when the column exists.
  std::optional<bool> annotated;
};

struct SubjectRecord {
  std::string subject_id;
  std::string sex;
  std::vector<ScanRecord> scans;  ///< in file order
};

/// CSV with a header naming `subject_id`, `sex`, `scan_id` and optionally
/// `annotated` (0/1/true/false). One row per scan.
std::vector<SubjectRecord> load_subject_metadata(const std::filesystem::path& path);

struct PartitionConfig {
  int train = 120;
  int validation = 40;
  int test = 40;
  /// Subjects drawn from the static test split whose other scan forms the
  /// longitudinal split.
  int longitudinal = 10;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::string> subjects;
  std::vector<std::string> meshes;
};

struct Partition {
  PartitionConfig config;
  Split train, validation, test, longitudinal;
};

/// Sex-stratified random split. Per-sex quotas follow the sex proportions
/// (largest remainder). Training keeps every scan flagged annotated (the first
/// scan when none is flagged); validation and static test keep the first
/// flagged-or-unflagged scan not marked unannotated; longitudinal keeps the
/// subject's other scan. Deterministic for a given seed on every platform.
Partition partition_subjects(const std::vector<SubjectRecord>& subjects, const PartitionConfig& config);

nlohmann::json to_json(const Partition& p);

}  // namespace lesiontrack
