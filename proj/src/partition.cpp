#include "lesiontrack/partition.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "lesiontrack/error.hpp"

namespace lesiontrack {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_flag(const std::string& v, const std::string& where) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "y") return true;
  if (s == "0" || s == "false" || s == "no" || s == "n") return false;
  fail(ErrorKind::Parse, where + ": cannot read annotated flag '" + v + "'");
}

// Uniform integer in [0, bound) by rejection; std distributions are not
// specified bit-exactly across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

// Splits `total` over groups proportionally to `sizes` (largest remainder,
// earlier groups first on ties).
std::vector<int> quotas(int total, const std::vector<int>& sizes) {
  const int n = std::accumulate(sizes.begin(), sizes.end(), 0);
  std::vector<int> q(sizes.size(), 0);
  if (n == 0) return q;
  std::vector<std::pair<long long, std::size_t>> rem;
  int used = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const long long num = static_cast<long long>(total) * sizes[g];
    q[g] = static_cast<int>(num / n);
    used += q[g];
    rem.emplace_back(-(num % n), g);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t k = 0; used < total && k < rem.size(); ++k, ++used) ++q[rem[k].second];
  return q;
}

const ScanRecord& primary_scan(const SubjectRecord& s) {
  for (const auto& scan : s.scans) {
    if (scan.annotated.value_or(true)) return scan;
  }
  return s.scans.front();
}

}  // namespace

std::vector<SubjectRecord> load_subject_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Schema, path.string() + ": empty metadata file");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name, bool required) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) fail(ErrorKind::Schema, path.string() + ": missing column '" + name + "'");
      return -1;
    }
    return static_cast<int>(it - header.begin());
  };
  const int c_subject = column("subject_id", true);
  const int c_sex = column("sex", true);
  const int c_scan = column("scan_id", true);
  const int c_annotated = column("annotated", false);

  std::vector<SubjectRecord> out;
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const int needed = std::max({c_subject, c_sex, c_scan, c_annotated});
    if (static_cast<int>(cells.size()) <= needed) fail(ErrorKind::Parse, where + ": too few columns");
    const std::string& id = cells[c_subject];
    if (id.empty()) fail(ErrorKind::Parse, where + ": empty subject id");
    auto [it, fresh] = index.emplace(id, out.size());
    if (fresh) out.push_back({id, cells[c_sex], {}});
    SubjectRecord& s = out[it->second];
    if (s.sex != cells[c_sex]) fail(ErrorKind::Schema, where + ": subject '" + id + "' listed with two sexes");
    ScanRecord scan{cells[c_scan], std::nullopt};
    if (c_annotated >= 0 && !cells[c_annotated].empty()) scan.annotated = parse_flag(cells[c_annotated], where);
    s.scans.push_back(std::move(scan));
  }
  return out;
}

Partition partition_subjects(const std::vector<SubjectRecord>& subjects, const PartitionConfig& config) {
  if (config.train < 0 || config.validation < 0 || config.test < 0 || config.longitudinal < 0) {
    fail(ErrorKind::InvalidConfig, "partition sizes must be non-negative");
  }
  if (config.longitudinal > config.test) {
    fail(ErrorKind::InvalidConfig, "longitudinal split cannot exceed the static test split");
  }
  const int wanted = config.train + config.validation + config.test;
  if (static_cast<int>(subjects.size()) < wanted) {
    fail(ErrorKind::InsufficientSubjects, "need " + std::to_string(wanted) + " subjects, metadata has " +
                                              std::to_string(subjects.size()));
  }

  std::map<std::string, std::vector<const SubjectRecord*>> by_sex;
  for (const auto& s : subjects) {
    if (s.scans.empty()) fail(ErrorKind::Schema, "subject '" + s.subject_id + "' has no scans");
    by_sex[s.sex].push_back(&s);
  }
  std::mt19937_64 rng(config.seed);
  std::vector<std::vector<const SubjectRecord*>> groups;
  std::vector<int> sizes;
  for (auto& [sex, members] : by_sex) {
    std::sort(members.begin(), members.end(),
              [](const SubjectRecord* a, const SubjectRecord* b) { return a->subject_id < b->subject_id; });
    shuffle(members, rng);
    groups.push_back(members);
    sizes.push_back(static_cast<int>(members.size()));
  }

  Partition p;
  p.config = config;
  std::vector<std::size_t> cursor(groups.size(), 0);
  std::vector<std::vector<const SubjectRecord*>> test_by_group(groups.size());
  auto take = [&](int count, Split& split, bool is_test) {
    const auto q = quotas(count, sizes);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (cursor[g] + q[g] > groups[g].size()) {
        fail(ErrorKind::InsufficientSubjects, "not enough subjects to stratify by sex");
      }
      for (int k = 0; k < q[g]; ++k) {
        const SubjectRecord* s = groups[g][cursor[g]++];
        split.subjects.push_back(s->subject_id);
        if (is_test) test_by_group[g].push_back(s);
      }
    }
    std::sort(split.subjects.begin(), split.subjects.end());
  };
  take(config.train, p.train, false);
  take(config.validation, p.validation, false);
  take(config.test, p.test, true);

  std::map<std::string, const SubjectRecord*> lookup;
  for (const auto& s : subjects) lookup[s.subject_id] = &s;
  for (const auto& id : p.train.subjects) {
    const auto& s = *lookup[id];
    bool any = false;
    for (const auto& scan : s.scans) {
      if (scan.annotated.value_or(false)) {
        p.train.meshes.push_back(scan.scan_id);
        any = true;
      }
    }
    if (!any) p.train.meshes.push_back(s.scans.front().scan_id);
  }
  for (const auto& id : p.validation.subjects) p.validation.meshes.push_back(primary_scan(*lookup[id]).scan_id);
  for (const auto& id : p.test.subjects) p.test.meshes.push_back(primary_scan(*lookup[id]).scan_id);

  std::vector<std::vector<const SubjectRecord*>> eligible(groups.size());
  std::vector<int> eligible_sizes;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto* s : test_by_group[g]) {
      if (s->scans.size() >= 2) eligible[g].push_back(s);
    }
    shuffle(eligible[g], rng);
    eligible_sizes.push_back(static_cast<int>(test_by_group[g].size()));
  }
  const auto lq = quotas(config.longitudinal, eligible_sizes);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (lq[g] > static_cast<int>(eligible[g].size())) {
      fail(ErrorKind::InsufficientSubjects, "not enough static-test subjects with a second scan");
    }
    for (int k = 0; k < lq[g]; ++k) p.longitudinal.subjects.push_back(eligible[g][k]->subject_id);
  }
  std::sort(p.longitudinal.subjects.begin(), p.longitudinal.subjects.end());
  for (const auto& id : p.longitudinal.subjects) {
    const auto& s = *lookup[id];
    const auto& fixed = primary_scan(s).scan_id;
    const auto other = std::find_if(s.scans.begin(), s.scans.end(),
                                    [&](const ScanRecord& r) { return r.scan_id != fixed; });
    p.longitudinal.meshes.push_back(other->scan_id);
  }
  return p;
}

nlohmann::json to_json(const Partition& p) {
  auto split = [](const Split& s) {
    return nlohmann::json{{"subjects", s.subjects},
                          {"meshes", s.meshes},
                          {"num_subjects", s.subjects.size()},
                          {"num_meshes", s.meshes.size()}};
  };
  return {{"seed", p.config.seed},
          {"train", split(p.train)},
          {"validation", split(p.validation)},
          {"test", split(p.test)},
          {"longitudinal", split(p.longitudinal)}};
}

}  // namespace lesiontrack
