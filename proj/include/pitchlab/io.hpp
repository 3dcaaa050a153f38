#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pitchlab/common.hpp"

namespace pitchlab {

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

// Run configuration: flat key = value text file, '#' starts a comment.
// Unknown keys are rejected so typos surface as validation errors.
// The config hash is taken over the canonical form (sorted keys, effective
// values after CLI overrides) and is embedded in every output file.
struct RunConfig {
  std::uint64_t seed = 17;
  std::string data_dir = "data";
  std::string out_dir = "out";
  double pitch_length_m = 110.0;
  double pitch_width_m = 65.0;
  double cooling_gap_s = 90.0;
  double alpha = 0.10;
  int goal_cap = 4;
  int roles_k = 8;
  double kde_bandwidth_m = 4.0;
  int grid_nx = 110;
  int grid_ny = 65;
  double test_fraction = 0.20;
  int cv_folds = 5;
  int repeats = 50;
  int n_permutations = 2000;
  int background_n = 20;
  double significance = 0.05;

  static RunConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  std::string canonical_text() const;
  std::string hash() const { return hex64(fnv1a64(canonical_text())); }
};

// Deterministic float formatting for delimited exports.
std::string fmt_num(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash,
            const std::vector<std::string>& header);
  ~CsvWriter();
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  struct Impl;
  Impl* impl_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  // -1 when absent
};

// Reads a delimited file written by CsvWriter; '#' lines are skipped.
CsvTable read_csv(const std::string& path);

std::vector<std::string> read_lines(const std::string& path);
void write_text(const std::string& path, const std::string& text);
bool file_exists(const std::string& path);

// Exclusive lock on an output directory; throws ValidationError when a
// lock is already held. Released on destruction.
class DirLock {
 public:
  explicit DirLock(const std::string& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
  bool held_ = false;
};

}  // namespace pitchlab
