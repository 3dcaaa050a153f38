#include "pitchlab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace pitchlab {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw ValidationError("config key '" + key + "': not an integer: '" + v + "'");
  }
  return i;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  RunConfig cfg;
  if (!file_exists(path)) {
    throw MissingInputError("config file not found: " + path);
  }
  int line_no = 0;
  for (const std::string& raw : read_lines(path)) {
    ++line_no;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") {
    seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "data_dir") {
    data_dir = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "pitch_length_m") {
    pitch_length_m = to_double(key, value);
  } else if (key == "pitch_width_m") {
    pitch_width_m = to_double(key, value);
  } else if (key == "cooling_gap_s") {
    cooling_gap_s = to_double(key, value);
  } else if (key == "alpha") {
    alpha = to_double(key, value);
  } else if (key == "goal_cap") {
    goal_cap = to_int(key, value);
  } else if (key == "roles_k") {
    roles_k = to_int(key, value);
  } else if (key == "kde_bandwidth_m") {
    kde_bandwidth_m = to_double(key, value);
  } else if (key == "grid_nx") {
    grid_nx = to_int(key, value);
  } else if (key == "grid_ny") {
    grid_ny = to_int(key, value);
  } else if (key == "test_fraction") {
    test_fraction = to_double(key, value);
  } else if (key == "cv_folds") {
    cv_folds = to_int(key, value);
  } else if (key == "repeats") {
    repeats = to_int(key, value);
  } else if (key == "n_permutations") {
    n_permutations = to_int(key, value);
  } else if (key == "background_n") {
    background_n = to_int(key, value);
  } else if (key == "significance") {
    significance = to_double(key, value);
  } else {
    throw ValidationError("unknown config key: '" + key + "'");
  }
}

std::string RunConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(seed);
  kv["data_dir"] = data_dir;
  kv["out_dir"] = out_dir;
  kv["pitch_length_m"] = fmt_num(pitch_length_m);
  kv["pitch_width_m"] = fmt_num(pitch_width_m);
  kv["cooling_gap_s"] = fmt_num(cooling_gap_s);
  kv["alpha"] = fmt_num(alpha);
  kv["goal_cap"] = std::to_string(goal_cap);
  kv["roles_k"] = std::to_string(roles_k);
  kv["kde_bandwidth_m"] = fmt_num(kde_bandwidth_m);
  kv["grid_nx"] = std::to_string(grid_nx);
  kv["grid_ny"] = std::to_string(grid_ny);
  kv["test_fraction"] = fmt_num(test_fraction);
  kv["cv_folds"] = std::to_string(cv_folds);
  kv["repeats"] = std::to_string(repeats);
  kv["n_permutations"] = std::to_string(n_permutations);
  kv["background_n"] = std::to_string(background_n);
  kv["significance"] = fmt_num(significance);
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += "=";
    out += v;
    out += "\n";
  }
  return out;
}

std::string fmt_num(double v) {
  if (v == static_cast<long long>(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path, const std::string& config_hash,
                     const std::vector<std::string>& header)
    : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out) {
    throw ValidationError("cannot open for writing: " + path);
  }
  impl_->out << "# config_hash=" << config_hash << "\n";
  row(header);
}

CsvWriter::~CsvWriter() {
  close();
  delete impl_;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ",";
    impl_->out << cells[i];
  }
  impl_->out << "\n";
}

void CsvWriter::close() {
  if (impl_->out.is_open()) impl_->out.close();
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  CsvTable t;
  bool have_header = false;
  for (const std::string& line : read_lines(path)) {
    if (!line.empty() && line[0] == '#') continue;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    cells.push_back(cur);
    if (!have_header) {
      t.header = cells;
      have_header = true;
    } else {
      t.rows.push_back(cells);
    }
  }
  return t;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot read: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << text;
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return fs::exists(path, ec);
}

DirLock::DirLock(const std::string& dir) {
  fs::create_directories(dir);
  path_ = (fs::path(dir) / ".lock").string();
  if (fs::exists(path_)) {
    throw ValidationError("output directory is locked by another run: " + dir);
  }
  std::ofstream out(path_);
  out << "locked\n";
  held_ = true;
}

DirLock::~DirLock() {
  if (held_) {
    std::error_code ec;
    fs::remove(path_, ec);
  }
}

}  // namespace pitchlab
