#include "bscca/cli/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "bscca/error.hpp"

namespace bscca::cli {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw Error(ErrorKind::kIo, "not a number: '" + text + "'");
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void write_rows(std::ostream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << row[i];
  }
  os << '\n';
}

}  // namespace

void write_table(const fs::path& path, const Table& table) {
  for (const auto& row : table.rows)
    if (row.size() != table.header.size())
      throw Error(ErrorKind::kIo, path.string() + ": row width differs from header");
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    write_rows(os, table.header);
    for (const auto& row : table.rows) write_rows(os, row);
    if (!os) throw Error(ErrorKind::kIo, "write failed: " + path.string());
  }
  Table back = read_table(path);
  if (back.header != table.header || back.rows.size() != table.rows.size())
    throw Error(ErrorKind::kIo, path.string() + ": re-read does not match what was written");
}

Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kIo, path.string() + ": empty file");
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw Error(ErrorKind::kIo, path.string() + ": ragged row " + std::to_string(t.rows.size() + 1));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void write_matrix(const fs::path& path, const Matrix& m) {
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (j) os << ',';
        os << format_double(m(i, j));
      }
      os << '\n';
    }
  }
  Matrix back = read_matrix(path);
  if (back.rows() != m.rows() || back.cols() != m.cols())
    throw Error(ErrorKind::kIo, path.string() + ": re-read shape mismatch");
}

Matrix read_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    for (const auto& c : split_line(line)) r.push_back(parse_double(c));
    if (!rows.empty() && r.size() != rows.front().size())
      throw Error(ErrorKind::kIo, path.string() + ": ragged row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorKind::kEmptyInput, path.string() + ": no rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& doc) {
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    os << doc.dump(2) << '\n';
  }
  if (read_json(path) != doc)
    throw Error(ErrorKind::kIo, path.string() + ": re-read does not match what was written");
}

nlohmann::ordered_json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  }
}

Table states_table(const std::vector<Index>& iters, const std::vector<ChainState>& states) {
  Table t;
  const Index p = states.empty() ? 0 : states.front().p();
  t.header = {"iter", "k"};
  for (Index j = 1; j <= p; ++j) t.header.push_back("delta_" + std::to_string(j));
  for (Index j = 1; j <= p; ++j) t.header.push_back("theta_" + std::to_string(j));
  for (std::size_t r = 0; r < states.size(); ++r) {
    const auto& s = states[r];
    std::vector<std::string> row;
    row.reserve(2 + 2 * p);
    row.push_back(std::to_string(iters[r]));
    row.push_back(std::to_string(s.level + 1));
    for (Index j = 0; j < p; ++j) row.push_back(s.delta[j] ? "1" : "0");
    for (Index j = 0; j < p; ++j) row.push_back(format_double(s.theta[j]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void parse_states_table(const Table& table, std::vector<Index>& iters,
                        std::vector<ChainState>& states) {
  const auto w = static_cast<Index>(table.header.size());
  if (w < 4 || (w - 2) % 2 != 0 || table.header[0] != "iter" || table.header[1] != "k")
    throw Error(ErrorKind::kIo, "states table has an unexpected header");
  const Index p = (w - 2) / 2;
  iters.clear();
  states.clear();
  for (const auto& row : table.rows) {
    ChainState s;
    iters.push_back(static_cast<Index>(std::stoll(row[0])));
    s.level = std::stoi(row[1]) - 1;
    s.delta.resize(p);
    s.theta.resize(p);
    for (Index j = 0; j < p; ++j) {
      const auto& d = row[2 + j];
      if (d != "0" && d != "1") throw Error(ErrorKind::kIo, "delta entries must be 0 or 1");
      s.delta[j] = d == "1";
      s.theta[j] = parse_double(row[2 + p + j]);
    }
    states.push_back(std::move(s));
  }
}

OutputStage::OutputStage(fs::path out_dir) : out_(std::move(out_dir)) {
  auto parent = out_.has_parent_path() ? out_.parent_path() : fs::path(".");
  fs::create_directories(parent);
  staging_ = parent / ("." + out_.filename().string() + ".staging-" + std::to_string(::getpid()));
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

OutputStage::~OutputStage() {
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

fs::path OutputStage::path(const std::string& name) {
  files_.push_back(name);
  return staging_ / name;
}

void OutputStage::commit() {
  if (committed_) return;
  fs::create_directories(out_);
  for (const auto& name : files_) {
    auto from = staging_ / name;
    if (!fs::exists(from)) continue;
    fs::rename(from, out_ / name);
  }
  committed_ = true;
}

}  // namespace bscca::cli
