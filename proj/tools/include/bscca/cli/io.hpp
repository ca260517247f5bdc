#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bscca/covariance.hpp"
#include "bscca/model.hpp"

namespace bscca::cli {

namespace fs = std::filesystem;

/// Shortest decimal text that round-trips the double ('.' decimal, no locale).
std::string format_double(double value);
double parse_double(const std::string& text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Writes a comma-separated table, then reads it back and checks that the
/// header, row count and every row width match. Throws kIo otherwise.
void write_table(const fs::path& path, const Table& table);
Table read_table(const fs::path& path);

/// Headerless numeric CSV; rows are samples.
void write_matrix(const fs::path& path, const Matrix& m);
Matrix read_matrix(const fs::path& path);

/// Pretty JSON with the object's key order; re-parsed after writing.
void write_json(const fs::path& path, const nlohmann::ordered_json& doc);
nlohmann::ordered_json read_json(const fs::path& path);

/// Full state dump: iter, k, delta_1..p, theta_1..p.
Table states_table(const std::vector<Index>& iters, const std::vector<ChainState>& states);
void parse_states_table(const Table& table, std::vector<Index>& iters,
                        std::vector<ChainState>& states);

/// Collects the files of one command in a sibling staging directory and
/// moves them into the output directory only on commit(). Without commit the
/// staging directory is removed, so failed runs leave nothing behind.
class OutputStage {
 public:
  explicit OutputStage(fs::path out_dir);
  ~OutputStage();
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;

  fs::path path(const std::string& name);
  void commit();
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path out_;
  fs::path staging_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

}  // namespace bscca::cli
