#include "scenarios/dataset.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "plant/trajectory.hpp"
#include "scenarios/features.hpp"

namespace n2olab::scenarios {

int TabularDataset::feature_index(const std::string& token) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i)
    if (feature_names[i] == token) return static_cast<int>(i);
  return -1;
}

void TabularDataset::validate() const {
  const auto n = static_cast<Eigen::Index>(time.size());
  if (X.rows() != n || y.size() != n || X.cols() != static_cast<Eigen::Index>(feature_names.size()))
    fail(ErrorKind::Structural, "dataset " + id + ": shape mismatch between time, features and target");
  for (std::size_t i = 1; i < time.size(); ++i)
    if (!(time[i] > time[i - 1]))
      fail(ErrorKind::Data, "dataset " + id + ": time not strictly increasing at row " + std::to_string(i));
  if (!X.allFinite() || !y.allFinite()) fail(ErrorKind::Data, "dataset " + id + ": missing or non-finite values");
}

TabularDataset TabularDataset::decimate(std::size_t step, std::size_t phase) const {
  if (step == 0) fail(ErrorKind::Parameter, "decimate: step must be >= 1");
  TabularDataset d;
  d.id = id;
  d.feature_names = feature_names;
  d.target_name = target_name;
  d.meta = meta;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = phase; i < time.size(); i += step) keep.push_back(static_cast<Eigen::Index>(i));
  d.X.resize(static_cast<Eigen::Index>(keep.size()), X.cols());
  d.y.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    d.time.push_back(time[keep[r]]);
    d.X.row(r) = X.row(keep[r]);
    d.y[r] = y[keep[r]];
  }
  return d;
}

TabularDataset TabularDataset::select(const std::vector<std::string>& tokens) const {
  TabularDataset d;
  d.id = id;
  d.time = time;
  d.target_name = target_name;
  d.y = y;
  d.meta = meta;
  d.feature_names = tokens;
  d.X.resize(X.rows(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const int k = feature_index(tokens[j]);
    if (k < 0) fail(ErrorKind::Schema, "dataset " + id + ": no feature column '" + tokens[j] + "'");
    d.X.col(static_cast<Eigen::Index>(j)) = X.col(k);
  }
  return d;
}

void TabularDataset::write_csv(const std::string& path) const {
  validate();
  std::string out;
  out.reserve(rows() * (features() + 2) * 14 + 256);
  out += "time@plant[d]";
  for (const auto& f : feature_names) out += "," + f;
  out += "," + target_name + "\n";
  for (std::size_t i = 0; i < rows(); ++i) {
    out += plant::format_double(time[i]);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      out += ',';
      out += plant::format_double(X(static_cast<Eigen::Index>(i), j));
    }
    out += ',';
    out += plant::format_double(y[static_cast<Eigen::Index>(i)]);
    out += '\n';
  }
  write_text_file(path, out);
}

namespace {

double parse_number(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(ErrorKind::Io, where + ": not a number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = line.find(',', start);
    if (p == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, p - start));
    start = p + 1;
  }
}

}  // namespace

TabularDataset TabularDataset::read_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Io, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 3) fail(ErrorKind::Schema, path + ": need a time column, at least one feature and a target");
  for (const auto& h : header) parse_token(h);
  if (parse_token(header.front()).name != "time")
    fail(ErrorKind::Schema, path + ": first column must be time@<location>[<unit>]");

  TabularDataset d;
  d.id = std::filesystem::path(path).stem().string();
  for (std::size_t j = 1; j + 1 < header.size(); ++j) d.feature_names.emplace_back(header[j]);
  d.target_name = std::string(header.back());
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (cells.size() != header.size())
      fail(ErrorKind::Schema, where + ": expected " + std::to_string(header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    d.time.push_back(parse_number(cells[0], where));
    for (std::size_t j = 1; j < cells.size(); ++j) values.push_back(parse_number(cells[j], where));
  }
  const auto n = static_cast<Eigen::Index>(d.time.size());
  const auto p = static_cast<Eigen::Index>(d.feature_names.size());
  d.X.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.X(i, j) = values[i * (p + 1) + j];
    d.y[i] = values[i * (p + 1) + p];
  }
  d.validate();
  return d;
}

}  // namespace n2olab::scenarios
