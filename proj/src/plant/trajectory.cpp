#include "plant/trajectory.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace n2olab::plant {

namespace {

constexpr char kMagic[8] = {'N', '2', 'O', 'T', 'R', 'J', '1', '\0'};

void put_u64(std::ostream& o, std::uint64_t v) { o.write(reinterpret_cast<const char*>(&v), sizeof v); }
std::uint64_t get_u64(std::istream& i) {
  std::uint64_t v = 0;
  i.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
void put_str(std::ostream& o, const std::string& s) {
  put_u64(o, s.size());
  o.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string get_str(std::istream& i) {
  const auto n = get_u64(i);
  if (n > (1ull << 32)) fail(ErrorKind::Io, "trajectory cache: corrupt string length");
  std::string s(n, '\0');
  i.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

int Trajectory::column(const std::string& name) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].name == name) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& Trajectory::series(const std::string& name) const {
  const int c = column(name);
  if (c < 0) fail(ErrorKind::Schema, "trajectory has no channel '" + name + "'");
  return columns[c];
}

void Trajectory::add_column(const std::string& name, const std::string& unit, std::vector<double> values) {
  if (values.size() != time.size()) fail(ErrorKind::Structural, "add_column: length mismatch for " + name);
  if (has(name)) fail(ErrorKind::Structural, "add_column: duplicate channel " + name);
  channels.push_back({name, unit});
  columns.push_back(std::move(values));
}

void Trajectory::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  std::string line = "time";
  for (const auto& c : channels) line += "," + c.name;
  out << line << '\n';
  line = "d";
  for (const auto& c : channels) line += "," + c.unit;
  out << line << '\n';
  char buf[64];
  for (std::size_t r = 0; r < rows(); ++r) {
    line.clear();
    auto w = [&](double v) {
      auto res = std::to_chars(buf, buf + sizeof buf, v);
      line.append(buf, res.ptr);
    };
    w(time[r]);
    for (const auto& col : columns) {
      line.push_back(',');
      w(col[r]);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void Trajectory::save_binary(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary);
    if (!o) fail(ErrorKind::Io, "cannot write " + tmp);
    o.write(kMagic, sizeof kMagic);
    put_u64(o, rows());
    put_u64(o, channels.size());
    for (const auto& c : channels) {
      put_str(o, c.name);
      put_str(o, c.unit);
    }
    put_str(o, meta.dump());
    o.write(reinterpret_cast<const char*>(time.data()), static_cast<std::streamsize>(rows() * sizeof(double)));
    for (const auto& col : columns)
      o.write(reinterpret_cast<const char*>(col.data()), static_cast<std::streamsize>(rows() * sizeof(double)));
    if (!o) fail(ErrorKind::Io, "write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorKind::Io, "cannot move cache file into " + path);
}

Trajectory Trajectory::load_binary(const std::string& path) {
  std::ifstream i(path, std::ios::binary);
  if (!i) fail(ErrorKind::Io, "cannot open " + path);
  char magic[8];
  i.read(magic, sizeof magic);
  if (!i || std::memcmp(magic, kMagic, sizeof magic) != 0) fail(ErrorKind::Io, path + ": not a trajectory cache");
  Trajectory t;
  const auto n = get_u64(i);
  const auto m = get_u64(i);
  if (n > (1ull << 28) || m > (1ull << 20)) fail(ErrorKind::Io, path + ": corrupt header");
  t.channels.resize(m);
  for (auto& c : t.channels) {
    c.name = get_str(i);
    c.unit = get_str(i);
  }
  try {
    t.meta = json::parse(get_str(i));
  } catch (const json::exception&) {
    fail(ErrorKind::Io, path + ": corrupt metadata");
  }
  t.time.resize(n);
  i.read(reinterpret_cast<char*>(t.time.data()), static_cast<std::streamsize>(n * sizeof(double)));
  t.columns.assign(m, std::vector<double>(n));
  for (auto& col : t.columns) i.read(reinterpret_cast<char*>(col.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!i) fail(ErrorKind::Io, path + ": truncated");
  return t;
}

}  // namespace n2olab::plant
