#pragma once

#include <string>
#include <vector>

#include "common/json_util.hpp"
#include "plant/model.hpp"

namespace n2olab::plant {

// Column store of the recorded plant signals on a uniform time grid.
class Trajectory {
 public:
  std::vector<double> time;  // d since start of the recorded window
  std::vector<ChannelInfo> channels;
  std::vector<std::vector<double>> columns;
  json meta = json::object();

  std::size_t rows() const { return time.size(); }
  int column(const std::string& name) const;  // -1 when absent
  // Throws Error(Schema) when the channel does not exist.
  const std::vector<double>& series(const std::string& name) const;
  bool has(const std::string& name) const { return column(name) >= 0; }

  void add_column(const std::string& name, const std::string& unit, std::vector<double> values);

  void write_csv(const std::string& path) const;
  void save_binary(const std::string& path) const;
  static Trajectory load_binary(const std::string& path);
};

// Formats a double with the shortest representation that round-trips.
std::string format_double(double v);

}  // namespace n2olab::plant
