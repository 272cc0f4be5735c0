#include "dw/io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace dw {

using nlohmann::json;

void save_grid(const std::string& path, const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open grid file for writing: " + path);
  json header = {{"d", f.spec().d}, {"J", f.spec().depth}, {"nonneg", f.nonneg()}};
  os << header.dump() << "\n";
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!os) throw std::runtime_error("short write on grid file: " + path);
}

GridFunction load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open grid file: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("grid file missing header: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("d") || !header.contains("J"))
    throw std::runtime_error("malformed grid file header: " + path);
  GridSpec g = make_spec(header.at("d").get<int>(), header.at("J").get<int>());
  std::vector<double> values(static_cast<std::size_t>(g.total_cells()));
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (is.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
    throw std::runtime_error("grid file truncated: " + path);
  GridFunction f(g, std::move(values));
  if (header.value("nonneg", false) && !f.nonneg())
    throw std::runtime_error("grid file declares nonneg but holds negative values: " + path);
  return f;
}

GridFunction load_grid_csv(const std::string& path, int d) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open csv grid file: " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  std::int64_t count = static_cast<std::int64_t>(values.size());
  for (int depth = 0; depth <= 30; ++depth) {
    GridSpec g{d, depth};
    if (d == 2 && depth > 15) break;
    if (g.total_cells() == count) return GridFunction(g, std::move(values));
  }
  throw std::runtime_error("csv cell count is not a dyadic grid size: " + path);
}

}  // namespace dw
