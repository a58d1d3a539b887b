#include "dhym/snapshot.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dhym/error.hpp"

namespace dhym {

namespace {

constexpr const char* kSchema = "dhymlab-snapshot/1";

static_assert(std::endian::native == std::endian::little, "binary snapshots assume little-endian");

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw InvalidInput("snapshot: bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const Snapshot& snap, Encoding enc) {
  if (snap.records.empty()) throw InvalidInput("snapshot has no records");
  const TorusGrid& g = snap.records.front().grid();
  for (const Potential& p : snap.records) {
    if (!(p.grid() == g)) throw InvalidInput("snapshot records live on different grids");
  }
  nlohmann::ordered_json h;
  h["schema"] = kSchema;
  h["kind"] = snap.kind;
  h["n"] = g.n();
  h["N"] = g.N();
  h["L"] = g.L();
  h["stencil"] = to_string(g.stencil());
  h["encoding"] = enc == Encoding::csv ? "csv" : "binary";
  h["count"] = snap.records.size();
  os << h.dump() << '\n';
  if (enc == Encoding::csv) {
    os << std::setprecision(17);
    for (std::size_t p = 0; p < g.size(); ++p) {
      for (std::size_t r = 0; r < snap.records.size(); ++r) {
        if (r) os << ',';
        os << snap.records[r][p];
      }
      os << '\n';
    }
  } else {
    for (const Potential& rec : snap.records) {
      os.write(reinterpret_cast<const char*>(rec.values().data()),
               static_cast<std::streamsize>(g.size() * sizeof(double)));
    }
  }
  if (!os) throw InvalidInput("snapshot: write failed");
}

Snapshot read_snapshot(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("snapshot: missing header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("snapshot: bad header: ") + e.what());
  }
  Snapshot snap;
  std::size_t count = 0;
  std::string encoding;
  TorusGrid grid(1, 8);
  try {
    if (h.at("schema").get<std::string>() != kSchema) throw InvalidInput("snapshot: unknown schema");
    snap.kind = h.at("kind").get<std::string>();
    grid = TorusGrid(h.at("n").get<int>(), h.at("N").get<int>(), h.at("L").get<double>(),
                     stencil_from_string(h.at("stencil").get<std::string>()));
    encoding = h.at("encoding").get<std::string>();
    count = h.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("snapshot: bad header field: ") + e.what());
  }
  if (count == 0) throw InvalidInput("snapshot: count must be >= 1");
  std::vector<Eigen::VectorXd> data(count, Eigen::VectorXd(static_cast<Eigen::Index>(grid.size())));
  if (encoding == "csv") {
    for (std::size_t p = 0; p < grid.size(); ++p) {
      if (!std::getline(is, line)) throw InvalidInput("snapshot: truncated csv payload");
      std::string_view rest(line);
      for (std::size_t r = 0; r < count; ++r) {
        const auto comma = rest.find(',');
        if ((comma == std::string_view::npos) != (r + 1 == count)) {
          throw InvalidInput("snapshot: wrong number of columns");
        }
        data[r][static_cast<Eigen::Index>(p)] = parse_double(rest.substr(0, comma));
        if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
      }
    }
  } else if (encoding == "binary") {
    for (auto& d : data) {
      is.read(reinterpret_cast<char*>(d.data()),
              static_cast<std::streamsize>(grid.size() * sizeof(double)));
      if (!is) throw InvalidInput("snapshot: truncated binary payload");
    }
  } else {
    throw InvalidInput("snapshot: unknown encoding '" + encoding + "'");
  }
  for (auto& d : data) {
    if (!d.allFinite()) throw InvalidInput("snapshot: non-finite value");
    snap.records.emplace_back(grid, std::move(d));
  }
  return snap;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap, Encoding enc) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  write_snapshot(os, snap, enc);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open '" + path.string() + "'");
  return read_snapshot(is);
}

void save_potential(const std::filesystem::path& path, const Potential& phi, Encoding enc) {
  save_snapshot(path, Snapshot{"potential", {phi}}, enc);
}

Potential load_potential(const std::filesystem::path& path) {
  Snapshot s = load_snapshot(path);
  if (s.records.size() != 1) throw InvalidInput("expected a single-record snapshot");
  return std::move(s.records.front());
}

}  // namespace dhym
