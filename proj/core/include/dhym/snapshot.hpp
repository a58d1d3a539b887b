#pragma once

// Snapshot files: a one-line JSON header followed by the payload.
//
//   {"schema":"dhymlab-snapshot/1","kind":"potential","n":1,"N":64,"L":6.28...,
//    "stencil":"conservative","encoding":"csv","count":1}
//
// csv: one row per grid point, `count` comma-separated values per row.
// binary: count * N^{2n} little-endian doubles, record after record.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dhym/torus.hpp"

namespace dhym {

enum class Encoding { csv, binary };

struct Snapshot {
  std::string kind = "potential";
  std::vector<Potential> records;
};

void write_snapshot(std::ostream& os, const Snapshot& snap, Encoding enc = Encoding::csv);
Snapshot read_snapshot(std::istream& is);

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap,
                   Encoding enc = Encoding::csv);
Snapshot load_snapshot(const std::filesystem::path& path);

/// Single-potential convenience wrappers.
void save_potential(const std::filesystem::path& path, const Potential& phi,
                    Encoding enc = Encoding::csv);
Potential load_potential(const std::filesystem::path& path);

}  // namespace dhym
