#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dhym/error.hpp"
#include "dhym/snapshot.hpp"
#include "test_support.hpp"

using namespace dhym;

namespace {

Potential sample(const TorusGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  return dhym::testing::random_bump(g, rng, 0.7);
}

}  // namespace

TEST_CASE("csv and binary round trips are exact") {
  const TorusGrid g(2, 8, 3.5, Stencil::compact);
  Snapshot s;
  s.kind = "path";
  s.records = {sample(g, 1), sample(g, 2), sample(g, 3)};
  for (Encoding enc : {Encoding::csv, Encoding::binary}) {
    std::stringstream ss;
    write_snapshot(ss, s, enc);
    const Snapshot back = read_snapshot(ss);
    CHECK(back.kind == "path");
    REQUIRE(back.records.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(back.records[r].grid() == g);
      CHECK(back.records[r].values() == s.records[r].values());
    }
  }
}

TEST_CASE("header line carries the grid metadata") {
  const TorusGrid g(1, 8);
  Snapshot s;
  s.records = {sample(g, 4)};
  std::stringstream ss;
  write_snapshot(ss, s);
  std::string header;
  std::getline(ss, header);
  CHECK(header.find("\"schema\":\"dhymlab-snapshot/1\"") != std::string::npos);
  CHECK(header.find("\"N\":8") != std::string::npos);
  CHECK(header.find("\"encoding\":\"csv\"") != std::string::npos);
  CHECK(header.find("\"kind\":\"potential\"") != std::string::npos);
}

TEST_CASE("malformed input is rejected") {
  auto read = [](const std::string& text) {
    std::istringstream is(text);
    return read_snapshot(is);
  };
  CHECK_THROWS_AS(read(""), InvalidInput);
  CHECK_THROWS_AS(read("not json\n"), InvalidInput);
  CHECK_THROWS_AS(read(R"({"schema":"other/1"})" "\n"), InvalidInput);
  const std::string head =
      R"({"schema":"dhymlab-snapshot/1","kind":"potential","n":1,"N":8,"L":6.283185307179586,"stencil":"conservative","encoding":"csv","count":1})";
  CHECK_THROWS_AS(read(head + "\n1\n2\n"), InvalidInput);
  std::string body;
  for (int i = 0; i < 64; ++i) body += "0.5\n";
  CHECK_NOTHROW(read(head + "\n" + body));
  CHECK_THROWS_AS(read(head + "\n" + body.substr(0, body.size() - 4) + "abc\n"), InvalidInput);
  CHECK_THROWS_AS(read(head + "\n" + body.substr(0, body.size() - 4) + "nan\n"), InvalidInput);

  Snapshot mixed;
  mixed.records = {sample(TorusGrid(1, 8), 1), sample(TorusGrid(1, 10), 1)};
  std::ostringstream os;
  CHECK_THROWS_AS(write_snapshot(os, mixed), InvalidInput);
  CHECK_THROWS_AS(write_snapshot(os, Snapshot{}), InvalidInput);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "dhym_snapshot_test";
  std::filesystem::create_directories(dir);
  const TorusGrid g(1, 16);
  const Potential phi = sample(g, 9);
  save_potential(dir / "a.csv", phi);
  save_potential(dir / "a.bin", phi, Encoding::binary);
  CHECK(load_potential(dir / "a.csv").values() == phi.values());
  CHECK(load_potential(dir / "a.bin").values() == phi.values());
  Snapshot two;
  two.records = {phi, phi};
  save_snapshot(dir / "two.csv", two);
  CHECK(load_snapshot(dir / "two.csv").records.size() == 2);
  CHECK_THROWS_AS(load_potential(dir / "two.csv"), InvalidInput);
  CHECK_THROWS_AS(load_potential(dir / "missing.csv"), InvalidInput);
  std::filesystem::remove_all(dir);
}
