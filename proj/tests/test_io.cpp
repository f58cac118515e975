#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_helpers.hpp"
#include "thlx/io.hpp"

using namespace thlx;

namespace {
std::filesystem::path tmp_path(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "thlx_io_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("signal CSV round trip") {
  Signal s{(Vector(4) << 1.5, 0.0, -2.25, 1e-17).finished()};
  const auto path = tmp_path("sig.csv");
  write_signal_csv(s, path.string());
  const Signal back = read_signal_csv(path.string());
  REQUIRE(back.size() == 4);
  for (Index j = 0; j < 4; ++j) CHECK(back.coef[j] == doctest::Approx(s.coef[j]));

  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "j,value");
}

TEST_CASE("matrix CSV round trip") {
  RandomSource src(5);
  auto rng = src.stream(0);
  Matrix m(3, 4);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) m(i, j) = rng.normal();
  const auto path = tmp_path("mat.csv");
  write_matrix_csv(m, path.string());
  const Matrix back = read_matrix_csv(path.string());
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  CHECK((back - m).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("binary container round trips bit-exactly and checks its magic") {
  RandomSource src(6);
  auto rng = src.stream(0);
  Matrix m(5, 3);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 3; ++j) m(i, j) = rng.normal() * std::pow(10.0, rng.normal());
  const auto path = tmp_path("mat.bin");
  write_matrix_binary(m, path.string());
  const Matrix back = read_matrix_binary(path.string());
  CHECK((back.array() == m.array()).all());

  Signal s{Vector(m.col(0))};
  const auto spath = tmp_path("sig.bin");
  write_signal_binary(s, spath.string());
  const Signal sback = read_signal_binary(spath.string());
  CHECK((sback.coef.array() == s.coef.array()).all());

  // Magic check: the two kinds refuse each other.
  CHECK_THROWS_AS(read_signal_binary(path.string()), std::runtime_error);

  std::ofstream bad(tmp_path("bad.bin"), std::ios::binary);
  bad << "NOTTHLX";
  bad.close();
  CHECK_THROWS_WITH_AS(read_matrix_binary(tmp_path("bad.bin").string()),
                       doctest::Contains("magic"), std::runtime_error);
}

TEST_CASE("binary container starts with THLX1") {
  const auto path = tmp_path("probe.bin");
  write_signal_binary(Signal{(Vector(1) << 42.0).finished()}, path.string());
  std::ifstream is(path, std::ios::binary);
  char magic[5];
  is.read(magic, 5);
  CHECK(std::string(magic, 5) == "THLX1");
}
