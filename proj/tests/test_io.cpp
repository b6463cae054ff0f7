#include <fstream>
#include <random>

#include <doctest.h>
#include <Eigen/Dense>

#include "dgm/io.hpp"
#include "support/tempdir.hpp"

using dgm::Index;
using dgm_test::TempDir;

namespace {

void write_raw_pgm(const std::filesystem::path& path, int width, int height,
                   int maxval, const std::vector<unsigned char>& data) {
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

}  // namespace

TEST_CASE("read_frame scales 8-bit samples by the declared maxval") {
  TempDir dir("pgm");
  write_raw_pgm(dir.path() / "a.pgm", 2, 1, 255, {255, 128});
  const auto frame = dgm::read_frame(dir.path() / "a.pgm");
  CHECK(frame(0, 0) == 1.0);
  CHECK(frame(0, 1) == doctest::Approx(128.0 / 255.0));

  write_raw_pgm(dir.path() / "b.pgm", 1, 1, 100, {50});
  CHECK(dgm::read_frame(dir.path() / "b.pgm")(0, 0) == doctest::Approx(0.5));

  const auto raw = dgm::read_frame(dir.path() / "a.pgm", dgm::ScalingMode::none);
  CHECK(raw(0, 0) == 255.0);
}

TEST_CASE("read_frame reduces P6 color via BT.601 luma") {
  TempDir dir("ppm");
  std::ofstream out(dir.path() / "rgb.ppm", std::ios::binary);
  out << "P6\n1 1\n255\n";
  const unsigned char px[3] = {255, 0, 0};
  out.write(reinterpret_cast<const char*>(px), 3);
  out.close();
  const auto frame = dgm::read_frame(dir.path() / "rgb.ppm");
  CHECK(frame(0, 0) == doctest::Approx(0.299));
}

TEST_CASE("read_frame rejects deep or broken files") {
  TempDir dir("bad");
  write_raw_pgm(dir.path() / "deep.pgm", 1, 1, 65535, {0, 0});
  CHECK_THROWS_AS(dgm::read_frame(dir.path() / "deep.pgm"), std::runtime_error);
  write_raw_pgm(dir.path() / "short.pgm", 4, 4, 255, {1, 2, 3});
  CHECK_THROWS_AS(dgm::read_frame(dir.path() / "short.pgm"), std::runtime_error);
  CHECK_THROWS_AS(dgm::read_frame(dir.path() / "missing.pgm"), std::runtime_error);
}

TEST_CASE("write_pgm / read_frame round-trips quantized images") {
  TempDir dir("roundtrip");
  std::mt19937 rng(71);
  std::uniform_int_distribution<int> byte(0, 255);
  Eigen::MatrixXd image(5, 7);
  for (Index c = 0; c < 7; ++c) {
    for (Index r = 0; r < 5; ++r) image(r, c) = byte(rng) / 255.0;
  }
  dgm::write_pgm(dir.path() / "img.pgm", image);
  const auto back = dgm::read_frame(dir.path() / "img.pgm");
  CHECK((back - image).norm() == 0.0);  // exact: values sit on the 8-bit grid
}

TEST_CASE("mask PGMs store only 0 and 255") {
  TempDir dir("mask");
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(3, 4);
  mask.setConstant(false);
  mask(1, 2) = true;
  mask(2, 0) = true;
  dgm::write_mask_pgm(dir.path() / "m.pgm", mask);
  const auto raw = dgm::read_frame(dir.path() / "m.pgm", dgm::ScalingMode::none);
  for (Index c = 0; c < 4; ++c) {
    for (Index r = 0; r < 3; ++r) {
      CHECK((raw(r, c) == 0.0 || raw(r, c) == 255.0));
    }
  }
  const auto back = dgm::read_mask_pgm(dir.path() / "m.pgm");
  CHECK((back == mask).all());
}

TEST_CASE("ingest_frames orders lexicographically and validates shapes") {
  TempDir dir("ingest");
  write_raw_pgm(dir.path() / "f2.pgm", 2, 2, 255, {10, 20, 30, 40});
  write_raw_pgm(dir.path() / "f1.pgm", 2, 2, 255, {255, 255, 255, 255});
  write_raw_pgm(dir.path() / "f3.pgm", 2, 2, 255, {0, 0, 0, 0});
  const auto video = dgm::ingest_frames(dir.path());
  REQUIRE(video.frame_count() == 3);
  CHECK(video.frames[0](0, 0) == 1.0);  // f1 sorts first
  CHECK(video.frames[2](0, 0) == 0.0);

  write_raw_pgm(dir.path() / "f4.pgm", 3, 2, 255, {0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(dgm::ingest_frames(dir.path()), std::runtime_error);
}

TEST_CASE("ingest_frames maps three identical 255-valued frames to all ones") {
  TempDir dir("saturated");
  for (const char* name : {"a.pgm", "b.pgm", "c.pgm"}) {
    write_raw_pgm(dir.path() / name, 2, 2, 255, {255, 255, 255, 255});
  }
  const auto video = dgm::ingest_frames(dir.path());
  REQUIRE(video.frame_count() == 3);
  for (const auto& frame : video.frames) {
    CHECK((frame.array() == 1.0).all());
  }
}

TEST_CASE("ingest_frames honors a frames.txt manifest") {
  TempDir dir("manifest");
  write_raw_pgm(dir.path() / "a.pgm", 1, 1, 255, {10});
  write_raw_pgm(dir.path() / "b.pgm", 1, 1, 255, {20});
  std::ofstream manifest(dir.path() / "frames.txt");
  manifest << "b.pgm\na.pgm\n";
  manifest.close();
  const auto video = dgm::ingest_frames(dir.path());
  REQUIRE(video.frame_count() == 2);
  CHECK(video.frames[0](0, 0) == doctest::Approx(20.0 / 255.0));
}

TEST_CASE("ingest_frames requires a directory with at least two frames") {
  TempDir dir("sparsedir");
  CHECK_THROWS_AS(dgm::ingest_frames(dir.path() / "nope"), std::runtime_error);
  write_raw_pgm(dir.path() / "only.pgm", 1, 1, 255, {1});
  CHECK_THROWS_AS(dgm::ingest_frames(dir.path()), std::runtime_error);
}

TEST_CASE("DGM1 matrix files round-trip bit-exactly") {
  TempDir dir("dgm1");
  std::mt19937 rng(72);
  std::normal_distribution<double> gauss(0.0, 1.0);
  dgm::VideoMatrix<double> matrix;
  matrix.frame_rows = 3;
  matrix.frame_cols = 4;
  matrix.values.resize(12, 5);
  for (Index c = 0; c < 5; ++c) {
    for (Index r = 0; r < 12; ++r) matrix.values(r, c) = gauss(rng);
  }
  dgm::write_matrix(dir.path() / "m.dgm", matrix);
  const auto back = dgm::read_matrix(dir.path() / "m.dgm");
  CHECK(back.frame_rows == 3);
  CHECK(back.frame_cols == 4);
  CHECK((back.values - matrix.values).norm() == 0.0);
}

TEST_CASE("DGM1 reader rejects foreign files") {
  TempDir dir("dgm1bad");
  std::ofstream out(dir.path() / "junk.dgm", std::ios::binary);
  out << "JUNKJUNKJUNK";
  out.close();
  CHECK_THROWS_AS(dgm::read_matrix(dir.path() / "junk.dgm"), std::runtime_error);
}

TEST_CASE("DGL1 triplet files round-trip with a deterministic header") {
  TempDir dir("dgl1");
  std::vector<Eigen::Triplet<double>> entries{
      {0, 1, 0.5}, {1, 0, 0.5}, {1, 2, 0.125}, {2, 1, 0.125}, {0, 0, 1.0}};
  dgm::SparseMatrixX<double> matrix(3, 3);
  matrix.setFromTriplets(entries.begin(), entries.end());
  dgm::write_triplets(dir.path() / "g.dgl", matrix);

  std::ifstream in(dir.path() / "g.dgl");
  std::string header;
  std::getline(in, header);
  CHECK(header == "DGL1 3 5");

  const auto back = dgm::read_triplets(dir.path() / "g.dgl");
  CHECK((Eigen::MatrixXd(back) - Eigen::MatrixXd(matrix)).norm() == 0.0);
}
