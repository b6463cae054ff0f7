#include "dgm/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dgm {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

// Next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
  std::string token;
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  while (ch != EOF && !std::isspace(ch)) {
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  return token;
}

long parse_header_number(std::istream& in, const std::filesystem::path& path) {
  const std::string token = next_token(in);
  try {
    std::size_t used = 0;
    const long value = std::stol(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    fail(path, "malformed PNM header");
  }
}

void write_u64(std::ostream& out, std::uint64_t value) {
  std::array<unsigned char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] =
      static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

std::uint64_t read_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  std::uint64_t value = 0;
  for (int i = 7; i >= 0; --i) value = (value << 8) | bytes[static_cast<std::size_t>(i)];
  return value;
}

void write_f64_le(std::ostream& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  write_u64(out, bits);
}

double read_f64_le(std::istream& in) {
  const std::uint64_t bits = read_u64(in);
  double value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

MatrixX<double> read_frame(const std::filesystem::path& path, ScalingMode scaling) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  const std::string magic = next_token(in);
  const bool color = magic == "P6";
  if (magic != "P5" && !color) fail(path, "unsupported format (want P5 or P6)");
  const long width = parse_header_number(in, path);
  const long height = parse_header_number(in, path);
  const long maxval = parse_header_number(in, path);
  if (width <= 0 || height <= 0) fail(path, "bad dimensions");
  if (maxval <= 0 || maxval > 255) fail(path, "unsupported bit depth");

  const std::size_t samples = static_cast<std::size_t>(width) *
                              static_cast<std::size_t>(height) * (color ? 3 : 1);
  std::vector<unsigned char> raw(samples);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(samples));
  if (static_cast<std::size_t>(in.gcount()) != samples) fail(path, "truncated pixel data");

  const bool scale = scaling == ScalingMode::unit_interval;
  MatrixX<double> image(height, width);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      const std::size_t at = static_cast<std::size_t>(r * width + c) * (color ? 3 : 1);
      double value;
      if (color) {
        value = 0.299 * raw[at] + 0.587 * raw[at + 1] + 0.114 * raw[at + 2];
      } else {
        value = raw[at];
      }
      image(r, c) = scale ? value / static_cast<double>(maxval) : value;
    }
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const MatrixX<double>& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(image.size()));
  std::size_t at = 0;
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) {
      const double clamped = std::clamp(image(r, c), 0.0, 1.0);
      raw[at++] = static_cast<unsigned char>(std::lround(clamped * 255.0));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) fail(path, "write failed");
}

void write_mask_pgm(const std::filesystem::path& path,
                    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& mask) {
  write_pgm(path, mask.cast<double>().matrix());
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> read_mask_pgm(
    const std::filesystem::path& path) {
  const MatrixX<double> image = read_frame(path);
  return image.array() > 0.5;
}

VideoFrames<double> ingest_frames(const std::filesystem::path& directory,
                                  ScalingMode scaling) {
  if (!std::filesystem::is_directory(directory)) {
    fail(directory, "not a directory");
  }
  std::vector<std::filesystem::path> files;
  const std::filesystem::path manifest = directory / "frames.txt";
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) files.push_back(directory / line);
    }
  } else {
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.size() < 2) {
    fail(directory, "need at least 2 frame files");
  }

  VideoFrames<double> video;
  video.frames.reserve(files.size());
  for (const auto& file : files) {
    MatrixX<double> frame = read_frame(file, scaling);
    if (!video.frames.empty() && (frame.rows() != video.frame_rows() ||
                                  frame.cols() != video.frame_cols())) {
      fail(file, "frame dimensions differ from the first frame");
    }
    video.frames.push_back(std::move(frame));
  }
  return video;
}

void write_matrix(const std::filesystem::path& path, const VideoMatrix<double>& matrix) {
  if (matrix.values.rows() != matrix.frame_rows * matrix.frame_cols) {
    throw std::invalid_argument("write_matrix: shape metadata mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out.write("DGM1", 4);
  write_u64(out, static_cast<std::uint64_t>(matrix.frame_rows));
  write_u64(out, static_cast<std::uint64_t>(matrix.frame_cols));
  write_u64(out, static_cast<std::uint64_t>(matrix.frame_count()));
  for (Index r = 0; r < matrix.values.rows(); ++r) {
    for (Index c = 0; c < matrix.values.cols(); ++c) {
      write_f64_le(out, matrix.values(r, c));
    }
  }
  if (!out) fail(path, "write failed");
}

VideoMatrix<double> read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DGM1", 4) != 0) fail(path, "not a DGM1 matrix file");
  VideoMatrix<double> matrix;
  matrix.frame_rows = static_cast<Index>(read_u64(in));
  matrix.frame_cols = static_cast<Index>(read_u64(in));
  const Index frames = static_cast<Index>(read_u64(in));
  if (!in || matrix.frame_rows <= 0 || matrix.frame_cols <= 0 || frames <= 0) {
    fail(path, "bad DGM1 header");
  }
  matrix.values.resize(matrix.frame_rows * matrix.frame_cols, frames);
  for (Index r = 0; r < matrix.values.rows(); ++r) {
    for (Index c = 0; c < matrix.values.cols(); ++c) {
      matrix.values(r, c) = read_f64_le(in);
    }
  }
  if (!in) fail(path, "truncated DGM1 payload");
  return matrix;
}

void write_triplets(const std::filesystem::path& path,
                    const SparseMatrixX<double>& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("write_triplets: matrix must be square");
  }
  struct Entry {
    Index row, col;
    double value;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(matrix.nonZeros()));
  for (Index k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrixX<double>::InnerIterator it(matrix, k); it; ++it) {
      entries.push_back({it.row(), it.col(), it.value()});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << "DGL1 " << matrix.rows() << ' ' << entries.size() << '\n';
  char buffer[64];
  for (const Entry& e : entries) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", e.value);
    out << e.row << ' ' << e.col << ' ' << buffer << '\n';
  }
  if (!out) fail(path, "write failed");
}

SparseMatrixX<double> read_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string magic;
  Index dim = 0;
  std::size_t nnz = 0;
  in >> magic >> dim >> nnz;
  if (!in || magic != "DGL1" || dim <= 0) fail(path, "not a DGL1 triplet file");
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    Index row = 0, col = 0;
    double value = 0;
    in >> row >> col >> value;
    if (!in || row < 0 || col < 0 || row >= dim || col >= dim) {
      fail(path, "malformed triplet line");
    }
    entries.emplace_back(static_cast<int>(row), static_cast<int>(col), value);
  }
  SparseMatrixX<double> matrix(dim, dim);
  matrix.setFromTriplets(entries.begin(), entries.end());
  return matrix;
}

}  // namespace dgm
