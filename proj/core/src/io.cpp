#include "thlx/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace thlx {

namespace {

constexpr char kMagic[5] = {'T', 'H', 'L', 'X', '1'};
constexpr std::uint8_t kKindSignal = 0;
constexpr std::uint8_t kKindMatrix = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(os, bits);
}

double get_f64(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = {}) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = {}) {
  std::ifstream is(path, mode);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

void write_binary_payload(const Matrix& m, std::uint8_t kind, const std::string& path) {
  auto os = open_out(path, std::ios::binary);
  os.write(kMagic, 5);
  os.put(static_cast<char>(kind));
  put_u64(os, static_cast<std::uint64_t>(m.rows()));
  put_u64(os, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) put_f64(os, m(i, j));
  if (!os) throw std::runtime_error("short write: " + path);
}

Matrix read_binary_payload(std::uint8_t expected_kind, const std::string& path) {
  auto is = open_in(path, std::ios::binary);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, kMagic, 5) != 0) {
    throw std::runtime_error("bad magic, not a THLX1 container: " + path);
  }
  const int kind = is.get();
  if (kind != expected_kind) {
    throw std::runtime_error("container kind mismatch in " + path);
  }
  const auto rows = static_cast<Index>(get_u64(is));
  const auto cols = static_cast<Index>(get_u64(is));
  if (rows < 0 || cols < 0) throw std::runtime_error("bad dimensions in " + path);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = get_f64(is);
  if (!is) throw std::runtime_error("short read: " + path);
  return m;
}

void format_value(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void write_signal_csv(const Signal& s, const std::string& path) {
  auto os = open_out(path);
  os << "j,value\n";
  for (Index j = 0; j < s.size(); ++j) {
    os << j << ",";
    format_value(os, s.coef[j]);
    os << "\n";
  }
}

Signal read_signal_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty signal csv: " + path);
  std::vector<std::pair<Index, double>> entries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad signal row: " + line);
    entries.emplace_back(static_cast<Index>(std::stoll(line.substr(0, comma))),
                         std::stod(line.substr(comma + 1)));
  }
  Index p = 0;
  for (const auto& [j, v] : entries) p = std::max(p, j + 1);
  Signal s = Signal::zeros(p);
  for (const auto& [j, v] : entries) s.coef[j] = v;
  return s;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  auto os = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ",";
      format_value(os, m(i, j));
    }
    os << "\n";
  }
}

Matrix read_matrix_csv(const std::string& path) {
  auto is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("ragged matrix csv: " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty matrix csv: " + path);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_signal_binary(const Signal& s, const std::string& path) {
  write_binary_payload(s.coef, kKindSignal, path);
}

Signal read_signal_binary(const std::string& path) {
  Matrix m = read_binary_payload(kKindSignal, path);
  if (m.cols() != 1) throw std::runtime_error("signal container must have one column");
  return Signal(Vector(m.col(0)));
}

void write_matrix_binary(const Matrix& m, const std::string& path) {
  write_binary_payload(m, kKindMatrix, path);
}

Matrix read_matrix_binary(const std::string& path) {
  return read_binary_payload(kKindMatrix, path);
}

}  // namespace thlx
