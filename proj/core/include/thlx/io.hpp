#pragma once

#include <string>

#include "thlx/types.hpp"

namespace thlx {

// CSV: signals use a "j,value" header; matrices are a plain numeric grid.
void write_signal_csv(const Signal& s, const std::string& path);
Signal read_signal_csv(const std::string& path);

void write_matrix_csv(const Matrix& m, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

// Versioned binary container: magic "THLX1", then a kind byte
// (0 = signal, 1 = matrix), u64 rows, u64 cols, row-major f64 payload.
// All integers and floats little-endian.
void write_signal_binary(const Signal& s, const std::string& path);
Signal read_signal_binary(const std::string& path);

void write_matrix_binary(const Matrix& m, const std::string& path);
Matrix read_matrix_binary(const std::string& path);

}  // namespace thlx
