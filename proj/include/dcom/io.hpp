#pragma once

#include <filesystem>
#include <string>

#include "dcom/matrix.hpp"

namespace dcom {

// "DCM1" binary matrix format: 4-byte magic "DCM1", u32 rows, u32 cols
// (little-endian), then rows*cols little-endian 32-bit reals, row-major.
DenseMatrix read_matrix_dcm1(const std::filesystem::path& path);
void write_matrix_dcm1(const std::filesystem::path& path, const DenseMatrix& m);

// CSV fixture reader: one row per line, comma-separated values.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);

/// Dispatches on extension: ".dcm1" binary, anything else CSV.
DenseMatrix read_matrix_auto(const std::filesystem::path& path);

/// Deterministic shortest-ish float formatting used by every CSV writer
/// (%.10g, locale-independent).
std::string format_real(double v);

} // namespace dcom
