#include "dcom/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dcom {

namespace {

void put_u32_le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

DenseMatrix read_matrix_dcm1(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "DCM1", 4) != 0) {
        throw io_error(path.string() + ": bad magic, not a DCM1 file");
    }
    std::uint32_t rows = get_u32_le(is);
    std::uint32_t cols = get_u32_le(is);
    if (!is) throw io_error(path.string() + ": truncated header");
    std::vector<float> data(static_cast<std::size_t>(rows) * cols);
    for (auto& v : data) {
        std::uint32_t bits = get_u32_le(is);
        v = std::bit_cast<float>(bits);
    }
    if (!is) throw io_error(path.string() + ": truncated payload");
    return DenseMatrix(rows, cols, std::move(data));
}

void write_matrix_dcm1(const std::filesystem::path& path, const DenseMatrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open " + path.string() + " for writing");
    os.write("DCM1", 4);
    put_u32_le(os, static_cast<std::uint32_t>(m.rows()));
    put_u32_le(os, static_cast<std::uint32_t>(m.cols()));
    for (float v : m.data()) put_u32_le(os, std::bit_cast<std::uint32_t>(v));
    if (!os) throw io_error("write failed for " + path.string());
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open " + path.string());
    std::vector<float> data;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t n = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                data.push_back(std::stof(cell));
            } catch (const std::exception&) {
                throw io_error(path.string() + ": cannot parse '" + cell + "' as a real");
            }
            ++n;
        }
        if (rows == 0) {
            cols = n;
        } else if (n != cols) {
            throw io_error(path.string() + ": ragged row " + std::to_string(rows));
        }
        ++rows;
    }
    return DenseMatrix(rows, cols, std::move(data));
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_real(m(i, j));
        }
        os << '\n';
    }
}

DenseMatrix read_matrix_auto(const std::filesystem::path& path) {
    if (path.extension() == ".dcm1") return read_matrix_dcm1(path);
    return read_matrix_csv(path);
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace dcom
