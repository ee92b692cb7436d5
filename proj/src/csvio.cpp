#include "nfisac/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nfisac {

std::string format_full(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string CsvTable::to_string() const {
    std::string out;
    for (const auto& [key, value] : meta) out += "# " + key + ": " + value + "\n";
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("CsvTable: row width does not match header");
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_full(row[c]);
        }
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

namespace {

std::string render_real(const RMatrix& m) {
    std::string out = "# " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_full(m(r, c));
        }
        out += '\n';
    }
    return out;
}

RMatrix parse_real(const std::string& text, const std::string& path) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.size() < 2 || line[0] != '#')
        throw std::runtime_error(path + ": missing shape header");
    long rows = 0, cols = 0;
    if (std::sscanf(line.c_str(), "# %ld %ld", &rows, &cols) != 2 || rows < 0 || cols < 0)
        throw std::runtime_error(path + ": bad shape header");
    RMatrix m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated matrix");
        const char* p = line.c_str();
        for (long c = 0; c < cols; ++c) {
            char* end = nullptr;
            m(r, c) = std::strtod(p, &end);
            if (end == p) throw std::runtime_error(path + ": bad number in row " + std::to_string(r));
            p = end;
            if (*p == ',') ++p;
        }
    }
    return m;
}

}  // namespace

void write_real_matrix(const std::string& path, const RMatrix& m) {
    write_text_file(path, render_real(m));
}

RMatrix read_real_matrix(const std::string& path) {
    return parse_real(read_text_file(path), path);
}

void write_complex_matrix(const std::string& base_path, const CMatrix& m) {
    write_real_matrix(base_path + "_re.csv", m.real());
    write_real_matrix(base_path + "_im.csv", m.imag());
}

CMatrix read_complex_matrix(const std::string& base_path) {
    const RMatrix re = read_real_matrix(base_path + "_re.csv");
    const RMatrix im = read_real_matrix(base_path + "_im.csv");
    if (re.rows() != im.rows() || re.cols() != im.cols())
        throw std::runtime_error(base_path + ": real/imaginary shape mismatch");
    CMatrix m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return m;
}

}  // namespace nfisac
