#ifndef NFISAC_CSVIO_HPP
#define NFISAC_CSVIO_HPP

#include <string>
#include <utility>
#include <vector>

#include "nfisac/numkernel.hpp"

// CSV persistence. Values are rendered with 17 significant digits so a
// rereading tool reconstructs the exact double; NaN cells print as "nan" and
// mark gaps (for example infeasible sweep points).

namespace nfisac {

std::string format_full(double v);

struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;  // "# key: value" lines
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_string() const;
};

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Complex matrices travel as a pair of real CSVs, "<base>_re.csv" and
// "<base>_im.csv", each starting with a "# rows cols" shape line.
void write_complex_matrix(const std::string& base_path, const CMatrix& m);
CMatrix read_complex_matrix(const std::string& base_path);

void write_real_matrix(const std::string& path, const RMatrix& m);
RMatrix read_real_matrix(const std::string& path);

}  // namespace nfisac

#endif
