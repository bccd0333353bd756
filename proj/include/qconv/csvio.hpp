#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace qconv {

// Shortest-roundtrip-free, byte-stable double formatting ("%.17g"); identical
// inputs always produce identical CSV bytes on a given platform.
std::string format_double(double x);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void write_row(const std::vector<double>& values);
    // Preformatted fields, for rows mixing integer and double columns.
    void write_raw_row(const std::vector<std::string>& fields);
    void close();

private:
    std::ofstream out_;
    std::size_t n_cols_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t col_index(const std::string& name) const; // throws SchemaMismatch
    std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

} // namespace qconv
