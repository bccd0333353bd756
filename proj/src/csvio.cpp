#include "qconv/csvio.hpp"

#include <cstdio>
#include <sstream>

#include "qconv/errors.hpp"

namespace qconv {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path), n_cols_(header.size()) {
    if (!out_) throw IoError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::write_row(const std::vector<double>& values) {
    if (values.size() != n_cols_)
        throw SchemaMismatch("CSV row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << format_double(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::write_raw_row(const std::vector<std::string>& fields) {
    if (fields.size() != n_cols_)
        throw SchemaMismatch("CSV row width does not match the header");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

void CsvWriter::close() { out_.close(); }

std::size_t CsvTable::col_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw SchemaMismatch("CSV column not found: " + name);
}

std::vector<double> CsvTable::column(const std::string& name) const {
    std::size_t idx = col_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[idx]);
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch("empty CSV: " + path);
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) table.header.push_back(field);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                row.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw SchemaMismatch("non-numeric CSV field in " + path);
            }
        }
        if (row.size() != table.header.size())
            throw SchemaMismatch("ragged CSV row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace qconv
