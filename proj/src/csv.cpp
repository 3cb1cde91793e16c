#include "scs/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scs {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || begin == end) {
        throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + cell + "' as a number");
    }
    if (!std::isfinite(value)) {
        throw ValidationError("row " + std::to_string(row) + ", column '" + column +
                              "': non-finite value");
    }
    return value;
}

int parse_binary(const std::string& cell, std::size_t row, const std::string& column) {
    double v = parse_cell(cell, row, column);
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    throw ValidationError("row " + std::to_string(row) + ", column '" + column + "': value '" +
                          cell + "' is not 0 or 1");
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw SchemaError("missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("'" + path + "': empty file, header row required");
    }
    const std::vector<std::string> header = split_line(line);

    const std::size_t time_col = find_column(header, schema.time);
    const std::size_t event_col = find_column(header, schema.event);
    const std::size_t treatment_col = find_column(header, schema.treatment);

    std::vector<std::string> feature_names = schema.features;
    std::vector<std::size_t> feature_cols;
    if (feature_names.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j == time_col || j == event_col || j == treatment_col) continue;
            feature_names.push_back(header[j]);
            feature_cols.push_back(j);
        }
    } else {
        for (const std::string& name : feature_names) {
            feature_cols.push_back(find_column(header, name));
        }
    }
    const std::size_t d = feature_names.size();

    std::vector<SubjectRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() && in.eof()) break;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " cells, found " +
                             std::to_string(cells.size()));
        }
        SubjectRecord rec;
        rec.time = parse_cell(cells[time_col], row, schema.time);
        if (!(rec.time > 0.0)) {
            throw ValidationError("row " + std::to_string(row) + ", column '" + schema.time +
                                  "': time must be > 0");
        }
        rec.event = parse_binary(cells[event_col], row, schema.event);
        rec.treatment = parse_binary(cells[treatment_col], row, schema.treatment);
        rec.covariates.resize(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) {
            rec.covariates[static_cast<Eigen::Index>(j)] =
                parse_cell(cells[feature_cols[j]], row, feature_names[j]);
        }
        records.push_back(std::move(rec));
    }
    return Dataset(std::move(records), std::move(feature_names));
}

void write_csv(const std::string& path, const Dataset& ds, const CsvSchema& schema) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << schema.time << ',' << schema.event << ',' << schema.treatment;
    for (const std::string& name : ds.feature_names()) {
        out << ',' << name;
    }
    out << '\n';
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const SubjectRecord& r : ds.records()) {
        out << fmt(r.time) << ',' << r.event << ',' << r.treatment;
        for (Eigen::Index j = 0; j < r.covariates.size(); ++j) {
            out << ',' << fmt(r.covariates[j]);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

}  // namespace scs
