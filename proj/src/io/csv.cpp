#include <sstream>

#include "ctwpc/errors.hpp"
#include "ctwpc/io.hpp"

namespace ctwpc::io {

namespace {

std::string quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string q = "\"";
    for (char c : cell) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw Error(ErrorKind::Io, "CSV row width does not match the header");
    rows_.push_back(std::move(cells));
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
}

std::string CsvTable::str() const {
    std::ostringstream out;
    const auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << quote(row[i]);
        out << "\n";
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out.str();
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

std::size_t CsvData::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw Error(ErrorKind::Io, "CSV has no column '" + name + "'");
}

CsvData read_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    CsvData data;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto cells = split_line(line);
        if (first) {
            data.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != data.header.size())
            throw Error(ErrorKind::Io, "CSV row width does not match the header in " + path.string());
        data.rows.push_back(std::move(cells));
    }
    if (first) throw Error(ErrorKind::Io, "empty CSV file " + path.string());
    return data;
}

}  // namespace ctwpc::io
