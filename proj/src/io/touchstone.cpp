#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "ctwpc/errors.hpp"
#include "ctwpc/io.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text == "nan" || text == "NaN") return std::nan("");
    if (text == "inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw Error(ErrorKind::Io, "not a number: '" + text + "'");
    return v;
}

namespace {

// Touchstone v1 lists 2-port data as S11 S21 S12 S22 and every other size row-major.
std::pair<int, int> entry_position(int n_ports, int k) {
    if (n_ports == 2) return {k % 2, k / 2};
    return {k / n_ports, k % n_ports};
}

int ports_from_extension(const std::filesystem::path& path) {
    static const std::regex re(R"(\.s(\d+)p$)", std::regex::icase);
    std::smatch m;
    const std::string name = path.filename().string();
    if (!std::regex_search(name, m, re)) throw Error(ErrorKind::Io, "not a Touchstone file name: " + name);
    return std::stoi(m[1]);
}

}  // namespace

void write_touchstone(const std::filesystem::path& path, const TouchstoneData& data) {
    const int n = data.n_ports;
    if (n < 1 || data.freq_hz.size() != data.s.size())
        throw Error(ErrorKind::Io, "inconsistent Touchstone data for " + path.string());
    std::ostringstream out;
    for (const auto& c : data.comments) out << "! " << c << "\n";
    if (!data.port_ohm.empty()) {
        out << "! port reference impedances (Ohm):";
        for (std::size_t p = 0; p < data.port_ohm.size(); ++p) out << " " << p + 1 << "=" << format_double(data.port_ohm[p]);
        out << "\n";
    }
    out << "# Hz S RI R " << format_double(data.reference_ohm) << "\n";
    for (std::size_t i = 0; i < data.freq_hz.size(); ++i) {
        const auto& s = data.s[i];
        if (s.rows() != n || s.cols() != n) throw Error(ErrorKind::Io, "S-matrix size does not match the port count");
        out << format_double(data.freq_hz[i]);
        const int per_line = n <= 2 ? n * n : n;
        for (int k = 0; k < n * n; ++k) {
            if (k > 0 && k % per_line == 0) out << "\n";
            const auto [r, c] = entry_position(n, k);
            out << " " << format_double(s(r, c).real()) << " " << format_double(s(r, c).imag());
        }
        out << "\n";
    }
    write_text(path, out.str());
}

TouchstoneData read_touchstone(const std::filesystem::path& path) {
    TouchstoneData data;
    data.n_ports = ports_from_extension(path);
    const int n = data.n_ports;
    std::istringstream in(read_text(path));
    std::string line;
    double unit = 1e9;  // Touchstone default is GHz
    std::string format = "MA";
    std::vector<double> numbers;
    static const std::regex port_z(R"((\d+)=([^\s]+))");
    while (std::getline(in, line)) {
        const auto bang = line.find('!');
        if (bang != std::string::npos) {
            const std::string comment = line.substr(bang + 1);
            if (comment.find("port reference impedances") != std::string::npos) {
                for (auto it = std::sregex_iterator(comment.begin(), comment.end(), port_z); it != std::sregex_iterator(); ++it)
                    data.port_ohm.push_back(parse_double((*it)[2]));
            } else {
                data.comments.push_back(comment.substr(comment.find_first_not_of(' ') == std::string::npos
                                                           ? comment.size()
                                                           : comment.find_first_not_of(' ')));
            }
            line = line.substr(0, bang);
        }
        std::istringstream tokens(line);
        std::string tok;
        if (line.find('#') != std::string::npos) {
            tokens.ignore(std::numeric_limits<std::streamsize>::max(), '#');
            while (tokens >> tok) {
                std::string up = tok;
                std::transform(up.begin(), up.end(), up.begin(), ::toupper);
                if (up == "HZ") unit = 1.0;
                else if (up == "KHZ") unit = 1e3;
                else if (up == "MHZ") unit = 1e6;
                else if (up == "GHZ") unit = 1e9;
                else if (up == "RI" || up == "MA" || up == "DB") format = up;
                else if (up == "S") continue;
                else if (up == "R") {
                    if (!(tokens >> tok)) throw Error(ErrorKind::Io, "option line R without a value");
                    data.reference_ohm = parse_double(tok);
                } else {
                    throw Error(ErrorKind::Io, "unsupported Touchstone option '" + tok + "'");
                }
            }
            continue;
        }
        while (tokens >> tok) numbers.push_back(parse_double(tok));
    }
    const std::size_t per_point = 1 + 2 * static_cast<std::size_t>(n) * n;
    if (numbers.size() % per_point != 0) throw Error(ErrorKind::Io, "truncated Touchstone data in " + path.string());
    for (std::size_t base = 0; base < numbers.size(); base += per_point) {
        data.freq_hz.push_back(numbers[base] * unit);
        Eigen::MatrixXcd s(n, n);
        for (int k = 0; k < n * n; ++k) {
            const double a = numbers[base + 1 + 2 * k];
            const double b = numbers[base + 2 + 2 * k];
            std::complex<double> v;
            if (format == "RI") v = {a, b};
            else if (format == "MA") v = std::polar(a, b * kPi / 180.0);
            else v = std::polar(std::pow(10.0, a / 20.0), b * kPi / 180.0);
            const auto [r, c] = entry_position(n, k);
            s(r, c) = v;
        }
        data.s.push_back(std::move(s));
    }
    return data;
}

}  // namespace ctwpc::io
