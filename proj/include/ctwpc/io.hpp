#pragma once

#include <Eigen/Core>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctwpc/device.hpp"
#include "ctwpc/errors.hpp"

namespace ctwpc::io {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole token; throws Io on trailing garbage.
double parse_double(const std::string& text);

// ---- Touchstone ----------------------------------------------------------

struct TouchstoneData {
    int n_ports = 0;
    std::vector<double> freq_hz;
    std::vector<Eigen::MatrixXcd> s;  // s[i](out, in)
    double reference_ohm = 50.0;      // the single R of the option line
    std::vector<double> port_ohm;     // per-port references, carried in comments
    std::vector<std::string> comments;
};

/// Touchstone v1.1, "# Hz S RI R <ref>", full precision.
void write_touchstone(const std::filesystem::path& path, const TouchstoneData& data);
/// Reads v1 files in RI, MA or DB with any frequency unit; the port count comes from the .sNp extension.
TouchstoneData read_touchstone(const std::filesystem::path& path);

// ---- CSV -----------------------------------------------------------------

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells);
    void add_row(const std::vector<double>& values);
    [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
    [[nodiscard]] std::size_t rows() const { return rows_.size(); }
    [[nodiscard]] std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by header name; throws Io when missing.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

CsvData read_csv(const std::filesystem::path& path);

// ---- Run manifest --------------------------------------------------------

struct OutputRecord {
    std::string path;  // relative to the output directory
    std::string sha256;
};

struct RunManifest {
    std::string tool_version;
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string started_utc;
    std::string finished_utc;
    bool partial = false;
    std::vector<OutputRecord> outputs;
    json extra = json::object();

    [[nodiscard]] json to_json() const;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// ---- Configuration -------------------------------------------------------

/// Configuration error tied to a field path such as "line.defects[0].cell".
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(ErrorKind::Config, field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// LineSpec from a JSON document. Keys: l_j_nH, c_g_pF, c_i_pF, plasma_ghz or
/// c_j_fF, n_cells, defects[], disorder_halfwidth, seed. Missing cell keys fall
/// back to the fitted preset. Throws Config with the offending field path.
LineSpec line_spec_from_json(const json& doc, const std::string& where = "line");
json line_spec_to_json(const LineSpec& spec);

/// Canonical serialization used for hashing (sorted keys, no whitespace).
std::string canonical(const json& doc);

// ---- SVG -----------------------------------------------------------------

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Quick-look line plot; non-finite points break the polyline.
std::string render_svg(const PlotSpec& plot);

}  // namespace ctwpc::io
