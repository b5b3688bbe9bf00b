#include "ctwpc/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::AboveCutoff: return "AboveCutoff";
        case ErrorKind::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
        case ErrorKind::NoSolutionInBand: return "NoSolutionInBand";
        case ErrorKind::PumpAboveCutoff: return "PumpAboveCutoff";
        case ErrorKind::WrongPropagationSigns: return "WrongPropagationSigns";
        case ErrorKind::SectionMismatch: return "SectionMismatch";
        case ErrorKind::SingularNetwork: return "SingularNetwork";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::DecompositionIllConditioned: return "DecompositionIllConditioned";
        case ErrorKind::NoPeakAboveThreshold: return "NoPeakAboveThreshold";
        case ErrorKind::NonUniformGrid: return "NonUniformGrid";
        case ErrorKind::Config: return "Config";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

CellParams CellParams::from_junction_capacitance(double L_J, double C_g, double C_i, double C_J) {
    return CellParams{L_J, C_g, C_i, C_J};
}

CellParams CellParams::from_plasma_frequency(double L_J, double C_g, double C_i, double omega_J) {
    return CellParams{L_J, C_g, C_i, 1.0 / (L_J * omega_J * omega_J)};
}

CellParams CellParams::from_velocities(double L_J, double v_sigma0, double v_delta0, double omega_J) {
    // v = a / sqrt(L_J C) with a = 1 cell and v in cell/ns.
    const double vs = v_sigma0 * kGiga;
    const double vd = v_delta0 * kGiga;
    const double C_g = 1.0 / (L_J * vs * vs);
    const double C_delta = 1.0 / (L_J * vd * vd);
    return from_plasma_frequency(L_J, C_g, 0.5 * (C_delta - C_g), omega_J);
}

double CellParams::omega_J() const { return 1.0 / std::sqrt(L_J * C_J); }
double CellParams::omega_g() const { return 1.0 / std::sqrt(L_J * C_g); }
double CellParams::mu() const { return 1.0 + 2.0 * C_i / C_g; }

DerivedConstants derive_constants(const CellParams& cell) {
    DerivedConstants d;
    const double Cd = cell.delta_capacitance();
    d.v_sigma0 = 1.0 / std::sqrt(cell.L_J * cell.C_g) / kGiga;
    d.v_delta0 = 1.0 / std::sqrt(cell.L_J * Cd) / kGiga;
    d.Z_sigma = std::sqrt(cell.L_J / cell.C_g);
    d.Z_delta = std::sqrt(cell.L_J / Cd);
    d.omega_sigma_co = 2.0 / std::sqrt(cell.L_J * (cell.C_g + 4.0 * cell.C_J));
    d.omega_delta_co = 2.0 / std::sqrt(cell.L_J * (Cd + 4.0 * cell.C_J));
    d.omega_g = cell.omega_g();
    d.omega_J = cell.omega_J();
    d.mu = cell.mu();
    return d;
}

bool is_open(double inductance) { return std::isinf(inductance); }

int JunctionTable::open_count() const {
    const auto count = [](const std::vector<double>& v) {
        return static_cast<int>(std::count_if(v.begin(), v.end(), is_open));
    };
    return count(electrode_a) + count(electrode_b);
}

namespace {

// splitmix64: fixed, portable stream so tables match across standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace

JunctionTable sample_disorder(const LineSpec& spec) {
    JunctionTable table;
    const auto n = static_cast<std::size_t>(spec.n_cells);
    table.electrode_a.resize(n);
    table.electrode_b.resize(n);
    const double L = spec.cell.L_J;
    const double w = spec.disorder_halfwidth;
    SplitMix64 rng(spec.seed);
    for (std::size_t i = 0; i < n; ++i) {
        // Two draws per cell regardless of w or defects keeps the stream aligned.
        const double ua = rng.uniform();
        const double ub = rng.uniform();
        table.electrode_a[i] = w == 0.0 ? L : L * (1.0 - w + 2.0 * w * ua);
        table.electrode_b[i] = w == 0.0 ? L : L * (1.0 - w + 2.0 * w * ub);
    }
    for (const auto& defect : spec.defects) {
        if (defect.cell_index >= 0 && defect.cell_index < spec.n_cells) {
            table.electrode_a[static_cast<std::size_t>(defect.cell_index)] =
                std::numeric_limits<double>::infinity();
        }
    }
    return table;
}

ValidationResult validate(const LineSpec& spec) {
    ValidationResult result;
    result.spec = spec;
    auto& v = result.violations;
    const auto positive = [&](double value, const char* path) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            v.push_back({path, "must be finite and strictly positive"});
        }
    };
    positive(spec.cell.L_J, "cell.L_J");
    positive(spec.cell.C_g, "cell.C_g");
    positive(spec.cell.C_i, "cell.C_i");
    positive(spec.cell.C_J, "cell.C_J");
    if (spec.cell.C_J > 0.0 && spec.cell.C_g > 0.0 && !(spec.cell.C_J < spec.cell.C_g)) {
        v.push_back({"cell.C_J", "must be smaller than C_g"});
    }
    if (spec.n_cells < 1) {
        v.push_back({"n_cells", "must be at least 1"});
    }
    if (!(spec.disorder_halfwidth >= 0.0 && spec.disorder_halfwidth < 0.5)) {
        v.push_back({"disorder_halfwidth", "must lie in [0, 0.5)"});
    }
    for (std::size_t i = 0; i < spec.defects.size(); ++i) {
        const int idx = spec.defects[i].cell_index;
        if (idx < 0 || idx >= spec.n_cells) {
            std::ostringstream msg;
            msg << "cell index " << idx << " out of range [0, " << spec.n_cells << ")";
            v.push_back({"defects[" + std::to_string(i) + "].cell_index", msg.str()});
        }
    }
    auto& defects = result.spec.defects;
    std::stable_sort(defects.begin(), defects.end(),
                     [](const Defect& a, const Defect& b) { return a.cell_index < b.cell_index; });
    for (std::size_t i = 1; i < defects.size(); ++i) {
        if (defects[i].cell_index == defects[i - 1].cell_index) {
            v.push_back({"defects", "duplicate defect on cell " + std::to_string(defects[i].cell_index)});
        }
    }
    return result;
}

LineSpec checked(const LineSpec& spec) {
    auto result = validate(spec);
    if (!result.ok()) {
        std::ostringstream msg;
        msg << "invalid line spec:";
        for (const auto& violation : result.violations) {
            msg << " [" << violation.path << ": " << violation.message << "]";
        }
        throw Error(ErrorKind::InvalidSpec, msg.str());
    }
    return result.spec;
}

namespace presets {

CellParams design_cell() {
    return CellParams::from_plasma_frequency(0.94 * kNano, 0.13 * kPico, 0.57 * kPico,
                                             ghz_to_rad(kDefaultPlasmaGHz));
}

CellParams fitted_cell() {
    return CellParams::from_velocities(0.94 * kNano, 93.6, 30.15, ghz_to_rad(kDefaultPlasmaGHz));
}

LineSpec fitted_device_with_defect() {
    LineSpec spec;
    spec.cell = fitted_cell();
    spec.n_cells = kDeviceCells;
    spec.defects = {Defect{kDefectCell, DefectKind::OpenJunction}};
    return spec;
}

LineSpec uniform_line(const CellParams& cell, int n_cells) {
    LineSpec spec;
    spec.cell = cell;
    spec.n_cells = n_cells;
    return spec;
}

}  // namespace presets

}  // namespace ctwpc
