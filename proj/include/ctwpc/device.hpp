#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctwpc {

/// Electrical parameters of one unit cell of the two-electrode line.
/// Each cell holds two junctions (one per electrode), two ground capacitors
/// and one inter-electrode capacitor. Lengths are measured in cells.
struct CellParams {
    double L_J = 0.0;  // H
    double C_g = 0.0;  // F
    double C_i = 0.0;  // F
    double C_J = 0.0;  // F

    static CellParams from_junction_capacitance(double L_J, double C_g, double C_i, double C_J);
    static CellParams from_plasma_frequency(double L_J, double C_g, double C_i, double omega_J);
    /// Builds a cell from low-frequency mode velocities (cell/ns) and a fixed L_J.
    static CellParams from_velocities(double L_J, double v_sigma0, double v_delta0, double omega_J);

    [[nodiscard]] double omega_J() const;
    [[nodiscard]] double omega_g() const;
    [[nodiscard]] double mu() const;
    /// Ground capacitance seen by the given mode: C_g for Sigma, C_g + 2 C_i for Delta.
    [[nodiscard]] double sigma_capacitance() const { return C_g; }
    [[nodiscard]] double delta_capacitance() const { return C_g + 2.0 * C_i; }
};

enum class DefectKind { OpenJunction };

struct Defect {
    int cell_index = 0;
    DefectKind kind = DefectKind::OpenJunction;
};

struct LineSpec {
    CellParams cell;
    int n_cells = 400;
    std::vector<Defect> defects;
    double disorder_halfwidth = 0.0;
    std::uint64_t seed = 0;
};

struct DerivedConstants {
    double v_sigma0 = 0.0;  // cell/ns
    double v_delta0 = 0.0;  // cell/ns
    double Z_sigma = 0.0;   // Ohm
    double Z_delta = 0.0;   // Ohm
    double omega_sigma_co = 0.0;
    double omega_delta_co = 0.0;
    double omega_g = 0.0;
    double omega_J = 0.0;
    double mu = 0.0;
};

DerivedConstants derive_constants(const CellParams& cell);

/// Per-cell junction inductances after disorder. An open junction is stored
/// as +infinity (its branch, including C_J, carries no current).
struct JunctionTable {
    std::vector<double> electrode_a;
    std::vector<double> electrode_b;

    [[nodiscard]] int n_cells() const { return static_cast<int>(electrode_a.size()); }
    [[nodiscard]] int open_count() const;
};

[[nodiscard]] bool is_open(double inductance);

JunctionTable sample_disorder(const LineSpec& spec);

struct Violation {
    std::string path;
    std::string message;
};

struct ValidationResult {
    LineSpec spec;  // normalized: defects sorted by cell index
    std::vector<Violation> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

ValidationResult validate(const LineSpec& spec);

/// Throws Error(InvalidSpec) listing every violation; returns the normalized spec.
LineSpec checked(const LineSpec& spec);

namespace presets {

/// Nominal design values: L_J = 0.94 nH, C_g = 0.13 pF, C_i = 0.57 pF, plasma 32.9 GHz.
CellParams design_cell();
/// Values fitted to the measured gap positions: v_sigma0 = 93.6, v_delta0 = 30.15 cell/ns,
/// plasma 32.9 GHz, with L_J kept at its design value.
CellParams fitted_cell();
inline constexpr double kDefaultPlasmaGHz = 32.9;
inline constexpr int kDeviceCells = 400;
inline constexpr int kDefectCell = 165;
/// The fitted cell, 400 cells, open junction on cell 165.
LineSpec fitted_device_with_defect();
LineSpec uniform_line(const CellParams& cell, int n_cells = kDeviceCells);

}  // namespace presets

}  // namespace ctwpc
