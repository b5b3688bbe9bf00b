#pragma once

#include <complex>
#include <string>
#include <vector>

namespace ctwpc {

/// One S-parameter trace on a uniform ascending grid.
struct FrequencySweep {
    std::vector<double> freq_hz;
    std::vector<std::complex<double>> s;
};

enum class WindowKind { None, Kaiser, Hann };

struct Window {
    WindowKind kind = WindowKind::Kaiser;
    double beta = 6.0;  // Kaiser only

    [[nodiscard]] std::string describe() const;
    [[nodiscard]] std::vector<double> weights(std::size_t n) const;
};

/// Parses "none", "hann", "kaiser" or "kaiser:<beta>". Throws Config on anything else.
Window parse_window(const std::string& text);

struct ImpulseResponse {
    std::vector<double> t_ns;
    std::vector<std::complex<double>> amplitude;
    double resolution_ns = 0.0;  // 1.2 / bandwidth
    Window window;
    double df_hz = 0.0;
    double weight_sum = 0.0;     // sum of window weights, the unit-peak normalization
};

/// Windowed, zero-padded inverse DFT of band-limited data (no DC mirroring).
/// A flat |S| = 1 sweep gives a unit peak. Throws NonUniformGrid.
ImpulseResponse impulse_response(const FrequencySweep& sweep, const Window& window = {}, int pad_factor = 8);

struct Peak {
    std::size_t index = 0;
    double t_ns = 0.0;        // parabolic interpolation around the sample maximum
    double magnitude = 0.0;
};

/// Local maxima of |h| above median + 6 MAD, strongest first.
std::vector<Peak> find_peaks(const ImpulseResponse& impulse);
double peak_threshold(const ImpulseResponse& impulse);

struct DefectLocation {
    double cell = 0.0;
    double uncertainty = 0.0;  // cells
    Peak peak;
    double velocity = 0.0;     // cell/ns
};

/// Converts the dominant reflection to a position: cell = v (t - t_offset) / 2.
/// Throws NoPeakAboveThreshold.
DefectLocation locate_defect(const ImpulseResponse& impulse, double velocity_cell_per_ns, double t_offset_ns = 0.0);

}  // namespace ctwpc
