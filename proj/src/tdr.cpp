#include "ctwpc/tdr.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ctwpc/errors.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

std::string Window::describe() const {
    switch (kind) {
        case WindowKind::None: return "none";
        case WindowKind::Hann: return "hann";
        case WindowKind::Kaiser: {
            std::ostringstream s;
            s << "kaiser:" << beta;
            return s.str();
        }
    }
    return "?";
}

std::vector<double> Window::weights(std::size_t n) const {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;  // [-1, 1]
        switch (kind) {
            case WindowKind::None: break;
            case WindowKind::Hann: w[i] = 0.5 * (1.0 + std::cos(kPi * x)); break;
            case WindowKind::Kaiser:
                w[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - x * x))) /
                       std::cyl_bessel_i(0.0, beta);
                break;
        }
    }
    return w;
}

Window parse_window(const std::string& text) {
    if (text == "none") return {WindowKind::None, 0.0};
    if (text == "hann") return {WindowKind::Hann, 0.0};
    if (text == "kaiser") return {WindowKind::Kaiser, 6.0};
    if (text.rfind("kaiser:", 0) == 0) {
        try {
            std::size_t used = 0;
            const double beta = std::stod(text.substr(7), &used);
            if (used == text.size() - 7 && beta >= 0.0) return {WindowKind::Kaiser, beta};
        } catch (const std::exception&) {
        }
    }
    throw Error(ErrorKind::Config, "unknown window '" + text + "' (none, hann, kaiser, kaiser:<beta>)");
}

ImpulseResponse impulse_response(const FrequencySweep& sweep, const Window& window, int pad_factor) {
    const std::size_t n = sweep.freq_hz.size();
    if (n != sweep.s.size()) throw Error(ErrorKind::InvalidSpec, "sweep frequency and data lengths differ");
    if (n < 16) throw Error(ErrorKind::InvalidSpec, "a sweep needs at least 16 points");
    const double df = (sweep.freq_hz.back() - sweep.freq_hz.front()) / static_cast<double>(n - 1);
    if (!(df > 0.0)) throw Error(ErrorKind::NonUniformGrid, "frequency grid must be ascending");
    for (std::size_t i = 1; i < n; ++i) {
        const double step = sweep.freq_hz[i] - sweep.freq_hz[i - 1];
        if (std::fabs(step - df) > 1e-6 * df) {
            std::ostringstream msg;
            msg << "frequency step " << step << " Hz at index " << i << " differs from the mean step " << df << " Hz";
            throw Error(ErrorKind::NonUniformGrid, msg.str());
        }
    }

    std::size_t nfft = 1;
    while (nfft < n * static_cast<std::size_t>(std::max(pad_factor, 1))) nfft <<= 1;

    const auto w = window.weights(n);
    double wsum = 0.0;
    for (double v : w) wsum += v;

    auto* buf = fftw_alloc_complex(nfft);
    for (std::size_t i = 0; i < nfft; ++i) buf[i][0] = buf[i][1] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = w[i] * sweep.s[i].real();
        buf[i][1] = w[i] * sweep.s[i].imag();
    }
    // FFTW plan creation is not thread-safe; ESTIMATE plans are cheap enough to build per call.
    static std::mutex plan_mutex;
    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(nfft), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);

    ImpulseResponse out;
    out.window = window;
    out.df_hz = df;
    out.weight_sum = wsum;
    out.resolution_ns = 1.2 / ((sweep.freq_hz.back() - sweep.freq_hz.front()) * kNano);
    out.t_ns.resize(nfft);
    out.amplitude.resize(nfft);
    const double f0 = sweep.freq_hz.front();
    for (std::size_t m = 0; m < nfft; ++m) {
        const double t = static_cast<double>(m) / (static_cast<double>(nfft) * df);
        // Restores the carrier of the first frequency bin so phases refer to absolute frequency.
        const std::complex<double> carrier = std::polar(1.0, kTwoPi * std::fmod(f0 * t, 1.0));
        out.t_ns[m] = t / kNano;
        out.amplitude[m] = carrier * std::complex<double>(buf[m][0], buf[m][1]) / wsum;
    }
    {
        std::lock_guard lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return out;
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

}  // namespace

double peak_threshold(const ImpulseResponse& impulse) {
    std::vector<double> mag(impulse.amplitude.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(impulse.amplitude[i]);
    const double med = median(mag);
    for (double& m : mag) m = std::fabs(m - med);
    return med + 6.0 * median(mag);
}

std::vector<Peak> find_peaks(const ImpulseResponse& impulse) {
    const std::size_t n = impulse.amplitude.size();
    std::vector<Peak> peaks;
    if (n < 3) return peaks;
    const double threshold = peak_threshold(impulse);
    const double dt = impulse.t_ns.size() > 1 ? impulse.t_ns[1] - impulse.t_ns[0] : 0.0;
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(impulse.amplitude[i]);
    // The record is periodic in time, so neighbours wrap around.
    for (std::size_t i = 0; i < n; ++i) {
        const double l = mag[(i + n - 1) % n], c = mag[i], r = mag[(i + 1) % n];
        if (!(c > threshold) || c < l || c <= r) continue;
        Peak p;
        p.index = i;
        p.magnitude = c;
        const double denom = l - 2.0 * c + r;
        const double shift = denom != 0.0 ? 0.5 * (l - r) / denom : 0.0;
        p.t_ns = impulse.t_ns[i] + shift * dt;
        peaks.push_back(p);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    return peaks;
}

DefectLocation locate_defect(const ImpulseResponse& impulse, double velocity, double t_offset_ns) {
    const auto peaks = find_peaks(impulse);
    if (peaks.empty()) throw Error(ErrorKind::NoPeakAboveThreshold, "no reflection above median + 6 MAD");
    DefectLocation loc;
    loc.peak = peaks.front();
    loc.velocity = velocity;
    loc.cell = velocity * (loc.peak.t_ns - t_offset_ns) / 2.0;
    loc.uncertainty = velocity * impulse.resolution_ns / 2.0;
    return loc;
}

}  // namespace ctwpc
