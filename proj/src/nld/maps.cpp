#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "ctwpc/errors.hpp"
#include "ctwpc/nld.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc {

namespace {

double to_db(std::complex<double> s) { return 20.0 * std::log10(std::abs(s)); }

void fill_row(const ChainNetwork& net, const std::vector<double>& probe_ghz, const MapOptions& options,
              double f_pump, std::vector<double>& fw, std::vector<double>& bw, bool& converged) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    fw.assign(probe_ghz.size(), nan);
    bw.assign(probe_ghz.size(), nan);
    PumpSolution pump;
    try {
        const double omega_p = ghz_to_rad(f_pump);
        const auto drives = options.drives_at ? options.drives_at(omega_p) : options.drives_template;
        pump = pump_harmonic_balance(net, omega_p, drives, options.basis, options.pump);
    } catch (const NonConvergence&) {
        converged = false;
        return;
    }
    converged = true;
    for (std::size_t i = 0; i < probe_ghz.size(); ++i) {
        const auto sc = signal_sidebands(net, pump, ghz_to_rad(probe_ghz[i]), options.n_sidebands);
        fw[i] = to_db(sc.at(SigmaRight, SigmaLeft));
        bw[i] = to_db(sc.at(SigmaLeft, SigmaRight));
    }
}

}  // namespace

TransmissionMap transmission_map(const ChainNetwork& net, const std::vector<double>& pump_ghz,
                                 const std::vector<double>& probe_ghz, const MapOptions& options) {
    TransmissionMap map;
    map.pump_ghz = pump_ghz;
    map.probe_ghz = probe_ghz;
    const std::size_t n = pump_ghz.size();
    map.forward_db.resize(n);
    map.backward_db.resize(n);
    std::vector<char> converged(n, 0);

    // Rows are independent; workers pull row indices so the output order never depends on scheduling.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                bool ok = false;
                fill_row(net, probe_ghz, options, pump_ghz[i], map.forward_db[i], map.backward_db[i], ok);
                converged[i] = ok;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    map.pump_converged.assign(converged.begin(), converged.end());
    return map;
}

}  // namespace ctwpc
