// Benchmark for the candidate-index kernel: OpenMP path vs. the serial
// reference, on the bundled RTS-scale case.
#include <chrono>
#include <cmath>
#include <iostream>
#include <string>

#include "casrisk/case_io.hpp"
#include "casrisk/risk_estimator.hpp"

int main(int argc, char** argv) {
    using namespace casrisk;
    const std::string case_path = argc > 1 ? argv[1] : "data/cases/rts96.json";
    const int rounds = argc > 2 ? std::stoi(argv[2]) : 20;

    const NetworkCase net = load_case(case_path);
    AssessmentConfig cfg;
    MatrixPool pool(net, 0);
    CascadeSimulator sim(net, cfg, pool);
    SystemState state = sim.initial_state();

    auto time_kernel = [&](bool parallel) {
        const auto start = std::chrono::steady_clock::now();
        double checksum = 0.0;
        for (int r = 0; r < rounds; ++r) {
            const CandidateSet cs = parallel
                                        ? compute_candidate_indices(sim, state, 1.0, true)
                                        : compute_candidate_indices_serial(sim, state, 1.0);
            for (const auto& ix : cs.index) checksum += ix.rho;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return std::pair<double, double>{secs, checksum};
    };

    const auto [serial_s, serial_sum] = time_kernel(false);
    const auto [parallel_s, parallel_sum] = time_kernel(true);

    std::cout << "case=" << case_path << " rounds=" << rounds << "\n"
              << "serial:   " << serial_s << " s\n"
              << "parallel: " << parallel_s << " s  (speedup "
              << (parallel_s > 0 ? serial_s / parallel_s : 0.0) << "x)\n"
              << "checksum match: " << (std::abs(serial_sum - parallel_sum) == 0.0 ? "yes" : "NO")
              << "\n";
    return std::abs(serial_sum - parallel_sum) == 0.0 ? 0 : 1;
}
