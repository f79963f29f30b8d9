#pragma once

#include "pskqkd/types.hpp"

#include <cstdint>
#include <vector>

namespace pskqkd {

enum class McPostselection { off, direct_psa };

struct SimulationConfig {
    ProtocolParams params;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    McPostselection postselection = McPostselection::off;
};

struct SimulationReport {
    std::uint64_t samples = 0;
    int letters = 0;
    // Joint (sent, decoded) counts over all samples, row-major; row k-1, column l-1.
    std::vector<std::uint64_t> confusion;
    double symbol_error_rate = 0.0;
    double empirical_iab = 0.0; // log2 N - H(k|l), plug-in from the confusion matrix
    double iab_standard_error = 0.0;
    std::uint64_t accepted = 0; // samples whose beta falls in the acceptance region
    double accepted_fraction = 1.0;
};

// Runs the full chain: uniform letter, channel split, heterodyne noise, nearest-letter
// decoding, optional acceptance test I_AB(beta) >= I_AE. Sampling is organized in
// fixed 65536-sample batches; batch b uses an mt19937_64 engine seeded with
// splitmix64(seed + b), and each sample consumes, in order, one (rejection-corrected)
// 64-bit draw for the letter and two for the Box-Muller noise pair. Identical configs
// therefore reproduce identical reports on any platform and thread count.
SimulationReport simulate(const SimulationConfig& config);

// log2 N - H(k|l) from the report's confusion matrix (0 log 0 = 0).
double empirical_confusion_entropy(const SimulationReport& report);

// Analytic decoded-channel statistics for cross-checking the simulation: q[d] is the
// probability that the decoded letter is offset d = (l - k) mod N from the sent one,
// computed by 1D angular quadrature of the closed-form radial Gaussian integral.
std::vector<double> decoded_channel_distribution(const ProtocolParams& params);
double decoded_channel_error(const ProtocolParams& params);       // 1 - q[0]
double decoded_channel_information(const ProtocolParams& params); // log2 N - H(q)

namespace detail {
std::uint64_t splitmix64(std::uint64_t x);
} // namespace detail

} // namespace pskqkd
