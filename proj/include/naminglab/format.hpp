#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

namespace naminglab {

// Fixed-point rendering with round-half-up on the decimal value, so 56.666665 -> "56.6667"
// and 1.965 -> "1.97" even though neither is exact in binary.
inline std::string format_fixed(double value, int decimals) {
    const bool negative = value < 0.0;
    long double scale = 1.0L;
    for (int i = 0; i < decimals; ++i) scale *= 10.0L;
    const long double scaled = std::fabs(static_cast<long double>(value)) * scale;
    const auto units = static_cast<std::uint64_t>(std::floor(scaled + 0.5L + 1e-9L));
    const std::uint64_t whole = units / static_cast<std::uint64_t>(scale);
    std::string out = (negative && units != 0 ? "-" : "") + std::to_string(whole);
    if (decimals > 0) {
        std::string frac = std::to_string(units % static_cast<std::uint64_t>(scale));
        out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
    }
    return out;
}

enum class StdMode { population, sample };

struct Aggregate {
    std::size_t count = 0;
    double min = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    double max = 0.0;
};

// Two-pass min/mean/std/max. Population std divides by N, sample std by N - 1.
inline Aggregate aggregate(std::span<const double> values, StdMode mode = StdMode::population) {
    Aggregate a;
    a.count = values.size();
    if (values.empty()) return a;
    a.min = *std::min_element(values.begin(), values.end());
    a.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    const std::size_t denom = mode == StdMode::population ? values.size() : values.size() - 1;
    a.stddev = denom == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(denom));
    return a;
}

} // namespace naminglab
