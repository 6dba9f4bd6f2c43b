#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbft/sim.hpp"

namespace cbft {

struct MetricsRow {
    Protocol protocol = Protocol::CHS;
    double alpha = 0.0;
    Metric metric = Metric::Growth;
    // theory, simulation, baseline-silent or no-attack
    std::string method;
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::optional<std::uint64_t> seed;
    double k = 5.0;
};

MetricsRow theory_row(Protocol p, double alpha, Metric m, std::string method, double value, double k);
MetricsRow simulation_row(Protocol p, double alpha, Metric m, const MetricStats& st, std::uint64_t seed,
                          double k);

inline constexpr const char* kCsvHeader = "protocol,alpha,metric,method,value,ci_low,ci_high,seed,k";

void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows);

// Inclusive grid start:step:end; the end point is kept despite rounding drift.
std::vector<double> parse_grid(const std::string& spec);

} // namespace cbft
