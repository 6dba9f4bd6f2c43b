#include "cbft/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "cbft/strategy.hpp"

namespace cbft {

MetricsRow theory_row(Protocol p, double alpha, Metric m, std::string method, double value, double k)
{
    return MetricsRow{p, alpha, m, std::move(method), value, value, value, std::nullopt, k};
}

MetricsRow simulation_row(Protocol p, double alpha, Metric m, const MetricStats& st, std::uint64_t seed,
                          double k)
{
    return MetricsRow{p, alpha, m, "simulation", st.mean, st.ci_low, st.ci_high, seed, k};
}

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows)
{
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << to_string(r.protocol) << ',' << format_double(r.alpha) << ',' << to_string(r.metric) << ',' << r.method
           << ',' << num(r.value) << ',' << num(r.ci_low) << ',' << num(r.ci_high) << ',';
        if (r.seed) os << *r.seed;
        os << ',' << format_double(r.k) << '\n';
    }
}

std::vector<double> parse_grid(const std::string& spec)
{
    const auto a = spec.find(':');
    const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw std::invalid_argument("grid must be start:step:end");
    const double start = parse_double(spec.substr(0, a));
    const double step = parse_double(spec.substr(a + 1, b - a - 1));
    const double end = parse_double(spec.substr(b + 1));
    if (!(step > 0.0) || end < start) throw std::invalid_argument("grid needs step > 0 and end >= start");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((end - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        // Round to 12 decimals so 0.03 * 11 prints as 0.33.
        out.push_back(std::round((start + i * step) * 1e12) / 1e12);
    }
    return out;
}

} // namespace cbft
