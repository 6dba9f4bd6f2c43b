#include <gtest/gtest.h>

#include <sstream>

#include "cbft/report.hpp"

using namespace cbft;

TEST(Csv, HeaderAndRows)
{
    std::vector<MetricsRow> rows;
    rows.push_back(theory_row(Protocol::TCHS, 0.03, Metric::Rate, "theory", 1.0 / 7.0, 5));
    MetricStats st{0.25, 0.01, 0.004, 0.24, 0.26};
    rows.push_back(simulation_row(Protocol::STREAMLET, 0.3, Metric::Growth, st, 42, 5));
    std::ostringstream os;
    write_csv(os, rows);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, kCsvHeader);
    std::getline(is, line);
    EXPECT_EQ(line, "2chs,0.03,rate,theory,0.14285714285714285,0.14285714285714285,0.14285714285714285,,5");
    std::getline(is, line);
    EXPECT_EQ(line, "streamlet,0.3,growth,simulation,0.25,0.23999999999999999,0.26000000000000001,42,5");
}

TEST(Grid, ParsesInclusiveRange)
{
    auto g = parse_grid("0:0.03:0.33");
    ASSERT_EQ(g.size(), 12u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g[10], 0.3);
    EXPECT_EQ(g.back(), 0.33);
    EXPECT_EQ(parse_grid("0.1:1:0.1"), std::vector<double>{0.1});
    EXPECT_THROW(parse_grid("0:0.1"), std::invalid_argument);
    EXPECT_THROW(parse_grid("0:0:1"), std::invalid_argument);
    EXPECT_THROW(parse_grid("0.3:0.1:0.1"), std::invalid_argument);
    EXPECT_ANY_THROW(parse_grid("a:b:c"));
}
