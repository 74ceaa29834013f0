#include <gtest/gtest.h>

#include <filesystem>
#include <limits>

#include "wiener/io.hpp"

using namespace wiener;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("wiener_io_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Format, RoundTripsEveryDouble) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-300.0, 300.0));
        double y = 0.0;
        ASSERT_TRUE(io::parse_double(io::format_double(x), y));
        EXPECT_EQ(x, y);
    }
    EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
}

TEST(ParseDouble, IsStrict) {
    double v = 0.0;
    EXPECT_TRUE(io::parse_double(" 1.5e3 ", v));
    EXPECT_EQ(v, 1500.0);
    EXPECT_FALSE(io::parse_double("1.5x", v));
    EXPECT_FALSE(io::parse_double("", v));
    EXPECT_FALSE(io::parse_double("abc", v));
    EXPECT_THROW(io::parse_double_or_throw("1,2", "ctx"), IoError);
}

TEST(Csv, RoundTrip) {
    io::CsvTable t{{"d", "steps", "mse"}, {{1, 1, 0.5}, {2, 1, 1.0 / 3.0}}};
    const auto back = io::parse_csv(io::to_csv(t));
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(io::to_csv(t), "d,steps,mse\n1,1,0.5\n2,1,0.33333333333333331\n");
    EXPECT_EQ(back.column(2), (std::vector<double>{0.5, 1.0 / 3.0}));
}

TEST(Csv, HeaderlessAndComments) {
    const auto t = io::parse_csv("# comment\n1.0\n2.0\n\n3.0\n");
    EXPECT_TRUE(t.header.empty());
    EXPECT_EQ(t.column(0), (std::vector<double>{1, 2, 3}));
}

TEST(Csv, MalformedInputIsRejected) {
    EXPECT_THROW(io::parse_csv("y\n1\nfoo\n"), IoError);
    EXPECT_THROW(io::parse_csv("a,b\n1,2\n3\n"), IoError);
    EXPECT_THROW(io::parse_csv("1,2\n3\n"), IoError);
}

TEST(Csv, FilesAndSeries) {
    const auto dir = scratch("series");
    fs::create_directories(dir);
    const std::vector<double> y{0.25, -1.5, 3.0};
    io::write_csv(dir / "y.csv", io::series_table(y));
    const auto s = io::read_series(dir / "y.csv");
    EXPECT_EQ(s.values, y);
    EXPECT_EQ(s.provenance.length, 3u);
    EXPECT_THROW(io::read_text(dir / "missing.csv"), IoError);
    io::write_text(dir / "empty.csv", "y\n");
    EXPECT_THROW(io::read_series(dir / "empty.csv"), IoError);
    fs::remove_all(dir);
}

TEST(KeyValues, ParsesAndRejects) {
    const auto kv = io::parse_key_values("# c\n a = 1 \nb=x,y\n", "t");
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "x,y");
    EXPECT_THROW(io::parse_key_values("a = 1\na = 2\n", "t"), IoError);
    EXPECT_THROW(io::parse_key_values("novalue\n", "t"), IoError);
    EXPECT_THROW(io::parse_key_values(" = 3\n", "t"), IoError);
}

TEST(Model, RoundTripIsBitExact) {
    FilterModel m;
    m.coeffs = {0.1, -2.0 / 3.0, 1e-300, 12345.678};
    m.degenerate_fit = true;
    m.provenance = "some training run";
    const auto text = io::serialize_model(m);
    const auto back = io::parse_model(text);
    EXPECT_EQ(back.coeffs, m.coeffs);
    EXPECT_TRUE(back.degenerate_fit);
    EXPECT_TRUE(back.provenance.starts_with("fnv1a:"));
    // Re-serialising keeps the hash.
    EXPECT_EQ(io::serialize_model(back), text);

    const auto dir = scratch("model");
    fs::create_directories(dir);
    io::write_model(dir / "m.txt", m);
    EXPECT_EQ(io::read_model(dir / "m.txt").coeffs, m.coeffs);
    fs::remove_all(dir);
}

TEST(Model, MalformedRecordsAreRejected) {
    const std::string good = "format = wiener-filter-1\nd = 2\ncoeffs = 1,2\ndegenerate = false\nprovenance = x\n";
    EXPECT_NO_THROW(io::parse_model(good));
    auto replace = [&](const std::string& from, const std::string& to) {
        auto s = good;
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    EXPECT_THROW(io::parse_model(replace("d = 2", "d = 3")), IoError);
    EXPECT_THROW(io::parse_model(replace("wiener-filter-1", "other")), IoError);
    EXPECT_THROW(io::parse_model(replace("1,2", "1,nan")), IoError);
    EXPECT_THROW(io::parse_model(replace("1,2", "1,q")), IoError);
    EXPECT_THROW(io::parse_model(replace("false", "maybe")), IoError);
    EXPECT_THROW(io::parse_model(replace("provenance = x\n", "")), IoError);

    FilterModel empty;
    EXPECT_THROW(io::serialize_model(empty), InvalidArgument);
    FilterModel bad;
    bad.coeffs = {std::numeric_limits<double>::infinity()};
    EXPECT_THROW(io::serialize_model(bad), InvalidArgument);
}

TEST(Fnv1a, KnownVectors) {
    EXPECT_EQ(io::fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(io::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
