#include <doctest.h>

#include <sstream>

#include "tcmdw/csv.hpp"
#include "tcmdw/digest.hpp"
#include "tcmdw/errors.hpp"
#include "tcmdw/rng.hpp"
#include "tcmdw/value.hpp"

using namespace tcmdw;

TEST_CASE("sha256 matches the FIPS test vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("splitmix64 matches the reference stream") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
    CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("splitmix64 uniform stays inside its band") {
    SplitMix64 rng(42);
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.uniform(0.9, 1.1);
        CHECK(x >= 0.9);
        CHECK(x < 1.1);
    }
}

TEST_CASE("calendar helpers") {
    CHECK(valid_yyyymmdd(20100315));
    CHECK(valid_yyyymmdd(20120229));   // leap year
    CHECK(!valid_yyyymmdd(20110229));  // not a leap year
    CHECK(!valid_yyyymmdd(20101315));
    CHECK(!valid_yyyymmdd(20100100));
    CHECK(month_of(20100315) == 201003);
    CHECK(year_of(20100315) == 2010);
    CHECK(quarter_of(20100315) == "2010Q1");
    CHECK(quarter_of(20101001) == "2010Q4");
    CHECK(yyyymmdd_to_iso(20100315) == "2010-03-15");
}

TEST_CASE("average renders the exact rational, half-up at six decimals") {
    CHECK(render_average(9000, 1) == "9000.000000");
    CHECK(render_average(1, 3) == "0.333333");
    CHECK(render_average(2, 3) == "0.666667");
    CHECK(render_average(5, 2) == "2.500000");
    CHECK(render_average(1, 2000000) == "0.000001");  // 5e-7 rounds up
}

TEST_CASE("percent difference renders half-up at two decimals") {
    CHECK(render_percent_diff(115, 1, 100, 1) == "15.00");
    CHECK(render_percent_diff(95, 1, 100, 1) == "-5.00");
    CHECK(render_percent_diff(1, 3, 1, 3) == "0.00");
    CHECK(render_percent_diff(10025, 100, 100, 1) == "0.25");
}

TEST_CASE("canonical rendering by kind") {
    CHECK(canonical(Value(std::string("Ge Gen Tang"))) == "Ge Gen Tang");
    CHECK(canonical(Value(std::int64_t(20100315))) == "20100315");
    CHECK(canonical(Value(2.5)) == "2.5");
    CHECK(std::get<std::int64_t>(parse_value(ValueKind::Date, "20100315")) == 20100315);
    CHECK_THROWS_AS(parse_value(ValueKind::Date, "20101315"), Error);
    CHECK_THROWS_AS(parse_value(ValueKind::Integer, "12x"), Error);
}

TEST_CASE("csv round-trips randomized records") {
    SplitMix64 rng(7);
    const std::string alphabet = "ab,\"\n\r x";
    for (int round = 0; round < 200; ++round) {
        std::vector<std::string> record;
        const auto fields = 1 + rng.below(5);
        for (std::uint64_t f = 0; f < fields; ++f) {
            std::string field;
            const auto len = rng.below(8);
            for (std::uint64_t c = 0; c < len; ++c) field.push_back(alphabet[rng.below(alphabet.size())]);
            record.push_back(std::move(field));
        }
        std::istringstream in(csv_join(record) + "\n");
        CsvReader reader(in);
        auto parsed = reader.next();
        REQUIRE(parsed.has_value());
        CHECK(*parsed == record);
    }
}

TEST_CASE("csv reader handles quoted separators and CRLF") {
    std::istringstream in("a,\"b,c\",\"d\"\"e\"\r\nf,\"g\nh\",i\n");
    CsvReader reader(in);
    auto first = reader.next();
    REQUIRE(first.has_value());
    CHECK(*first == std::vector<std::string>{"a", "b,c", "d\"e"});
    auto second = reader.next();
    REQUIRE(second.has_value());
    CHECK(*second == std::vector<std::string>{"f", "g\nh", "i"});
    CHECK(!reader.next().has_value());
}
