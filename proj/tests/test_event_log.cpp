#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "foe/csv_log.hpp"
#include "foe/time_util.hpp"
#include "foe/xes.hpp"
#include "support/fixtures.hpp"

using namespace foe;
using namespace fixtures;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("/tmp/foe_test_" + name) {
        std::ofstream f(path, std::ios::binary);
        f << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("iso8601 parsing") {
    CHECK(parse_iso8601_ms("1970-01-01T00:00:00.000+00:00") == 0);
    CHECK(parse_iso8601_ms("1970-01-01T00:00:01Z") == 1000);
    CHECK(parse_iso8601_ms("1970-01-01T01:00:00+01:00") == 0);
    CHECK(parse_iso8601_ms("1970-01-01T00:00:00.123Z") == 123);
    // sub-millisecond digits truncate
    CHECK(parse_iso8601_ms("1970-01-01T00:00:00.123999Z") == 123);
    CHECK(parse_iso8601_ms("2013-04-05T00:00:00Z") == 1365120000000LL);
    CHECK(parse_iso8601_ms("1969-12-31T23:59:59Z") == -1000);
    CHECK_THROWS_AS(parse_iso8601_ms("not a date"), FormatError);
    CHECK_THROWS_AS(parse_iso8601_ms("1970-13-01T00:00:00Z"), FormatError);

    // format/parse round-trip
    for (std::int64_t ms : {0LL, 123LL, 1365120000123LL, -86400000LL})
        CHECK(parse_iso8601_ms(format_iso8601_ms(ms)) == ms);
}

TEST_CASE("attribute accessor is total") {
    Trace t = tr("t1", {
                           ev({{"org:resource", T("Alice")}}),
                           ev({}),
                           ev({{"org:resource", T("Bob")}}),
                           ev({}),
                           ev({}),
                       });
    CHECK(attribute(t, 3, "org:resource") == T("Bob"));
    CHECK(attribute(t, 3, "org:group").is_undefined());
    CHECK(attribute(t, 6, "concept:name").is_undefined());
    CHECK(attribute(t, 0, "org:resource").is_undefined());
    CHECK(attribute(t, -2, "org:resource").is_undefined());
}

TEST_CASE("load_xes basics") {
    TempFile file("basic.xes", R"(<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1849-2016">
  <extension name="Concept" prefix="concept" uri="http://..."/>
  <trace>
    <string key="concept:name" value="case-1"/>
    <event>
      <string key="concept:name" value="A"/>
      <date key="time:timestamp" value="1970-01-01T00:00:00.000+00:00"/>
      <int key="n" value="5"/>
    </event>
    <event>
      <string key="concept:name" value="B"/>
      <float key="cost" value="3.25"/>
      <boolean key="ok" value="true"/>
    </event>
    <event>
      <string key="concept:name" value="C"/>
    </event>
  </trace>
</log>)");
    EventLog log = load_xes(file.path);
    REQUIRE(log.size() == 1);
    const Trace& t = log[0];
    CHECK(t.id == "case-1");
    REQUIRE(t.events.size() == 3);
    CHECK(attribute(t, 1, "time:timestamp") == TS(0));
    CHECK(attribute(t, 1, "n") == N(5));
    CHECK(attribute(t, 2, "cost") == N(3.25));
    CHECK(attribute(t, 2, "ok") == B(true));
    CHECK(t.events[0].ordinal == 1);
    CHECK(t.events[2].ordinal == 3);
}

TEST_CASE("load_xes error paths") {
    CHECK_THROWS_AS(load_xes("/nonexistent/file.xes"), IoError);
    TempFile bad_xml("bad.xes", "<log><trace>");
    CHECK_THROWS_AS(load_xes(bad_xml.path), FormatError);
    TempFile bad_date("bad_date.xes",
                      R"(<log><trace><event><date key="t" value="yesterday"/></event></trace></log>)");
    CHECK_THROWS_AS(load_xes(bad_date.path), FormatError);
    TempFile dup("dup.xes", R"(<log>
      <trace><string key="concept:name" value="x"/><event><string key="a" value="1"/></event></trace>
      <trace><string key="concept:name" value="x"/><event><string key="a" value="2"/></event></trace>
      </log>)");
    CHECK_THROWS_AS(load_xes(dup.path), FormatError);
}

TEST_CASE("xes round-trip preserves values bit-exactly") {
    Trace alpha = tr("alpha", {
                                  ev({{"concept:name", T("start <&> \"x\"")},
                                      {"cost", N(0.1)},
                                      {"time:timestamp", TS(1365120000123LL)}}),
                                  ev({{"flag", B(false)}, {"cost", N(12345678.9012345)}}),
                              });
    alpha.attributes["concept:name"] = T("alpha");
    Trace beta = tr("beta", {ev({{"concept:name", T("solo")}})});
    beta.attributes["concept:name"] = T("beta");
    EventLog original = log_of({std::move(alpha), std::move(beta)});

    const char* path = "/tmp/foe_roundtrip.xes";
    write_xes(original, path);
    EventLog reloaded = load_xes(path);
    std::remove(path);

    REQUIRE(reloaded.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        REQUIRE(reloaded[i].events.size() == original[i].events.size());
        CHECK(reloaded[i].id == original[i].id);
        CHECK(reloaded[i].attributes == original[i].attributes);
        for (std::size_t j = 0; j < original[i].events.size(); ++j)
            CHECK(reloaded[i].events[j].attributes == original[i].events[j].attributes);
    }
}

TEST_CASE("load_csv grouping and sorting") {
    CsvConfig config;
    config.trace_id_column = "case";
    config.timestamp_column = "ts";
    config.timestamp_format = "epoch_ms";
    config.numeric_columns = {"cost"};

    SUBCASE("two traces of two events") {
        TempFile file("two.csv",
                      "case,ts,activity,cost\n"
                      "c1,1000,A,1.5\n"
                      "c1,2000,B,2.5\n"
                      "c2,1000,A,\n"
                      "c2,3000,C,4\n");
        EventLog log = load_csv(file.path, config);
        REQUIRE(log.size() == 2);
        CHECK(log[0].id == "c1");
        CHECK(log[0].events.size() == 2);
        CHECK(log[1].events.size() == 2);
        CHECK(attribute(log[0], 1, "activity") == T("A"));
        CHECK(attribute(log[0], 1, "cost") == N(1.5));
        CHECK(attribute(log[1], 1, "cost").is_undefined());  // empty cell
        CHECK(attribute(log[0], 1, "ts") == TS(1000));
    }

    SUBCASE("rows out of timestamp order get sorted ascending") {
        TempFile file("unsorted.csv",
                      "case,ts,activity\n"
                      "c1,3000,C\n"
                      "c1,1000,A\n"
                      "c1,2000,B\n");
        EventLog log = load_csv(file.path, config);
        CHECK(attribute(log[0], 1, "activity") == T("A"));
        CHECK(attribute(log[0], 2, "activity") == T("B"));
        CHECK(attribute(log[0], 3, "activity") == T("C"));
    }

    SUBCASE("interleaved groups merge into one trace; ties keep file order") {
        // brute-force expectation for the 6-row fixture: group by id in
        // first-appearance order, stable-sort each group by timestamp
        TempFile file("interleaved.csv",
                      "case,ts,activity\n"
                      "c1,1000,A1\n"
                      "c2,1000,B1\n"
                      "c1,1000,A2\n"
                      "c2,2000,B2\n"
                      "c1,500,A0\n"
                      "c2,1500,B15\n");
        EventLog log = load_csv(file.path, config);
        REQUIRE(log.size() == 2);
        REQUIRE(log[0].events.size() == 3);
        CHECK(attribute(log[0], 1, "activity") == T("A0"));
        CHECK(attribute(log[0], 2, "activity") == T("A1"));  // tie: file order
        CHECK(attribute(log[0], 3, "activity") == T("A2"));
        CHECK(attribute(log[1], 1, "activity") == T("B1"));
        CHECK(attribute(log[1], 2, "activity") == T("B15"));
        CHECK(attribute(log[1], 3, "activity") == T("B2"));
    }

    SUBCASE("missing mapped column") {
        TempFile file("nocol.csv", "case,when\nc1,1000\n");
        CHECK_THROWS_AS(load_csv(file.path, config), FormatError);
    }

    SUBCASE("unparsable timestamp") {
        TempFile file("badts.csv", "case,ts\nc1,soon\n");
        CHECK_THROWS_AS(load_csv(file.path, config), FormatError);
    }
}

TEST_CASE("csv timestamp formats") {
    CHECK(parse_csv_timestamp("1970-01-01T00:00:01Z", "iso8601") == 1000);
    CHECK(parse_csv_timestamp("1500", "epoch_ms") == 1500);
    CHECK(parse_csv_timestamp("2", "epoch_s") == 2000);
    CHECK(parse_csv_timestamp("1970-01-02 00:00:00", "%Y-%m-%d %H:%M:%S") == 86400000);
    CHECK_THROWS_AS(parse_csv_timestamp("01/02/1970", "%Y-%m-%d %H:%M:%S"), FormatError);
}

TEST_CASE("quoted csv fields") {
    CsvConfig config;
    config.trace_id_column = "case";
    config.timestamp_column = "ts";
    config.timestamp_format = "epoch_ms";
    TempFile file("quoted.csv",
                  "case,ts,note\n"
                  "c1,1000,\"hello, \"\"world\"\"\"\n");
    EventLog log = load_csv(file.path, config);
    CHECK(attribute(log[0], 1, "note") == T("hello, \"world\""));
}
