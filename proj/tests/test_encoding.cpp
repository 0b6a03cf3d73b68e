#include <doctest.h>

#include "foe/encoding.hpp"
#include "support/fixtures.hpp"

using namespace foe;
using namespace fixtures;

namespace {

std::vector<TrainingPrefixes> full_view(const std::vector<Trace>& traces) {
    std::vector<TrainingPrefixes> view;
    for (const Trace& t : traces)
        if (t.events.size() >= 3) view.push_back({&t, t.events.size() - 1});
    return view;
}

}  // namespace

TEST_CASE("one-hot fitting and width") {
    Trace t = tr("t", {
                          ev({{"act", T("B")}}),
                          ev({{"act", T("A")}}),
                          ev({{"act", T("B")}}),
                          ev({{"act", T("A")}}),
                      });
    std::vector<Trace> traces = {t};
    FittedEncoder enc = fit_encoders({EncoderConfig::one_hot({"act"}, 2)}, full_view(traces));

    // one attribute with values {A, B} over 2 positions -> width 4
    CHECK(enc.width() == 4);
    // vocabulary sorted even though B was observed first
    CHECK(enc.feature_names() ==
          std::vector<std::string>{"act@-1=A", "act@-1=B", "act@-0=A", "act@-0=B"});

    std::vector<double> x = enc.encode(t, 3);
    // prefix [B, A, B]: position -1 holds A, position -0 holds B
    CHECK(x == std::vector<double>{1, 0, 0, 1});
}

TEST_CASE("short prefixes are left-padded with zero blocks") {
    Trace t = tr("t", {ev({{"act", T("A")}}), ev({{"act", T("B")}}), ev({{"act", T("A")}})});
    std::vector<Trace> traces = {t};
    FittedEncoder enc = fit_encoders({EncoderConfig::one_hot({"act"}, 3)}, full_view(traces));
    REQUIRE(enc.width() == 6);

    std::vector<double> x = enc.encode(t, 1);
    // only the final block may be non-zero for a length-1 prefix
    CHECK(x == std::vector<double>{0, 0, 0, 0, 1, 0});
}

TEST_CASE("unseen values encode as all-zero blocks") {
    Trace train = tr("train", {ev({{"act", T("A")}}), ev({{"act", T("B")}}), ev({{"act", T("A")}})});
    std::vector<Trace> traces = {train};
    FittedEncoder enc = fit_encoders({EncoderConfig::one_hot({"act"}, 1)}, full_view(traces));

    Trace test = tr("test", {ev({{"act", T("C")}})});
    CHECK(enc.encode(test, 1) == std::vector<double>{0, 0});

    Trace missing = tr("m", {ev({})});
    CHECK(enc.encode(missing, 1) == std::vector<double>{0, 0});
}

TEST_CASE("one-hot blocks have at most a single 1") {
    Trace t = rich_trace();
    std::vector<Trace> traces = {t};
    FittedEncoder enc = fit_encoders(
        {EncoderConfig::one_hot({"concept:name", "org:resource", "org:group"}, 4)},
        full_view(traces));
    for (std::size_t k = 1; k <= t.events.size(); ++k) {
        std::vector<double> x = enc.encode(t, k);
        REQUIRE(x.size() == enc.width());
        for (double v : x) CHECK((v == 0.0 || v == 1.0));
    }
}

TEST_CASE("numeric encoding and undefined-to-zero") {
    Trace t = tr("t", {ev({{"cost", N(1.5)}}), ev({}), ev({{"cost", N(2.5)}}), ev({})});
    std::vector<Trace> traces = {t};
    FittedEncoder enc = fit_encoders({EncoderConfig::numeric({"cost"}, 2)}, full_view(traces));
    CHECK(enc.feature_names() == std::vector<std::string>{"cost@-1", "cost@-0"});
    CHECK(enc.encode(t, 3) == std::vector<double>{0.0, 2.5});
    CHECK(enc.encode(t, 1) == std::vector<double>{0.0, 1.5});
}

TEST_CASE("time deltas") {
    Trace t = tr("t", {ev({{"time:timestamp", TS(0)}}), ev({{"time:timestamp", TS(1000)}}),
                       ev({{"time:timestamp", TS(4000)}})});
    std::vector<Trace> traces = {t};
    FittedEncoder enc = fit_encoders({EncoderConfig::time_deltas(2)}, full_view(traces));
    CHECK(enc.feature_names() == std::vector<std::string>{"dt@-1", "dt@-0"});
    // oracle: timestamps 0,1000,4000 -> deltas 1000 and 3000
    CHECK(enc.encode(t, 3) == std::vector<double>{1000.0, 3000.0});
    // the first event has no predecessor
    CHECK(enc.encode(t, 2) == std::vector<double>{0.0, 1000.0});
    CHECK(enc.encode(t, 1) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("composite pipelines concatenate member outputs in order") {
    Trace t = tr("t", {ev({{"act", T("A")}, {"cost", N(7)}, {"time:timestamp", TS(0)}}),
                       ev({{"act", T("B")}, {"cost", N(9)}, {"time:timestamp", TS(500)}}),
                       ev({{"act", T("A")}, {"cost", N(1)}, {"time:timestamp", TS(900)}})});
    std::vector<Trace> traces = {t};
    FittedEncoder combined = fit_encoders({EncoderConfig::one_hot({"act"}, 1),
                                           EncoderConfig::numeric({"cost"}, 1),
                                           EncoderConfig::time_deltas(1)},
                                          full_view(traces));
    FittedEncoder onehot = fit_encoders({EncoderConfig::one_hot({"act"}, 1)}, full_view(traces));
    FittedEncoder numeric = fit_encoders({EncoderConfig::numeric({"cost"}, 1)}, full_view(traces));
    FittedEncoder deltas = fit_encoders({EncoderConfig::time_deltas(1)}, full_view(traces));

    std::vector<double> x = combined.encode(t, 2);
    std::vector<double> expected = onehot.encode(t, 2);
    for (double v : numeric.encode(t, 2)) expected.push_back(v);
    for (double v : deltas.encode(t, 2)) expected.push_back(v);
    CHECK(x == expected);
}

TEST_CASE("n defaults to the maximal training trace length") {
    Trace a = tr("a", {ev({{"act", T("A")}}), ev({{"act", T("A")}}), ev({{"act", T("A")}})});
    Trace b = tr("b", {ev({{"act", T("B")}}), ev({{"act", T("B")}}), ev({{"act", T("B")}}),
                       ev({{"act", T("B")}}), ev({{"act", T("B")}})});
    std::vector<Trace> traces = {a, b};
    FittedEncoder enc = fit_encoders({EncoderConfig::one_hot({"act"})}, full_view(traces));
    // n = 5 positions x 2 vocabulary entries
    CHECK(enc.width() == 10);
}

TEST_CASE("vocabulary sees only training prefixes") {
    // the last event's value never occurs in any training prefix (k < |t|)
    Trace t = tr("t", {ev({{"act", T("A")}}), ev({{"act", T("A")}}), ev({{"act", T("Z")}})});
    std::vector<Trace> traces = {t};
    FittedEncoder enc = fit_encoders({EncoderConfig::one_hot({"act"}, 1)}, full_view(traces));
    CHECK(enc.feature_names() == std::vector<std::string>{"act@-0=A"});
}

TEST_CASE("attribute sets with spaces and namespaces configure cleanly") {
    // the richer of the two incident-log encodings selects these ten
    std::vector<std::string> attrs = {"concept:name",       "org:resource",
                                      "org:group",          "lifecycle:transition",
                                      "organization involved", "impact",
                                      "product",            "resource country",
                                      "organization country",  "org:role"};
    Trace t = tr("t", {ev({{"concept:name", T("Accepted")},
                           {"org:group", T("G97")},
                           {"organization involved", T("Org line A2")},
                           {"resource country", T("se")}}),
                       ev({{"concept:name", T("Queued")}, {"impact", T("Medium")}}),
                       ev({{"concept:name", T("Completed")}, {"org:role", T("A2_1")}})});
    std::vector<Trace> traces = {t};
    std::vector<TrainingPrefixes> view = {{&traces[0], 2}};
    FittedEncoder enc = fit_encoders({EncoderConfig::one_hot(attrs, 2)}, view);
    // vocabulary from the first two events only; one feature per (position, value)
    CHECK(enc.width() == 2 * 6);
    bool found = false;
    for (const std::string& name : enc.feature_names())
        if (name == "organization involved@-0=Org line A2") found = true;
    CHECK(found);
    CHECK(enc.encode(t, 3).size() == enc.width());
}

TEST_CASE("empty training set is an error") {
    std::vector<TrainingPrefixes> empty;
    CHECK_THROWS_AS(fit_encoders({EncoderConfig::one_hot({"act"}, 1)}, empty), EmptyTrainingSet);
}

TEST_CASE("width invariance across arbitrary prefixes") {
    Trace t = rich_trace();
    std::vector<Trace> traces = {t};
    FittedEncoder enc = fit_encoders(
        {EncoderConfig::one_hot({"concept:name", "org:resource"}), EncoderConfig::time_deltas()},
        full_view(traces));
    for (std::size_t k = 1; k <= t.events.size(); ++k)
        CHECK(enc.encode(t, k).size() == enc.width());
}
