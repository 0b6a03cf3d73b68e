#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "foe/cli.hpp"
#include "foe/labeling.hpp"
#include "foe/parser.hpp"
#include "foe/xes.hpp"
#include "support/fixtures.hpp"

using namespace foe;
using namespace fixtures;

namespace {

struct Workspace {
    std::string dir = "/tmp/foe_cli_test";

    Workspace() {
        std::remove((dir + "/rule.foe").c_str());
        system(("mkdir -p " + dir).c_str());
    }

    std::string write(const std::string& name, const std::string& content) {
        std::string path = dir + "/" + name;
        std::ofstream f(path, std::ios::binary);
        f << content;
        return path;
    }

    std::string write_log(const std::string& name, const EventLog& log) {
        std::string path = dir + "/" + name;
        write_xes(log, path);
        return path;
    }
};

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

EventLog pingpong_log() {
    auto mk = [](const std::string& id, bool pingpong) {
        std::vector<Event> events;
        for (int j = 0; j < 5; ++j) {
            bool flip = pingpong && j == 3;
            events.push_back(ev({{"concept:name", T(pingpong ? "fast" : "slow")},
                                 {"org:resource", T(flip ? "r2" : "r1")},
                                 {"org:group", T("g")},
                                 {"time:timestamp", TS(j * 1000)}}));
        }
        Trace t = tr(id, std::move(events));
        t.attributes["concept:name"] = T(id);
        return t;
    };
    std::vector<Trace> traces;
    for (int i = 0; i < 12; ++i) traces.push_back(mk("c" + std::to_string(i), i % 2 == 0));
    return log_of(std::move(traces));
}

const char* kPingPongRule =
    "rule {\n"
    "  exists i . (i > curr and i+1 <= last\n"
    "      and e[i].org:resource != e[i+1].org:resource\n"
    "      and e[i].org:group == e[i+1].org:group) => \"Ping-Pong\";\n"
    "  default \"Not Ping-Pong\"\n"
    "}\n";

}  // namespace

TEST_CASE("validate exit codes") {
    Workspace ws;

    SUBCASE("valid rule exits 0") {
        std::string rule = ws.write("ok.foe", kPingPongRule);
        std::string out;
        CHECK(run_cli({"validate", "--rule", rule}, &out) == 0);
        CHECK(out.find("valid") != std::string::npos);
    }

    SUBCASE("parse errors exit 1") {
        std::string rule = ws.write("broken.foe", "rule { default ]]] }");
        std::string err;
        CHECK(run_cli({"validate", "--rule", rule}, nullptr, &err) == 1);
        CHECK(err.find("parse error") != std::string::npos);
    }

    SUBCASE("incoherent rules exit 2 and name both kinds") {
        std::string rule = ws.write("mixed.foe",
                                    "rule { 1 < 2 => \"Ping-Pong\"; default 0 }");
        std::string out;
        CHECK(run_cli({"validate", "--rule", rule}, &out) == 2);
        CHECK(out.find("incoherent targets") != std::string::npos);
        CHECK(out.find("numeric and non-numeric") != std::string::npos);
    }

    SUBCASE("well-definedness violations exit 3 with the (trace, k) list") {
        std::string rule = ws.write("conflict.foe", "rule { true => 1; true => 2; default 0 }");
        Trace t = tr("only", {ev({{"a", N(1)}}), ev({{"a", N(2)}})});
        t.attributes["concept:name"] = T("only");
        std::string log = ws.write_log("one.xes", log_of({t}));
        std::string out;
        CHECK(run_cli({"validate", "--rule", rule, "--log", log}, &out) == 3);
        CHECK(out.find("trace only k=1") != std::string::npos);
        CHECK(out.find("trace only k=2") != std::string::npos);
    }
}

TEST_CASE("label command writes the dataset and reports counts") {
    Workspace ws;
    std::string rule = ws.write("rt.foe",
                                "rule { curr < last => e[last].time:timestamp - "
                                "e[curr].time:timestamp; default 0 }");
    Trace t = tr("t", {ev({{"time:timestamp", TS(0)}}), ev({{"time:timestamp", TS(1000)}}),
                       ev({{"time:timestamp", TS(2000)}}), ev({{"time:timestamp", TS(3000)}}),
                       ev({{"time:timestamp", TS(4000)}})});
    t.attributes["concept:name"] = T("t");
    std::string log = ws.write_log("five.xes", log_of({t}));
    std::string out_csv = ws.dir + "/dataset.csv";

    std::string out;
    CHECK(run_cli({"label", "--rule", rule, "--log", log, "--timedeltas", "--last-n", "2",
                   "--out", out_csv},
                  &out) == 0);
    CHECK(out.find("3 rows") != std::string::npos);

    std::ifstream csv(out_csv);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(csv, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    // targets are the subtraction oracle values 3000, 2000, 1000
    CHECK(lines[1].substr(lines[1].rfind(',') + 1) == "3000");
    CHECK(lines[2].substr(lines[2].rfind(',') + 1) == "2000");
    CHECK(lines[3].substr(lines[3].rfind(',') + 1) == "1000");
}

TEST_CASE("evaluate prints a zeror row plus the configured model") {
    Workspace ws;
    std::string rule = ws.write("pp.foe", kPingPongRule);
    std::string log = ws.write_log("pp.xes", pingpong_log());
    std::string json_path = ws.dir + "/run.json";

    std::string out;
    int code = run_cli({"evaluate", "--rule", rule, "--log", log, "--model", "tree",
                        "--onehot-attrs", "concept:name", "--out", json_path},
                       &out);
    CHECK(code == 0);
    CHECK(out.find("Model\tAUC\tAccuracy\tW.Prec\tW.Rec\tF-Measure") != std::string::npos);
    CHECK(out.find("zeror\t") != std::string::npos);
    CHECK(out.find("tree\t") != std::string::npos);

    std::ifstream json_file(json_path);
    std::stringstream buffer;
    buffer << json_file.rdbuf();
    std::string doc = buffer.str();
    CHECK(doc.find("\"models\"") != std::string::npos);
    CHECK(doc.find("\"auc\"") != std::string::npos);
    CHECK(doc.find("\"accuracy\"") != std::string::npos);
}

TEST_CASE("regression evaluation reports MAE and RMSE in the chosen unit") {
    Workspace ws;
    std::string rule = ws.write("rt.foe",
                                "rule { curr < last => e[last].time:timestamp - "
                                "e[curr].time:timestamp; default 0 }");
    std::string log = ws.write_log("pp.xes", pingpong_log());
    std::string out;
    CHECK(run_cli({"evaluate", "--rule", rule, "--log", log, "--model", "tree",
                   "--timedeltas", "--unit", "days"},
                  &out) == 0);
    CHECK(out.find("MAE (in days)") != std::string::npos);
    CHECK(out.find("RMSE (in days)") != std::string::npos);
}

TEST_CASE("train then predict round-trip through the model file") {
    Workspace ws;
    std::string rule = ws.write("leak.foe",
                                "rule { e[1].leak == \"yes\" => \"yes\"; default \"no\" }");
    std::vector<Trace> traces;
    for (int i = 0; i < 10; ++i) {
        std::string klass = i % 2 == 0 ? "yes" : "no";
        Trace t = tr("t" + std::to_string(i),
                     {ev({{"leak", T(klass)}, {"time:timestamp", TS(0)}}),
                      ev({{"leak", T(klass)}, {"time:timestamp", TS(1000)}}),
                      ev({{"leak", T(klass)}, {"time:timestamp", TS(2000)}}),
                      ev({{"leak", T(klass)}, {"time:timestamp", TS(3000)}})});
        t.attributes["concept:name"] = T("t" + std::to_string(i));
        traces.push_back(std::move(t));
    }
    std::string log = ws.write_log("leak.xes", log_of(std::move(traces)));
    std::string model_path = ws.dir + "/leak.foemodel";

    std::string out;
    CHECK(run_cli({"train", "--rule", rule, "--log", log, "--model", "tree", "--onehot-attrs",
                   "leak", "--out", model_path},
                  &out) == 0);
    CHECK(out.find("trained tree") != std::string::npos);

    // the planted label comes back out
    CHECK(run_cli({"predict", "--model-file", model_path, "--log", log, "--trace", "t0", "--k",
                   "2"},
                  &out) == 0);
    CHECK(out.find("prediction: yes") != std::string::npos);
    CHECK(run_cli({"predict", "--model-file", model_path, "--log", log, "--trace", "t1", "--k",
                   "2"},
                  &out) == 0);
    CHECK(out.find("prediction: no") != std::string::npos);

    // unknown traces and out-of-range prefixes are errors, not clamps
    std::string err;
    CHECK(run_cli({"predict", "--model-file", model_path, "--log", log, "--trace", "nope",
                   "--k", "2"},
                  &out, &err) == 1);
    CHECK(err.find("unknown trace") != std::string::npos);
    CHECK(run_cli({"predict", "--model-file", model_path, "--log", log, "--trace", "t0", "--k",
                   "9"},
                  &out, &err) == 1);
    CHECK(err.find("out of range") != std::string::npos);
}

TEST_CASE("config file supplies defaults and flags win") {
    Workspace ws;
    std::string rule = ws.write("pp.foe", kPingPongRule);
    std::string log = ws.write_log("pp.xes", pingpong_log());
    std::string config = ws.write("run.toml", "[evaluate]\nmodel = \"zeror\"\nunit = \"ms\"\n");

    // config sets zeror; the flag overrides it to tree
    std::string out;
    CHECK(run_cli({"evaluate", "--rule", rule, "--log", log, "--config", config, "--model",
                   "tree", "--onehot-attrs", "concept:name"},
                  &out) == 0);
    CHECK(out.find("tree\t") != std::string::npos);
}

TEST_CASE("csv logs work through the cli") {
    Workspace ws;
    std::string rule = ws.write("count.foe",
                                "rule { curr < last => count(true ; where x = curr:last); "
                                "default 0 }");
    std::string csv = ws.write("log.csv",
                               "case,when,activity\n"
                               "c1,1000,A\n"
                               "c1,2000,B\n"
                               "c1,3000,C\n"
                               "c1,4000,D\n"
                               "c2,1000,A\n"
                               "c2,2000,B\n"
                               "c2,3000,C\n");
    std::string out_csv = ws.dir + "/csv_dataset.csv";
    std::string out;
    CHECK(run_cli({"label", "--rule", rule, "--log", csv, "--format", "csv", "--csv-id-column",
                   "case", "--csv-time-column", "when", "--csv-time-format", "epoch_ms",
                   "--onehot-attrs", "activity", "--out", out_csv},
                  &out) == 0);
    CHECK(out.find("3 rows") != std::string::npos);  // 2 from c1, 1 from c2
}

TEST_CASE("zeror predictions are identical for every trace") {
    Workspace ws;
    std::string rule = ws.write("pp.foe", kPingPongRule);
    std::string log = ws.write_log("pp.xes", pingpong_log());
    std::string model_path = ws.dir + "/zeror.foemodel";
    std::string out;
    REQUIRE(run_cli({"train", "--rule", rule, "--log", log, "--model", "zeror",
                     "--onehot-attrs", "concept:name", "--out", model_path},
                    &out) == 0);
    std::string first;
    for (const char* trace : {"c0", "c1", "c5"}) {
        REQUIRE(run_cli({"predict", "--model-file", model_path, "--log", log, "--trace", trace,
                         "--k", "3"},
                        &out) == 0);
        std::string prediction_line = out.substr(0, out.find('\n'));
        if (first.empty())
            first = prediction_line;
        else
            CHECK(prediction_line == first);
    }
}
