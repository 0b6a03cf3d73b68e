#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "foe/ml.hpp"
#include "foe/parser.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace foe;
using namespace fixtures;

namespace {

LabeledDataset toy_classification(const std::vector<std::vector<double>>& rows,
                                  const std::vector<std::string>& labels) {
    LabeledDataset ds;
    ds.task = Task::Classification;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        ds.feature_names.push_back("f" + std::to_string(i));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ds.matrix.insert(ds.matrix.end(), rows[r].begin(), rows[r].end());
        ds.targets.push_back(AttributeValue::text(labels[r]));
        ds.provenance.emplace_back("t", r);
        ++ds.n_rows;
    }
    return ds;
}

LabeledDataset toy_regression(const std::vector<std::vector<double>>& rows,
                              const std::vector<double>& values) {
    LabeledDataset ds;
    ds.task = Task::Regression;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        ds.feature_names.push_back("f" + std::to_string(i));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ds.matrix.insert(ds.matrix.end(), rows[r].begin(), rows[r].end());
        ds.targets.push_back(AttributeValue::number(values[r]));
        ds.provenance.emplace_back("t", r);
        ++ds.n_rows;
    }
    return ds;
}

}  // namespace

TEST_CASE("zeror predicts the mode and the mean") {
    // labels 7:3 -> always A
    std::vector<std::vector<double>> rows(10, std::vector<double>{0});
    std::vector<std::string> labels(7, "A");
    labels.insert(labels.end(), 3, "B");
    TrainedModel cls = train(toy_classification(rows, labels), ModelSpec::zeror());
    for (double x : {0.0, 1.0, -5.0}) {
        auto p = cls.predict(std::vector<double>{x});
        CHECK(p.value == T("A"));
        CHECK(p.score == 0.3);  // prior of the positive class B, constant
    }

    TrainedModel reg =
        train(toy_regression({{0}, {0}, {0}}, {1, 2, 3}), ModelSpec::zeror());
    CHECK(reg.predict_value(std::vector<double>{9}) == 2.0);
}

TEST_CASE("decision tree separates a planted split") {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 20; ++i) {
        double x = i < 10 ? i : i + 100;
        rows.push_back({x, 1.0});
        labels.push_back(i < 10 ? "low" : "high");
    }
    TrainedModel tree = train(toy_classification(rows, labels), ModelSpec::tree(3));
    CHECK(tree.predict(std::vector<double>{5, 1}).value == T("low"));
    CHECK(tree.predict(std::vector<double>{115, 1}).value == T("high"));

    // single-leaf degenerate data still trains and predicts the leaf statistic
    TrainedModel stump =
        train(toy_classification({{1}, {2}, {3}}, {"same", "same", "same"}), ModelSpec::tree(3));
    CHECK(stump.predict(std::vector<double>{42}).value == T("same"));
}

TEST_CASE("tree regression fits a step function") {
    std::vector<std::vector<double>> rows;
    std::vector<double> values;
    for (int i = 0; i < 30; ++i) {
        rows.push_back({static_cast<double>(i % 3)});
        values.push_back((i % 3) * 10.0);
    }
    TrainedModel tree = train(toy_regression(rows, values), ModelSpec::tree(4));
    CHECK(tree.predict_value(std::vector<double>{0}) == 0.0);
    CHECK(tree.predict_value(std::vector<double>{1}) == 10.0);
    CHECK(tree.predict_value(std::vector<double>{2}) == 20.0);
}

TEST_CASE("tree predictions survive monotone feature transformations") {
    generators::Gen gen(8);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 60; ++i) {
        double a = gen.pick(10), b = gen.pick(10);
        rows.push_back({a, b});
        labels.push_back(a + b > 9 ? "big" : "small");
    }
    TrainedModel plain = train(toy_classification(rows, labels), ModelSpec::tree(6));

    auto squash = [](double v) { return std::exp(v / 3.0); };  // strictly monotone
    std::vector<std::vector<double>> warped = rows;
    for (auto& r : warped) r[0] = squash(r[0]);
    TrainedModel transformed = train(toy_classification(warped, labels), ModelSpec::tree(6));

    for (int i = 0; i < 60; ++i) {
        auto x = rows[static_cast<std::size_t>(i)];
        auto xw = warped[static_cast<std::size_t>(i)];
        CHECK(plain.predict(x).value == transformed.predict(xw).value);
    }
}

TEST_CASE("linear regression recovers an exact linear function") {
    std::vector<std::vector<double>> rows;
    std::vector<double> values;
    for (int i = 0; i < 20; ++i) {
        double a = i, b = (i * 7) % 5;
        rows.push_back({a, b});
        values.push_back(2 * a - 3 * b + 4);
    }
    TrainedModel lin = train(toy_regression(rows, values), ModelSpec::linear());
    CHECK(lin.predict_value(std::vector<double>{10, 2}) == doctest::Approx(18.0).epsilon(1e-6));
    CHECK(lin.predict_value(std::vector<double>{0, 0}) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("logistic regression separates a margin-1 toy set") {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 20; ++i) {
        double offset = i % 2 == 0 ? 1.0 : -1.0;  // margin >= 1 around x0 = 0
        rows.push_back({offset * (1.0 + i / 10.0), offset});
        labels.push_back(offset > 0 ? "pos" : "neg");
    }
    TrainedModel logit = train(toy_classification(rows, labels),
                               ModelSpec::logistic(0.5, 2000, 0.0));
    int correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (logit.predict(rows[i]).value == T(labels[i])) ++correct;
    CHECK(correct == 20);  // training accuracy 1.0

    // zero coefficients give probability 0.5
    TrainedModel untrained = train(toy_classification(rows, labels),
                                   ModelSpec::logistic(0.5, 0, 0.0));
    CHECK(untrained.predict(rows[0]).score == 0.5);
}

TEST_CASE("logistic gradient matches central finite differences") {
    generators::Gen gen(99);
    for (int round = 0; round < 10; ++round) {
        std::size_t n = 12, width = 4;
        std::vector<double> matrix(n * width), y(n), w(width + 1);
        for (double& v : matrix) v = (gen.pick(200) - 100) / 25.0;
        for (double& v : y) v = gen.chance(0.5) ? 1.0 : 0.0;
        for (double& v : w) v = (gen.pick(200) - 100) / 50.0;
        double l2 = round % 2 == 0 ? 0.0 : 0.1;

        std::vector<double> grad = logistic_gradient(matrix, n, width, y, w, l2);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double h = 1e-6;
            std::vector<double> wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            double numeric = (logistic_loss(matrix, n, width, y, wp, l2) -
                              logistic_loss(matrix, n, width, y, wm, l2)) /
                             (2 * h);
            double denom = std::max(std::fabs(numeric), std::fabs(grad[i]));
            if (denom < 1e-10) continue;
            CHECK(std::fabs(numeric - grad[i]) / denom < 1e-5);
        }
    }
}

TEST_CASE("task mismatches are rejected") {
    LabeledDataset cls = toy_classification({{1}, {2}}, {"a", "b"});
    LabeledDataset reg = toy_regression({{1}, {2}}, {1, 2});
    CHECK_THROWS_AS(train(cls, ModelSpec::linear()), TaskMismatch);
    CHECK_THROWS_AS(train(reg, ModelSpec::logistic()), TaskMismatch);
    TrainedModel m = train(cls, ModelSpec::zeror());
    CHECK_THROWS_AS(m.predict(std::vector<double>{1, 2, 3}), SchemaMismatch);
}

TEST_CASE("metrics formulas") {
    SUBCASE("regression identities and the hand oracle") {
        Metrics zero = compute_regression_metrics({1, 2, 3}, {1, 2, 3});
        CHECK(zero.mae == 0.0);
        CHECK(zero.rmse == 0.0);
        // truths {0,10}, predictions {5,5} -> MAE 5, RMSE 5
        Metrics five = compute_regression_metrics({0, 10}, {5, 5});
        CHECK(five.mae == 5.0);
        CHECK(five.rmse == 5.0);
        // asymmetric errors make RMSE exceed MAE
        Metrics skew = compute_regression_metrics({0, 10}, {1, 1});
        CHECK(skew.mae == 5.0);
        CHECK(skew.rmse == doctest::Approx(std::sqrt((1.0 + 81.0) / 2)));
    }

    SUBCASE("mae <= rmse on 1000 random prediction sets") {
        generators::Gen gen(3);
        for (int round = 0; round < 1000; ++round) {
            std::size_t n = 1 + static_cast<std::size_t>(gen.pick(20));
            std::vector<double> truths(n), preds(n);
            for (std::size_t i = 0; i < n; ++i) {
                truths[i] = gen.pick(100) - 50;
                preds[i] = gen.pick(100) - 50;
            }
            Metrics m = compute_regression_metrics(truths, preds);
            CHECK(m.mae <= m.rmse + 1e-12);
        }
    }

    SUBCASE("precision equals recall makes the F-measure equal both") {
        // perfectly symmetric confusion: P = R
        std::vector<std::string> truths = {"a", "a", "b", "b"};
        std::vector<ScoredLabel> preds = {{"a", {1, 0}}, {"b", {0, 1}},
                                          {"a", {1, 0}}, {"b", {0, 1}}};
        Metrics m = compute_classification_metrics(truths, preds, {"a", "b"});
        CHECK(m.weighted_precision == doctest::Approx(m.weighted_recall));
        CHECK(m.f_measure == doctest::Approx(m.weighted_precision));
    }

    SUBCASE("tie-aware rank AUC") {
        // constant scores: every ranking is a tie -> 0.5 exactly
        CHECK(rank_auc({0.3, 0.3, 0.3, 0.3}, {true, false, true, false}) == 0.5);
        // perfect separation -> 1.0
        CHECK(rank_auc({0.9, 0.8, 0.2, 0.1}, {true, true, false, false}) == 1.0);
        // perfect inversion -> 0.0
        CHECK(rank_auc({0.1, 0.2, 0.8, 0.9}, {true, true, false, false}) == 0.0);
        // single class -> degenerate 0.5
        CHECK(rank_auc({0.1, 0.9}, {true, true}) == 0.5);
    }

    SUBCASE("single-class truths flag the AUC") {
        std::vector<std::string> truths = {"a", "a"};
        std::vector<ScoredLabel> preds = {{"a", {1, 0}}, {"a", {1, 0}}};
        Metrics m = compute_classification_metrics(truths, preds, {"a", "b"});
        CHECK(m.auc == 0.5);
        CHECK(m.auc_degenerate);
        CHECK(m.accuracy == 1.0);
    }

    SUBCASE("an unpredicted class zeroes its precision and flags it") {
        std::vector<std::string> truths = {"a", "b", "b"};
        std::vector<ScoredLabel> preds = {{"a", {0.9, 0.1}}, {"a", {0.8, 0.2}},
                                          {"a", {0.7, 0.3}}};
        Metrics m = compute_classification_metrics(truths, preds, {"a", "b"});
        CHECK(m.precision_flagged);
        // class a: P = 1/3 with support 1; class b: P = 0 with support 2
        CHECK(m.weighted_precision == doctest::Approx(1.0 / 9.0));
    }
}

TEST_CASE("zeror AUC is exactly one half under the rank AUC") {
    generators::Gen gen(21);
    for (int round = 0; round < 20; ++round) {
        std::size_t n = 10 + static_cast<std::size_t>(gen.pick(30));
        std::vector<std::string> truths(n);
        bool saw[2] = {false, false};
        for (auto& t : truths) {
            int c = gen.pick(2);
            saw[c] = true;
            t = c == 0 ? "a" : "b";
        }
        if (!saw[0] || !saw[1]) continue;
        std::vector<ScoredLabel> preds(n, {"a", {0.7, 0.3}});  // constant scores
        Metrics m = compute_classification_metrics(truths, preds, {"a", "b"});
        CHECK(m.auc == 0.5);
    }
}

TEST_CASE("model save/load round-trips predictions") {
    generators::Gen gen(17);
    const char* path = "/tmp/foe_model_test.foemodel";

    auto roundtrip_scores_match = [&](const TrainedModel& model, std::size_t width) {
        save_model(model, path);
        TrainedModel loaded = load_model(path);
        std::remove(path);
        REQUIRE(loaded.feature_names() == model.feature_names());
        for (int round = 0; round < 100; ++round) {
            std::vector<double> x(width);
            for (double& v : x) v = (gen.pick(400) - 200) / 10.0;
            if (model.task() == Task::Classification) {
                CHECK(model.predict(x).value == loaded.predict(x).value);
                CHECK(model.predict(x).score == loaded.predict(x).score);
                CHECK(model.predict_proba(x) == loaded.predict_proba(x));
            } else {
                CHECK(model.predict_value(x) == loaded.predict_value(x));
            }
        }
    };

    SUBCASE("zeror") {
        TrainedModel m =
            train(toy_classification({{1}, {2}, {3}}, {"x", "x", "y"}), ModelSpec::zeror());
        roundtrip_scores_match(m, 1);
    }

    SUBCASE("a depth-5 tree") {
        std::vector<std::vector<double>> rows;
        std::vector<std::string> labels;
        for (int i = 0; i < 200; ++i) {
            double a = gen.pick(100) / 7.0, b = gen.pick(100) / 3.0;
            rows.push_back({a, b});
            labels.push_back(std::fmod(a + b, 5.0) > 2.5 ? "odd" : "even");
        }
        TrainedModel m = train(toy_classification(rows, labels), ModelSpec::tree(5));
        roundtrip_scores_match(m, 2);
    }

    SUBCASE("linear and logistic") {
        TrainedModel lin = train(toy_regression({{1, 2}, {2, 1}, {3, 5}, {4, 2}, {0, 1}},
                                                {3, 4, 1, 9, 2}),
                                 ModelSpec::linear(0.01));
        roundtrip_scores_match(lin, 2);
        TrainedModel logit = train(
            toy_classification({{1, 0}, {2, 1}, {-1, 0}, {-2, 1}}, {"p", "p", "n", "n"}),
            ModelSpec::logistic(0.3, 200));
        roundtrip_scores_match(logit, 2);
    }

    SUBCASE("corrupt files raise VersionMismatch") {
        {
            std::ofstream f(path);
            f << "foe-predict-model v2 classification\n";
        }
        CHECK_THROWS_AS(load_model(path), VersionMismatch);
        {
            std::ofstream f(path);
            f << "foe-predict-model v1 classification\nkind tree\nfeatures 1\nf \"a\"\n";
        }
        CHECK_THROWS_AS(load_model(path), VersionMismatch);  // truncated
        std::remove(path);
        CHECK_THROWS_AS(load_model(path), IoError);
    }
}

TEST_CASE("training is deterministic: identical model files across runs") {
    generators::Gen gen(64);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 80; ++i) {
        rows.push_back({gen.pick(50) / 3.0, gen.pick(50) / 7.0, static_cast<double>(gen.pick(2))});
        labels.push_back(gen.chance(0.4) ? "a" : "b");
    }
    LabeledDataset ds = toy_classification(rows, labels);

    auto serialize = [&](const ModelSpec& spec) {
        TrainedModel m = train(ds, spec);
        const char* path = "/tmp/foe_det.foemodel";
        save_model(m, path);
        std::ifstream f(path);
        std::stringstream buf;
        buf << f.rdbuf();
        std::remove(path);
        return buf.str();
    };
    for (const ModelSpec& spec :
         {ModelSpec::zeror(), ModelSpec::tree(6), ModelSpec::logistic(0.2, 50)})
        CHECK(serialize(spec) == serialize(spec));
}

TEST_CASE("holdout splits by trace order and uses training vocabularies") {
    // 6 traces; ceil(2/3 * 6) = 4 train, 2 test
    std::vector<Trace> traces;
    for (int i = 0; i < 6; ++i) {
        std::string label = i < 4 ? "train" : "test";
        traces.push_back(tr("t" + std::to_string(i),
                            {ev({{"act", T(label)}, {"time:timestamp", TS(0)}}),
                             ev({{"act", T(label)}, {"time:timestamp", TS(1000)}}),
                             ev({{"act", T(label)}, {"time:timestamp", TS(2000)}}),
                             ev({{"act", T(label)}, {"time:timestamp", TS(3000)}})}));
    }
    EventLog log = log_of(std::move(traces));
    AnalyticRule rule = parse_rule("rule { e[1].act == \"train\" => \"a\"; default \"b\" }");

    HoldoutResult result =
        evaluate_holdout(rule, log, {EncoderConfig::one_hot({"act"}, 2)}, ModelSpec::zeror());
    CHECK(result.n_train_rows == 8);  // 4 traces x 2 prefixes
    CHECK(result.n_test_rows == 4);
    // the vocabulary only contains the training-side value
    REQUIRE(result.model.encoder().has_value());
    for (const std::string& name : result.model.feature_names())
        CHECK(name.find("=test") == std::string::npos);
    // the training split never saw label "b"
    CHECK(result.model.labels() == std::vector<std::string>{"a"});
    CHECK(result.metrics.accuracy == 0.0);

    CHECK_THROWS_AS(evaluate_holdout(rule, log, {EncoderConfig::one_hot({"act"}, 2)},
                                     ModelSpec::zeror(), {0.99, {}, 0}),
                    EmptySplit);
}

TEST_CASE("perfect-knowledge fixture reaches accuracy and AUC 1.0") {
    // the target value is itself a training feature
    generators::Gen gen(55);
    std::vector<Trace> traces;
    for (int i = 0; i < 40; ++i) {
        std::string klass = gen.chance(0.5) ? "yes" : "no";
        traces.push_back(
            tr("t" + std::to_string(i), {ev({{"leak", T(klass)}, {"time:timestamp", TS(0)}}),
                                         ev({{"leak", T(klass)}, {"time:timestamp", TS(1)}}),
                                         ev({{"leak", T(klass)}, {"time:timestamp", TS(2)}}),
                                         ev({{"leak", T(klass)}, {"time:timestamp", TS(3)}})}));
    }
    EventLog log = log_of(std::move(traces));
    AnalyticRule rule = parse_rule("rule { e[1].leak == \"yes\" => \"yes\"; default \"no\" }");
    HoldoutResult result = evaluate_holdout(rule, log, {EncoderConfig::one_hot({"leak"}, 1)},
                                            ModelSpec::tree(10));
    CHECK(result.metrics.accuracy == 1.0);
    CHECK(result.metrics.auc == 1.0);
}
