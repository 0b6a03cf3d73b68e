#include "foe/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "foe/csv_log.hpp"
#include "foe/eval.hpp"
#include "foe/ml.hpp"
#include "foe/parser.hpp"
#include "foe/printer.hpp"
#include "foe/validate.hpp"
#include "foe/xes.hpp"

namespace foe::cli {
namespace {

using nlohmann::json;

constexpr double kMsPerDay = 86400000.0;

struct CommonOptions {
    std::string rule_path;
    std::string log_path;
    std::string format = "xes";  // xes | csv
    std::string csv_id_column = "case_id";
    std::string csv_time_column = "time:timestamp";
    std::string csv_time_format = "iso8601";
    std::vector<std::string> csv_numeric_columns;

    std::vector<std::string> onehot_attrs;
    std::vector<std::string> numeric_attrs;
    bool timedeltas = false;
    std::size_t last_n = 0;

    std::string model = "tree";
    double split = 2.0 / 3.0;
    std::uint64_t seed = 0;
    std::string unit = "ms";
    std::string out_path;
    bool include_k1 = false;
    bool include_klast = false;

    std::size_t max_depth = 10;
    std::size_t min_leaf = 1;
    double ridge = 0.0;
    double learning_rate = 0.1;
    std::size_t iterations = 500;
    double l2 = 0.0;
};

int thread_cap() {
    if (const char* env = std::getenv("FOE_PREDICT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 0;  // library picks the OpenMP default
}

EventLog load_log(const CommonOptions& opt) {
    if (opt.format == "xes") return load_xes(opt.log_path);
    if (opt.format == "csv") {
        CsvConfig config;
        config.trace_id_column = opt.csv_id_column;
        config.timestamp_column = opt.csv_time_column;
        config.timestamp_format = opt.csv_time_format;
        config.numeric_columns.insert(opt.csv_numeric_columns.begin(),
                                      opt.csv_numeric_columns.end());
        return load_csv(opt.log_path, config);
    }
    throw std::runtime_error("unknown log format '" + opt.format + "' (use xes or csv)");
}

std::vector<EncoderConfig> encoder_configs(const CommonOptions& opt) {
    std::vector<EncoderConfig> configs;
    if (!opt.onehot_attrs.empty())
        configs.push_back(EncoderConfig::one_hot(opt.onehot_attrs, opt.last_n));
    if (!opt.numeric_attrs.empty())
        configs.push_back(EncoderConfig::numeric(opt.numeric_attrs, opt.last_n));
    if (opt.timedeltas) configs.push_back(EncoderConfig::time_deltas(opt.last_n));
    if (configs.empty())
        configs.push_back(EncoderConfig::one_hot({"concept:name"}, opt.last_n));
    return configs;
}

ModelSpec model_spec(const CommonOptions& opt) {
    ModelSpec spec;
    if (opt.model == "zeror")
        spec.kind = ModelSpec::Kind::ZeroR;
    else if (opt.model == "tree")
        spec.kind = ModelSpec::Kind::DecisionTree;
    else if (opt.model == "linear")
        spec.kind = ModelSpec::Kind::LinearRegression;
    else if (opt.model == "logistic")
        spec.kind = ModelSpec::Kind::LogisticRegression;
    else
        throw std::runtime_error("unknown model '" + opt.model +
                                 "' (use zeror, tree, linear or logistic)");
    spec.max_depth = opt.max_depth;
    spec.min_samples_leaf = opt.min_leaf;
    spec.ridge_lambda = opt.ridge;
    spec.learning_rate = opt.learning_rate;
    spec.iterations = opt.iterations;
    spec.l2_lambda = opt.l2;
    spec.seed = opt.seed;
    return spec;
}

KRange k_range(const CommonOptions& opt) { return {opt.include_k1, opt.include_klast}; }

void write_json(const json& doc, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << doc.dump(2) << '\n';
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << doc.dump(2) << '\n';
}

double display_value(double ms, const std::string& unit) {
    return unit == "days" ? ms / kMsPerDay : ms;
}

json metrics_json(const Metrics& m, const std::string& model_name, const std::string& unit) {
    json j;
    j["model"] = model_name;
    j["n_test"] = m.n_test;
    if (m.task == Task::Classification) {
        j["auc"] = m.auc;
        j["accuracy"] = m.accuracy;
        j["w_precision"] = m.weighted_precision;
        j["w_recall"] = m.weighted_recall;
        j["f_measure"] = m.f_measure;
        if (m.auc_degenerate) j["auc_degenerate"] = true;
        if (m.precision_flagged) j["precision_flagged"] = true;
    } else {
        j["mae"] = display_value(m.mae, unit);
        j["rmse"] = display_value(m.rmse, unit);
        j["unit"] = unit;
    }
    return j;
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

int cmd_validate(const CommonOptions& opt, std::ostream& out, std::ostream& err) {
    AnalyticRule rule;
    try {
        rule = parse_rule_file(opt.rule_path);
    } catch (const ParseError& e) {
        err << e.what() << '\n';
        return 1;
    }
    ValidationReport report = validate(rule);
    if (!report.ok()) {
        out << report.to_string();
        return 2;
    }
    out << "rule is valid ("
        << (rule.kind() == RuleKind::Numeric ? "numeric" : "non-numeric") << ", "
        << rule.cases.size() << " case(s))\n";
    if (!opt.log_path.empty()) {
        EventLog log = load_log(opt);
        WellDefinednessReport wd = check_well_defined(rule, log, thread_cap());
        if (!wd.ok()) {
            out << wd.violations.size() << " well-definedness violation(s):\n";
            for (const auto& v : wd.violations)
                out << "  trace " << v.trace_id << " k=" << v.k << ": case " << v.case_a << " -> "
                    << v.value_a.to_display_string() << " vs case " << v.case_b << " -> "
                    << v.value_b.to_display_string() << '\n';
            return 3;
        }
        out << "rule is well-defined for the log (" << log.size() << " traces)\n";
    }
    return 0;
}

int cmd_label(const CommonOptions& opt, std::ostream& out, std::ostream&) {
    AnalyticRule rule = parse_rule_file(opt.rule_path);
    ValidationReport report = validate(rule);
    if (!report.ok()) throw std::runtime_error("rule is invalid:\n" + report.to_string());
    EventLog log = load_log(opt);

    KRange range = k_range(opt);
    std::vector<TrainingPrefixes> view = training_prefixes(log.traces(), 0, log.size(), range);
    FittedEncoder encoder = fit_encoders(encoder_configs(opt), view);
    LabeledDataset dataset = build_dataset(rule, log, encoder, range, thread_cap());

    std::string path = opt.out_path.empty() ? "dataset.csv" : opt.out_path;
    export_csv(dataset, path);
    out << dataset.skip_summary() << '\n';
    out << "wrote " << path << '\n';

    json doc;
    doc["command"] = "label";
    doc["rows"] = dataset.n_rows;
    doc["columns"] = dataset.width();
    doc["skipped_undefined"] = dataset.skipped_undefined;
    doc["dataset"] = path;
    out << doc.dump(2) << '\n';
    return 0;
}

int cmd_train(const CommonOptions& opt, std::ostream& out, std::ostream&) {
    AnalyticRule rule = parse_rule_file(opt.rule_path);
    ValidationReport report = validate(rule);
    if (!report.ok()) throw std::runtime_error("rule is invalid:\n" + report.to_string());
    EventLog log = load_log(opt);

    KRange range = k_range(opt);
    std::vector<TrainingPrefixes> view = training_prefixes(log.traces(), 0, log.size(), range);
    FittedEncoder encoder = fit_encoders(encoder_configs(opt), view);
    LabeledDataset dataset = build_dataset(rule, log, encoder, range, thread_cap());

    TrainedModel model = train(dataset, model_spec(opt));
    model.attach_encoder(std::move(encoder));
    std::string path = opt.out_path.empty() ? "model.foemodel" : opt.out_path;
    save_model(model, path);
    out << "trained " << opt.model << " on " << dataset.n_rows << " rows ("
        << dataset.width() << " features); wrote " << path << '\n';
    return 0;
}

int cmd_evaluate(const CommonOptions& opt, std::ostream& out, std::ostream&) {
    AnalyticRule rule = parse_rule_file(opt.rule_path);
    ValidationReport report = validate(rule);
    if (!report.ok()) throw std::runtime_error("rule is invalid:\n" + report.to_string());
    EventLog log = load_log(opt);

    HoldoutOptions options;
    options.split = opt.split;
    options.k_range = k_range(opt);
    options.n_threads = thread_cap();
    std::vector<EncoderConfig> encoders = encoder_configs(opt);

    HoldoutResult baseline = evaluate_holdout(rule, log, encoders, ModelSpec::zeror(), options);
    ModelSpec spec = model_spec(opt);
    HoldoutResult configured =
        spec.kind == ModelSpec::Kind::ZeroR
            ? baseline
            : evaluate_holdout(rule, log, encoders, spec, options);

    bool classification = baseline.metrics.task == Task::Classification;
    out << "holdout: " << baseline.n_train_rows << " training rows, " << baseline.n_test_rows
        << " test rows\n";
    auto print_row = [&](const std::string& name, const Metrics& m) {
        if (classification) {
            out << name << '\t' << fixed3(m.auc) << '\t' << fixed3(m.accuracy) << '\t'
                << fixed3(m.weighted_precision) << '\t' << fixed3(m.weighted_recall) << '\t'
                << fixed3(m.f_measure) << '\n';
        } else {
            out << name << '\t' << fixed3(display_value(m.mae, opt.unit)) << '\t'
                << fixed3(display_value(m.rmse, opt.unit)) << '\n';
        }
    };
    if (classification)
        out << "Model\tAUC\tAccuracy\tW.Prec\tW.Rec\tF-Measure\n";
    else
        out << "Model\tMAE (in " << opt.unit << ")\tRMSE (in " << opt.unit << ")\n";
    print_row("zeror", baseline.metrics);
    print_row(opt.model, configured.metrics);

    json doc;
    doc["command"] = "evaluate";
    doc["task"] = classification ? "classification" : "regression";
    doc["n_train_rows"] = baseline.n_train_rows;
    doc["n_test_rows"] = baseline.n_test_rows;
    doc["split"] = opt.split;
    doc["models"] = json::array({metrics_json(baseline.metrics, "zeror", opt.unit),
                                 metrics_json(configured.metrics, opt.model, opt.unit)});
    write_json(doc, opt.out_path, out);
    return 0;
}

int cmd_predict(const CommonOptions& opt, const std::string& model_path,
                const std::string& trace_id, std::size_t k, std::ostream& out, std::ostream& err) {
    TrainedModel model = load_model(model_path);
    if (!model.encoder()) {
        err << "model file carries no encoder; cannot encode prefixes\n";
        return 1;
    }
    EventLog log = load_log(opt);
    const Trace* trace = log.find_trace(trace_id);
    if (!trace) {
        err << "unknown trace '" << trace_id << "'\n";
        return 1;
    }
    if (k < 1 || k > trace->events.size()) {
        err << "prefix length " << k << " out of range for trace of length "
            << trace->events.size() << '\n';
        return 1;
    }
    std::vector<double> features = model.encoder()->encode(*trace, k);
    TrainedModel::Prediction p = model.predict(features);

    json doc;
    doc["command"] = "predict";
    doc["trace"] = trace_id;
    doc["k"] = k;
    if (model.task() == Task::Classification) {
        out << "prediction: " << p.value.to_display_string() << " (score "
            << fixed3(p.score) << ")\n";
        doc["prediction"] = p.value.to_display_string();
        doc["score"] = p.score;
    } else {
        double value = display_value(p.value.as_number(), opt.unit);
        out << "prediction: " << format_double(value)
            << (opt.unit == "days" ? " days" : " ms") << '\n';
        doc["prediction"] = value;
        doc["unit"] = opt.unit;
    }
    write_json(doc, opt.out_path, out);
    return 0;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_rule, bool needs_log) {
    auto* rule = cmd->add_option("--rule", opt.rule_path, "rule file (.foe)");
    if (needs_rule) rule->required();
    auto* log = cmd->add_option("--log", opt.log_path, "event log path");
    if (needs_log) log->required();
    cmd->add_option("--format", opt.format, "log format: xes or csv")
        ->check(CLI::IsMember({"xes", "csv"}));
    cmd->add_option("--csv-id-column", opt.csv_id_column, "CSV trace-id column");
    cmd->add_option("--csv-time-column", opt.csv_time_column, "CSV timestamp column");
    cmd->add_option("--csv-time-format", opt.csv_time_format,
                    "iso8601, epoch_ms, epoch_s or a %Y-%m-%d pattern");
    cmd->add_option("--csv-numeric-columns", opt.csv_numeric_columns,
                    "CSV columns parsed as numbers")
        ->delimiter(',');
    cmd->add_option("--onehot-attrs", opt.onehot_attrs, "attributes for one-hot encoding")
        ->delimiter(',');
    cmd->add_option("--numeric-attrs", opt.numeric_attrs, "attributes encoded as raw numbers")
        ->delimiter(',');
    cmd->add_flag("--timedeltas", opt.timedeltas, "add time-since-previous-event features");
    cmd->add_option("--last-n", opt.last_n,
                    "events per encoding window (0 = maximal trace length)");
    cmd->add_option("--model", opt.model, "zeror, tree, linear or logistic");
    cmd->add_option("--split", opt.split, "training fraction of traces, by log order")
        ->check(CLI::Range(0.01, 0.99));
    cmd->add_option("--seed", opt.seed, "seed recorded with the run");
    cmd->add_option("--unit", opt.unit, "display unit for time-valued numbers")
        ->check(CLI::IsMember({"ms", "days"}));
    cmd->add_option("--out", opt.out_path, "output path");
    cmd->add_flag("--include-k1", opt.include_k1, "also label prefixes of length 1");
    cmd->add_flag("--include-klast", opt.include_klast, "also label complete traces");
    cmd->add_option("--max-depth", opt.max_depth, "decision tree depth limit");
    cmd->add_option("--min-leaf", opt.min_leaf, "minimum samples per tree leaf");
    cmd->add_option("--ridge", opt.ridge, "ridge penalty for linear regression");
    cmd->add_option("--learning-rate", opt.learning_rate, "logistic learning rate");
    cmd->add_option("--iterations", opt.iterations, "logistic gradient steps");
    cmd->add_option("--l2", opt.l2, "logistic L2 penalty");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"foe-predict: train and evaluate prediction models from analytic rules"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "TOML-shaped config file (subcommand options live under a [subcommand] "
                   "section); flags override it");
    app.allow_config_extras(true);

    CommonOptions opt;
    std::string model_path;
    std::string trace_id;
    std::size_t k = 0;

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "parse and statically check a rule; with --log, also "
                                       "check well-definedness");
    add_common(validate_cmd, opt, true, false);

    CLI::App* label_cmd =
        app.add_subcommand("label", "build the labeled dataset and export it as CSV");
    add_common(label_cmd, opt, true, true);

    CLI::App* train_cmd = app.add_subcommand("train", "train a model on the full log");
    add_common(train_cmd, opt, true, true);

    CLI::App* evaluate_cmd =
        app.add_subcommand("evaluate", "holdout evaluation against the ZeroR baseline");
    add_common(evaluate_cmd, opt, true, true);

    CLI::App* predict_cmd =
        app.add_subcommand("predict", "score one trace prefix with a saved model");
    add_common(predict_cmd, opt, false, true);
    predict_cmd->add_option("--model-file", model_path, "saved model")->required();
    predict_cmd->add_option("--trace", trace_id, "trace id")->required();
    predict_cmd->add_option("--k", k, "prefix length")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(opt, out, err);
        if (label_cmd->parsed()) return cmd_label(opt, out, err);
        if (train_cmd->parsed()) return cmd_train(opt, out, err);
        if (evaluate_cmd->parsed()) return cmd_evaluate(opt, out, err);
        if (predict_cmd->parsed()) return cmd_predict(opt, model_path, trace_id, k, out, err);
    } catch (const ParseError& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace foe::cli
