#include "foe/labeling.hpp"

#include <omp.h>

#include <fstream>

#include "foe/eval.hpp"

namespace foe {
namespace {

struct Job {
    const Trace* trace;
    std::size_t k;
};

std::vector<Job> collect_jobs(const std::vector<Trace>& traces, std::size_t first,
                              std::size_t count, const KRange& range) {
    std::vector<Job> jobs;
    for (std::size_t t = first; t < first + count && t < traces.size(); ++t)
        for (std::size_t k : prefix_lengths(traces[t], range)) jobs.push_back({&traces[t], k});
    return jobs;
}

LabeledDataset assemble(const AnalyticRule& rule, const FittedEncoder& encoder,
                        const std::vector<Job>& jobs, std::vector<double>&& matrix,
                        std::vector<AttributeValue>&& targets) {
    LabeledDataset out;
    out.feature_names = encoder.feature_names();
    out.task = rule.kind() == RuleKind::Numeric ? Task::Regression : Task::Classification;
    const std::size_t width = encoder.width();

    out.matrix.reserve(matrix.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (targets[i].is_undefined()) {
            ++out.skipped_undefined;
            continue;
        }
        out.matrix.insert(out.matrix.end(), matrix.begin() + i * width,
                          matrix.begin() + (i + 1) * width);
        out.targets.push_back(std::move(targets[i]));
        out.provenance.emplace_back(jobs[i].trace->id, jobs[i].k);
        ++out.n_rows;
    }
    return out;
}

LabeledDataset build_over_jobs(const AnalyticRule& rule, const FittedEncoder& encoder,
                               const std::vector<Job>& jobs, int n_threads) {
    if (jobs.empty())
        throw EmptyDataset("no trace is long enough to produce a labeled prefix");

    const std::size_t width = encoder.width();
    std::vector<double> matrix(jobs.size() * width, 0.0);
    std::vector<AttributeValue> targets(jobs.size());

    // Each job owns one row slot, so scheduling cannot change the output.
    int threads = n_threads > 0 ? n_threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        encoder.encode_into(*jobs[i].trace, jobs[i].k, {matrix.data() + i * width, width});
        targets[i] = apply_rule(rule, *jobs[i].trace, jobs[i].k);
    }
    return assemble(rule, encoder, jobs, std::move(matrix), std::move(targets));
}

}  // namespace

std::vector<std::size_t> prefix_lengths(const Trace& trace, const KRange& range) {
    std::vector<std::size_t> ks;
    std::size_t first = range.first_k();
    std::size_t last = range.last_k(trace.events.size());
    for (std::size_t k = first; k <= last && k <= trace.events.size(); ++k) ks.push_back(k);
    return ks;
}

std::string LabeledDataset::skip_summary() const {
    std::string out = std::to_string(n_rows) + " rows, " + std::to_string(width()) + " columns";
    if (skipped_undefined > 0)
        out += "; skipped " + std::to_string(skipped_undefined) +
               " prefixes with undefined target";
    return out;
}

LabeledDataset build_dataset_serial(const AnalyticRule& rule, const EventLog& log,
                                    const FittedEncoder& encoder, const KRange& range) {
    std::vector<Job> jobs = collect_jobs(log.traces(), 0, log.size(), range);
    if (jobs.empty())
        throw EmptyDataset("no trace is long enough to produce a labeled prefix");

    const std::size_t width = encoder.width();
    std::vector<double> matrix(jobs.size() * width, 0.0);
    std::vector<AttributeValue> targets(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        encoder.encode_into(*jobs[i].trace, jobs[i].k, {matrix.data() + i * width, width});
        targets[i] = apply_rule(rule, *jobs[i].trace, jobs[i].k);
    }
    return assemble(rule, encoder, jobs, std::move(matrix), std::move(targets));
}

LabeledDataset build_dataset(const AnalyticRule& rule, const EventLog& log,
                             const FittedEncoder& encoder, const KRange& range, int n_threads) {
    return build_over_jobs(rule, encoder, collect_jobs(log.traces(), 0, log.size(), range),
                           n_threads);
}

LabeledDataset build_dataset_range(const AnalyticRule& rule, const std::vector<Trace>& traces,
                                   std::size_t first, std::size_t count,
                                   const FittedEncoder& encoder, const KRange& range,
                                   int n_threads) {
    return build_over_jobs(rule, encoder, collect_jobs(traces, first, count, range), n_threads);
}

void export_csv(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        q += '"';
        return q;
    };

    for (std::size_t i = 0; i < dataset.feature_names.size(); ++i) {
        if (i) out << ',';
        out << quote(dataset.feature_names[i]);
    }
    out << (dataset.feature_names.empty() ? "target" : ",target") << '\n';

    for (std::size_t r = 0; r < dataset.n_rows; ++r) {
        for (double v : dataset.row(r)) out << format_double(v) << ',';
        const AttributeValue& t = dataset.targets[r];
        if (t.is_number())
            out << format_double(t.as_number());
        else if (t.is_timestamp())
            out << t.as_timestamp();
        else
            out << quote(t.to_display_string());
        out << '\n';
    }
    if (!out) throw IoError("cannot write '" + path + "'");
}

std::vector<TrainingPrefixes> training_prefixes(const std::vector<Trace>& traces,
                                                std::size_t first, std::size_t count,
                                                const KRange& range) {
    std::vector<TrainingPrefixes> out;
    for (std::size_t i = first; i < first + count && i < traces.size(); ++i) {
        std::vector<std::size_t> ks = prefix_lengths(traces[i], range);
        if (ks.empty()) continue;
        out.push_back({&traces[i], ks.back()});
    }
    return out;
}

}  // namespace foe
