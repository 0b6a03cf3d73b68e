#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "foe/ast.hpp"
#include "foe/encoding.hpp"
#include "foe/event_log.hpp"

namespace foe {

struct EmptyDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Which prefix lengths of a trace become training instances. The default is
/// the strict 1 < k < |trace| of the model-building procedure; the flags
/// widen the range to k = 1 and/or k = |trace| for users who want them.
struct KRange {
    bool include_k1 = false;
    bool include_klast = false;

    std::size_t first_k() const { return include_k1 ? 1 : 2; }
    std::size_t last_k(std::size_t trace_len) const {
        return include_klast ? trace_len : (trace_len == 0 ? 0 : trace_len - 1);
    }
};

/// The prefix lengths of one trace under a range, ascending (possibly none).
std::vector<std::size_t> prefix_lengths(const Trace& trace, const KRange& range);

enum class Task { Classification, Regression };

/// Fixed-width feature matrix plus aligned targets. One row per labeled
/// prefix; prefixes whose target evaluated to Undefined are dropped and
/// counted in skipped_undefined.
struct LabeledDataset {
    std::vector<std::string> feature_names;
    std::size_t n_rows = 0;
    std::vector<double> matrix;  // row-major, n_rows x feature_names.size()
    std::vector<AttributeValue> targets;
    Task task = Task::Classification;
    std::vector<std::pair<std::string, std::size_t>> provenance;  // (trace id, k)
    std::size_t skipped_undefined = 0;

    std::size_t width() const { return feature_names.size(); }
    std::span<const double> row(std::size_t i) const {
        return {matrix.data() + i * width(), width()};
    }

    std::string skip_summary() const;
};

/// Builds the labeled dataset: for every trace and every in-range k, the
/// features are the fitted encoder applied to the k-prefix and the target is
/// the rule applied at (trace, k). Rows appear in log order, then k order,
/// regardless of worker scheduling. n_threads == 0 uses the OpenMP default.
/// Throws EmptyDataset when no trace yields any prefix.
LabeledDataset build_dataset(const AnalyticRule& rule, const EventLog& log,
                             const FittedEncoder& encoder, const KRange& range = {},
                             int n_threads = 0);

/// Serial reference implementation; kept for differential testing against
/// the parallel kernel.
LabeledDataset build_dataset_serial(const AnalyticRule& rule, const EventLog& log,
                                    const FittedEncoder& encoder, const KRange& range = {});

/// build_dataset over a contiguous run of traces (the holdout splits).
LabeledDataset build_dataset_range(const AnalyticRule& rule, const std::vector<Trace>& traces,
                                   std::size_t first, std::size_t count,
                                   const FittedEncoder& encoder, const KRange& range = {},
                                   int n_threads = 0);

/// Writes feature columns plus a final "target" column. Doubles round-trip
/// exactly; classification targets are quoted verbatim.
void export_csv(const LabeledDataset& dataset, const std::string& path);

/// Training-prefix view of a set of traces under a k-range (for encoder
/// fitting).
std::vector<TrainingPrefixes> training_prefixes(const std::vector<Trace>& traces,
                                                std::size_t first, std::size_t count,
                                                const KRange& range);

}  // namespace foe
