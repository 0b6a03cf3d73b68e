#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "foe/labeling.hpp"

namespace foe {

struct TaskMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptySplit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelSpec {
    enum class Kind { ZeroR, DecisionTree, LinearRegression, LogisticRegression };

    Kind kind = Kind::ZeroR;
    // decision tree
    std::size_t max_depth = 10;
    std::size_t min_samples_leaf = 1;
    // linear regression
    double ridge_lambda = 0.0;
    // logistic regression
    double learning_rate = 0.1;
    std::size_t iterations = 500;
    double l2_lambda = 0.0;
    // kept for reproducibility bookkeeping; all trainers are deterministic
    std::uint64_t seed = 0;

    static ModelSpec zeror() { return {}; }
    static ModelSpec tree(std::size_t depth = 10, std::size_t min_leaf = 1) {
        ModelSpec s;
        s.kind = Kind::DecisionTree;
        s.max_depth = depth;
        s.min_samples_leaf = min_leaf;
        return s;
    }
    static ModelSpec linear(double ridge = 0.0) {
        ModelSpec s;
        s.kind = Kind::LinearRegression;
        s.ridge_lambda = ridge;
        return s;
    }
    static ModelSpec logistic(double lr = 0.1, std::size_t iters = 500, double l2 = 0.0) {
        ModelSpec s;
        s.kind = Kind::LogisticRegression;
        s.learning_rate = lr;
        s.iterations = iters;
        s.l2_lambda = l2;
        return s;
    }
};

/// Per-run evaluation record: classification scores or regression errors.
struct Metrics {
    Task task = Task::Classification;
    std::size_t n_test = 0;
    // classification
    double accuracy = 0;
    double auc = 0;
    double weighted_precision = 0;
    double weighted_recall = 0;
    double f_measure = 0;
    bool auc_degenerate = false;     // single-class truths, AUC reported as 0.5
    bool precision_flagged = false;  // a class was never predicted, its precision counted 0
    // regression (milliseconds stay milliseconds; display conversion is the CLI's job)
    double mae = 0;
    double rmse = 0;
};

struct TreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<double> class_counts;  // classification leaves
    double value = 0;                  // regression leaves
    double n = 0;
};

class TrainedModel {
public:
    struct Prediction {
        AttributeValue value;
        double score;
    };

    Task task() const { return task_; }
    ModelSpec::Kind kind() const { return kind_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Classification: (label, positive-class probability) where the
    /// positive class is the last label in sorted order for binary tasks and
    /// the predicted label otherwise. Regression: (number, 0).
    /// Throws SchemaMismatch on a wrong feature width.
    Prediction predict(std::span<const double> features) const;

    /// Per-label probabilities aligned with labels(); classification only.
    std::vector<double> predict_proba(std::span<const double> features) const;

    double predict_value(std::span<const double> features) const;

    /// The fitted encoder travels with the model so a saved model can score
    /// raw trace prefixes on its own.
    const std::optional<FittedEncoder>& encoder() const { return encoder_; }
    void attach_encoder(FittedEncoder enc) { encoder_ = std::move(enc); }

private:
    friend TrainedModel train(const LabeledDataset&, const ModelSpec&);
    friend void save_model(const TrainedModel&, const std::string&);
    friend TrainedModel load_model(const std::string&);

    void check_width(std::size_t got) const;

    Task task_ = Task::Classification;
    ModelSpec::Kind kind_ = ModelSpec::Kind::ZeroR;
    std::vector<std::string> feature_names_;
    std::vector<std::string> labels_;      // sorted classification vocabulary
    std::vector<double> class_priors_;     // zeror classification
    double mean_ = 0;                      // zeror regression
    std::vector<TreeNode> nodes_;          // decision tree
    std::vector<double> weights_;          // linear regression (bias last)
    std::vector<std::vector<double>> ovr_; // logistic one-vs-rest (bias last)
    std::optional<FittedEncoder> encoder_;
};

/// Trains a model on a labeled dataset. ZeroR and trees handle both tasks;
/// linear regression needs a regression dataset and logistic regression a
/// classification one (TaskMismatch otherwise). Training is deterministic.
TrainedModel train(const LabeledDataset& dataset, const ModelSpec& spec);

// --- metrics ---------------------------------------------------------------

struct ScoredLabel {
    std::string label;
    std::vector<double> proba;  // aligned with the model's label vocabulary
};

/// Accuracy, tie-aware rank AUC (support-weighted one-vs-rest for more than
/// two classes), precision/recall weighted by true-class support, and the
/// F-measure of the weighted precision and recall.
Metrics compute_classification_metrics(const std::vector<std::string>& truths,
                                       const std::vector<ScoredLabel>& predictions,
                                       const std::vector<std::string>& model_labels);

Metrics compute_regression_metrics(const std::vector<double>& truths,
                                   const std::vector<double>& predictions);

/// Rank-based AUC with average ranks on ties; 0.5 when a class is empty.
double rank_auc(const std::vector<double>& scores, const std::vector<bool>& positives);

// --- logistic internals exposed for gradient verification -------------------

/// Mean cross-entropy plus (l2/2)*||w||^2 over the non-bias weights.
/// `matrix` is row-major n x width; weights has width+1 entries (bias last).
double logistic_loss(std::span<const double> matrix, std::size_t n, std::size_t width,
                     std::span<const double> y01, std::span<const double> weights, double l2);

std::vector<double> logistic_gradient(std::span<const double> matrix, std::size_t n,
                                      std::size_t width, std::span<const double> y01,
                                      std::span<const double> weights, double l2);

// --- evaluation driver -------------------------------------------------------

struct HoldoutOptions {
    double split = 2.0 / 3.0;  // fraction of traces, by log order, for training
    KRange k_range;
    int n_threads = 0;
};

struct HoldoutResult {
    Metrics metrics;
    std::size_t n_train_rows = 0;
    std::size_t n_test_rows = 0;
    TrainedModel model;
};

/// The holdout protocol: first ceil(split*N) traces train (encoders, label
/// vocabulary, model), the rest test; both sides labeled with the same
/// k-range. Throws EmptySplit when either side yields no rows.
HoldoutResult evaluate_holdout(const AnalyticRule& rule, const EventLog& log,
                               const std::vector<EncoderConfig>& encoders, const ModelSpec& spec,
                               const HoldoutOptions& options = {});

// --- persistence -------------------------------------------------------------

/// Versioned UTF-8 text format, header "foe-predict-model v1 <kind>".
/// Doubles are written in shortest round-trip form, so load(save(m)) scores
/// identically to m.
void save_model(const TrainedModel& model, const std::string& path);

/// Throws IoError when unreadable and VersionMismatch on a bad header or any
/// corruption: no partial models.
TrainedModel load_model(const std::string& path);

}  // namespace foe
