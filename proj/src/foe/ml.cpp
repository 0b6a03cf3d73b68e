#include "foe/ml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace foe {
namespace {

std::string label_of(const AttributeValue& v) { return v.to_display_string(); }

std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double dot_with_bias(std::span<const double> w, std::span<const double> x) {
    double z = w[x.size()];
    for (std::size_t i = 0; i < x.size(); ++i) z += w[i] * x[i];
    return z;
}

// ---------------------------------------------------------------------------
// CART

struct TreeBuilder {
    const LabeledDataset& data;
    const std::vector<double>& y;  // class index (classification) or value
    bool classification;
    std::size_t n_classes;
    std::size_t max_depth;
    std::size_t min_leaf;
    std::vector<TreeNode> nodes;

    std::int32_t build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                       std::size_t depth) {
        const std::size_t n = end - begin;
        const std::size_t node_id = nodes.size();
        nodes.emplace_back();

        std::vector<double> counts(classification ? n_classes : 0, 0.0);
        double sum = 0, sumsq = 0;
        for (std::size_t i = begin; i < end; ++i) {
            if (classification)
                counts[static_cast<std::size_t>(y[idx[i]])] += 1.0;
            else {
                sum += y[idx[i]];
                sumsq += y[idx[i]] * y[idx[i]];
            }
        }

        auto make_leaf = [&] {
            TreeNode& leaf = nodes[node_id];
            leaf.leaf = true;
            leaf.n = static_cast<double>(n);
            if (classification)
                leaf.class_counts = counts;
            else
                leaf.value = sum / static_cast<double>(n);
            return static_cast<std::int32_t>(node_id);
        };

        bool pure = false;
        if (classification) {
            pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
        } else {
            pure = sumsq - sum * sum / static_cast<double>(n) <= 1e-12;
        }
        if (pure || depth >= max_depth || n < 2 * min_leaf) return make_leaf();

        // Best split: strictly-better improvements with features and
        // thresholds visited in ascending order keep ties deterministic
        // (lowest feature index, then lowest threshold).
        const std::size_t width = data.width();
        double best_score = std::numeric_limits<double>::infinity();
        std::size_t best_feature = 0;
        double best_threshold = 0;
        bool found = false;

        std::vector<std::size_t> order(idx.begin() + begin, idx.begin() + end);
        std::vector<double> left_counts(classification ? n_classes : 0);
        for (std::size_t f = 0; f < width; ++f) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return data.row(a)[f] < data.row(b)[f];
            });
            if (data.row(order.front())[f] == data.row(order.back())[f]) continue;

            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            double left_sum = 0, left_sumsq = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                std::size_t sample = order[i];
                if (classification)
                    left_counts[static_cast<std::size_t>(y[sample])] += 1.0;
                else {
                    left_sum += y[sample];
                    left_sumsq += y[sample] * y[sample];
                }
                double v = data.row(sample)[f];
                double next = data.row(order[i + 1])[f];
                if (v == next) continue;
                std::size_t n_left = i + 1, n_right = n - n_left;
                if (n_left < min_leaf || n_right < min_leaf) continue;

                double score;
                if (classification) {
                    double gl = static_cast<double>(n_left);
                    double gr = static_cast<double>(n_right);
                    double sl = 0, sr = 0;
                    for (std::size_t c = 0; c < n_classes; ++c) {
                        double cl = left_counts[c];
                        double cr = counts[c] - cl;
                        sl += cl * cl;
                        sr += cr * cr;
                    }
                    // weighted Gini: sum over children of n_child * (1 - sum p^2)
                    score = (gl - sl / gl) + (gr - sr / gr);
                } else {
                    double right_sum = sum - left_sum;
                    double right_sumsq = sumsq - left_sumsq;
                    double sse_l = left_sumsq - left_sum * left_sum / static_cast<double>(n_left);
                    double sse_r =
                        right_sumsq - right_sum * right_sum / static_cast<double>(n_right);
                    score = sse_l + sse_r;
                }
                if (score < best_score) {
                    double threshold = v + (next - v) / 2;
                    if (!(threshold > v && threshold < next)) threshold = v;
                    best_score = score;
                    best_feature = f;
                    best_threshold = threshold;
                    found = true;
                }
            }
        }
        if (!found) return make_leaf();

        auto mid_it = std::stable_partition(
            idx.begin() + begin, idx.begin() + end,
            [&](std::size_t s) { return data.row(s)[best_feature] <= best_threshold; });
        std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());
        if (mid == begin || mid == end) return make_leaf();  // numeric safety net

        nodes[node_id].leaf = false;
        nodes[node_id].feature = best_feature;
        nodes[node_id].threshold = best_threshold;
        nodes[node_id].n = static_cast<double>(n);
        std::int32_t left = build(idx, begin, mid, depth + 1);
        std::int32_t right = build(idx, mid, end, depth + 1);
        nodes[node_id].left = left;
        nodes[node_id].right = right;
        return static_cast<std::int32_t>(node_id);
    }
};

const TreeNode& descend(const std::vector<TreeNode>& nodes, std::span<const double> x) {
    const TreeNode* node = &nodes[0];
    while (!node->leaf)
        node = x[node->feature] <= node->threshold ? &nodes[node->left] : &nodes[node->right];
    return *node;
}

// ---------------------------------------------------------------------------
// linear algebra for OLS/ridge

// Solves A w = b for symmetric positive semi-definite A by Cholesky,
// escalating a diagonal jitter when the factorization stalls (one-hot blocks
// plus an intercept are collinear by construction).
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t d) {
    for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-10 : jitter * 100) {
        std::vector<double> m = a;
        if (jitter > 0)
            for (std::size_t i = 0; i < d; ++i) m[i * d + i] += jitter;
        std::vector<double> chol(d * d, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < d && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = m[i * d + j];
                for (std::size_t k = 0; k < j; ++k) s -= chol[i * d + k] * chol[j * d + k];
                if (i == j) {
                    if (s <= 1e-14) {
                        ok = false;
                        break;
                    }
                    chol[i * d + i] = std::sqrt(s);
                } else {
                    chol[i * d + j] = s / chol[j * d + j];
                }
            }
        }
        if (!ok) {
            if (jitter > 1.0) return std::vector<double>(d, 0.0);
            continue;
        }
        std::vector<double> yv(d);
        for (std::size_t i = 0; i < d; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= chol[i * d + k] * yv[k];
            yv[i] = s / chol[i * d + i];
        }
        std::vector<double> w(d);
        for (std::size_t i = d; i-- > 0;) {
            double s = yv[i];
            for (std::size_t k = i + 1; k < d; ++k) s -= chol[k * d + i] * w[k];
            w[i] = s / chol[i * d + i];
        }
        return w;
    }
}

std::vector<double> train_logistic_binary(const LabeledDataset& data,
                                          const std::vector<double>& y01,
                                          const ModelSpec& spec) {
    const std::size_t width = data.width();
    std::vector<double> w(width + 1, 0.0);
    for (std::size_t it = 0; it < spec.iterations; ++it) {
        std::vector<double> g = logistic_gradient(data.matrix, data.n_rows, width, y01, w,
                                                  spec.l2_lambda);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= spec.learning_rate * g[i];
    }
    return w;
}

}  // namespace

double logistic_loss(std::span<const double> matrix, std::size_t n, std::size_t width,
                     std::span<const double> y01, std::span<const double> weights, double l2) {
    double loss = 0;
    for (std::size_t r = 0; r < n; ++r) {
        double z = dot_with_bias(weights, matrix.subspan(r * width, width));
        // log(1+exp(..)) in the stable branch form
        double log1pexp = z >= 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += log1pexp - y01[r] * z;
    }
    loss /= static_cast<double>(n);
    for (std::size_t i = 0; i < width; ++i) loss += 0.5 * l2 * weights[i] * weights[i];
    return loss;
}

std::vector<double> logistic_gradient(std::span<const double> matrix, std::size_t n,
                                      std::size_t width, std::span<const double> y01,
                                      std::span<const double> weights, double l2) {
    std::vector<double> g(width + 1, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        auto x = matrix.subspan(r * width, width);
        double err = sigmoid(dot_with_bias(weights, x)) - y01[r];
        for (std::size_t i = 0; i < width; ++i) g[i] += err * x[i];
        g[width] += err;
    }
    for (double& v : g) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < width; ++i) g[i] += l2 * weights[i];
    return g;
}

TrainedModel train(const LabeledDataset& dataset, const ModelSpec& spec) {
    if (dataset.n_rows == 0) throw EmptyDataset("cannot train on an empty dataset");
    bool classification = dataset.task == Task::Classification;
    if (spec.kind == ModelSpec::Kind::LinearRegression && classification)
        throw TaskMismatch("linear regression needs a regression dataset");
    if (spec.kind == ModelSpec::Kind::LogisticRegression && !classification)
        throw TaskMismatch("logistic regression needs a classification dataset");

    TrainedModel model;
    model.task_ = dataset.task;
    model.kind_ = spec.kind;
    model.feature_names_ = dataset.feature_names;

    std::vector<double> y(dataset.n_rows);
    if (classification) {
        std::map<std::string, std::size_t> index;
        for (const AttributeValue& t : dataset.targets) index.emplace(label_of(t), 0);
        std::size_t next = 0;
        for (auto& [label, idx] : index) {
            idx = next++;
            model.labels_.push_back(label);
        }
        for (std::size_t i = 0; i < dataset.n_rows; ++i)
            y[i] = static_cast<double>(index[label_of(dataset.targets[i])]);
    } else {
        for (std::size_t i = 0; i < dataset.n_rows; ++i) {
            const AttributeValue& t = dataset.targets[i];
            y[i] = t.is_timestamp() ? static_cast<double>(t.as_timestamp()) : t.as_number();
        }
    }

    switch (spec.kind) {
        case ModelSpec::Kind::ZeroR: {
            if (classification) {
                model.class_priors_.assign(model.labels_.size(), 0.0);
                for (double c : y) model.class_priors_[static_cast<std::size_t>(c)] += 1.0;
                for (double& p : model.class_priors_) p /= static_cast<double>(dataset.n_rows);
            } else {
                model.mean_ = std::accumulate(y.begin(), y.end(), 0.0) /
                              static_cast<double>(dataset.n_rows);
            }
            break;
        }
        case ModelSpec::Kind::DecisionTree: {
            TreeBuilder builder{dataset, y, classification, model.labels_.size(), spec.max_depth,
                                std::max<std::size_t>(spec.min_samples_leaf, 1), {}};
            std::vector<std::size_t> idx(dataset.n_rows);
            std::iota(idx.begin(), idx.end(), 0);
            builder.build(idx, 0, dataset.n_rows, 0);
            model.nodes_ = std::move(builder.nodes);
            break;
        }
        case ModelSpec::Kind::LinearRegression: {
            const std::size_t w = dataset.width();
            const std::size_t d = w + 1;
            std::vector<double> a(d * d, 0.0), b(d, 0.0);
            for (std::size_t r = 0; r < dataset.n_rows; ++r) {
                auto x = dataset.row(r);
                for (std::size_t i = 0; i < w; ++i) {
                    for (std::size_t j = i; j < w; ++j) a[i * d + j] += x[i] * x[j];
                    a[i * d + w] += x[i];
                    b[i] += x[i] * y[r];
                }
                a[w * d + w] += 1.0;
                b[w] += y[r];
            }
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < i; ++j) a[i * d + j] = a[j * d + i];
            for (std::size_t i = 0; i < w; ++i) a[i * d + i] += spec.ridge_lambda;  // bias free
            model.weights_ = solve_spd(std::move(a), std::move(b), d);
            break;
        }
        case ModelSpec::Kind::LogisticRegression: {
            if (model.labels_.size() <= 2) {
                std::vector<double> y01(dataset.n_rows);
                for (std::size_t i = 0; i < dataset.n_rows; ++i) y01[i] = y[i] == 1.0 ? 1.0 : 0.0;
                model.ovr_.push_back(train_logistic_binary(dataset, y01, spec));
            } else {
                for (std::size_t c = 0; c < model.labels_.size(); ++c) {
                    std::vector<double> y01(dataset.n_rows);
                    for (std::size_t i = 0; i < dataset.n_rows; ++i)
                        y01[i] = y[i] == static_cast<double>(c) ? 1.0 : 0.0;
                    model.ovr_.push_back(train_logistic_binary(dataset, y01, spec));
                }
            }
            break;
        }
    }
    return model;
}

void TrainedModel::check_width(std::size_t got) const {
    if (got != feature_names_.size())
        throw SchemaMismatch("feature vector has width " + std::to_string(got) + ", model expects " +
                             std::to_string(feature_names_.size()));
}

std::vector<double> TrainedModel::predict_proba(std::span<const double> features) const {
    check_width(features.size());
    if (task_ != Task::Classification)
        throw TaskMismatch("predict_proba is for classification models");
    const std::size_t m = labels_.size();
    switch (kind_) {
        case ModelSpec::Kind::ZeroR: return class_priors_;
        case ModelSpec::Kind::DecisionTree: {
            const TreeNode& leaf = descend(nodes_, features);
            std::vector<double> proba(m, 0.0);
            for (std::size_t c = 0; c < m; ++c) proba[c] = leaf.class_counts[c] / leaf.n;
            return proba;
        }
        case ModelSpec::Kind::LogisticRegression: {
            if (m <= 2) {
                double p = sigmoid(dot_with_bias(ovr_[0], features));
                return m == 1 ? std::vector<double>{1.0} : std::vector<double>{1.0 - p, p};
            }
            std::vector<double> proba(m, 0.0);
            double total = 0;
            for (std::size_t c = 0; c < m; ++c) {
                proba[c] = sigmoid(dot_with_bias(ovr_[c], features));
                total += proba[c];
            }
            if (total <= 0)
                std::fill(proba.begin(), proba.end(), 1.0 / static_cast<double>(m));
            else
                for (double& p : proba) p /= total;
            return proba;
        }
        default: throw TaskMismatch("model kind cannot score classification");
    }
}

double TrainedModel::predict_value(std::span<const double> features) const {
    check_width(features.size());
    if (task_ != Task::Regression)
        throw TaskMismatch("predict_value is for regression models");
    switch (kind_) {
        case ModelSpec::Kind::ZeroR: return mean_;
        case ModelSpec::Kind::DecisionTree: return descend(nodes_, features).value;
        case ModelSpec::Kind::LinearRegression: return dot_with_bias(weights_, features);
        default: throw TaskMismatch("model kind cannot score regression");
    }
}

TrainedModel::Prediction TrainedModel::predict(std::span<const double> features) const {
    if (task_ == Task::Regression) return {AttributeValue::number(predict_value(features)), 0.0};
    std::vector<double> proba = predict_proba(features);
    std::size_t best = argmax_lowest(proba);
    double score = labels_.size() == 2 ? proba[1] : proba[best];
    return {AttributeValue::text(labels_[best]), score};
}

// ---------------------------------------------------------------------------
// metrics

double rank_auc(const std::vector<double>& scores, const std::vector<bool>& positives) {
    std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (bool p : positives) n_pos += p ? 1 : 0;
    std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t)
            if (positives[order[t]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1) / 2.0) / (np * nn);
}

Metrics compute_classification_metrics(const std::vector<std::string>& truths,
                                       const std::vector<ScoredLabel>& predictions,
                                       const std::vector<std::string>& model_labels) {
    if (truths.empty() || truths.size() != predictions.size())
        throw std::invalid_argument("metrics need equally many truths and predictions");

    Metrics m;
    m.task = Task::Classification;
    m.n_test = truths.size();
    const std::size_t n = truths.size();

    std::map<std::string, std::size_t> support;
    for (const std::string& t : truths) ++support[t];

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (truths[i] == predictions[i].label) ++correct;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(n);

    auto label_index = [&](const std::string& label) -> std::optional<std::size_t> {
        auto it = std::lower_bound(model_labels.begin(), model_labels.end(), label);
        if (it == model_labels.end() || *it != label) return std::nullopt;
        return static_cast<std::size_t>(it - model_labels.begin());
    };

    // Support-weighted one-vs-rest AUC over the truth classes; a class the
    // model has no score for gets a constant 0 score (ties -> 0.5).
    if (support.size() == 1) {
        m.auc = 0.5;
        m.auc_degenerate = true;
    } else {
        double weighted = 0;
        for (const auto& [label, count] : support) {
            std::optional<std::size_t> idx = label_index(label);
            std::vector<double> scores(n, 0.0);
            std::vector<bool> positives(n, false);
            for (std::size_t i = 0; i < n; ++i) {
                if (idx && *idx < predictions[i].proba.size()) scores[i] = predictions[i].proba[*idx];
                positives[i] = truths[i] == label;
            }
            weighted += static_cast<double>(count) * rank_auc(scores, positives);
        }
        m.auc = weighted / static_cast<double>(n);
    }

    double weighted_p = 0, weighted_r = 0;
    for (const auto& [label, count] : support) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (predictions[i].label == label) {
                if (truths[i] == label)
                    ++tp;
                else
                    ++fp;
            }
        }
        double precision;
        if (tp + fp == 0) {
            precision = 0.0;
            m.precision_flagged = true;
        } else {
            precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        }
        double recall = static_cast<double>(tp) / static_cast<double>(count);
        weighted_p += static_cast<double>(count) * precision;
        weighted_r += static_cast<double>(count) * recall;
    }
    m.weighted_precision = weighted_p / static_cast<double>(n);
    m.weighted_recall = weighted_r / static_cast<double>(n);
    m.f_measure = (m.weighted_precision + m.weighted_recall) > 0
                      ? 2 * m.weighted_precision * m.weighted_recall /
                            (m.weighted_precision + m.weighted_recall)
                      : 0.0;
    return m;
}

Metrics compute_regression_metrics(const std::vector<double>& truths,
                                   const std::vector<double>& predictions) {
    if (truths.empty() || truths.size() != predictions.size())
        throw std::invalid_argument("metrics need equally many truths and predictions");
    Metrics m;
    m.task = Task::Regression;
    m.n_test = truths.size();
    double abs_sum = 0, sq_sum = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        double err = truths[i] - predictions[i];
        abs_sum += std::fabs(err);
        sq_sum += err * err;
    }
    m.mae = abs_sum / static_cast<double>(truths.size());
    m.rmse = std::sqrt(sq_sum / static_cast<double>(truths.size()));
    return m;
}

// ---------------------------------------------------------------------------
// holdout

HoldoutResult evaluate_holdout(const AnalyticRule& rule, const EventLog& log,
                               const std::vector<EncoderConfig>& encoders, const ModelSpec& spec,
                               const HoldoutOptions& options) {
    const std::size_t n_traces = log.size();
    const std::size_t n_train =
        std::min<std::size_t>(n_traces,
                              static_cast<std::size_t>(
                                  std::ceil(options.split * static_cast<double>(n_traces))));

    std::vector<TrainingPrefixes> view =
        training_prefixes(log.traces(), 0, n_train, options.k_range);
    if (view.empty()) throw EmptySplit("training split yields no prefixes");
    FittedEncoder encoder = fit_encoders(encoders, view);

    LabeledDataset train_set, test_set;
    try {
        train_set = build_dataset_range(rule, log.traces(), 0, n_train, encoder, options.k_range,
                                        options.n_threads);
    } catch (const EmptyDataset&) {
        throw EmptySplit("training split yields no rows");
    }
    try {
        test_set = build_dataset_range(rule, log.traces(), n_train, n_traces - n_train, encoder,
                                       options.k_range, options.n_threads);
    } catch (const EmptyDataset&) {
        throw EmptySplit("test split yields no rows");
    }
    if (train_set.n_rows == 0) throw EmptySplit("training split yields no rows");
    if (test_set.n_rows == 0) throw EmptySplit("test split yields no rows");

    HoldoutResult result;
    result.model = train(train_set, spec);
    result.model.attach_encoder(encoder);
    result.n_train_rows = train_set.n_rows;
    result.n_test_rows = test_set.n_rows;

    if (train_set.task == Task::Classification) {
        std::vector<std::string> truths(test_set.n_rows);
        std::vector<ScoredLabel> predictions(test_set.n_rows);
        for (std::size_t i = 0; i < test_set.n_rows; ++i) {
            truths[i] = label_of(test_set.targets[i]);
            TrainedModel::Prediction p = result.model.predict(test_set.row(i));
            predictions[i] = {p.value.as_text(), result.model.predict_proba(test_set.row(i))};
        }
        result.metrics =
            compute_classification_metrics(truths, predictions, result.model.labels());
    } else {
        std::vector<double> truths(test_set.n_rows), predictions(test_set.n_rows);
        for (std::size_t i = 0; i < test_set.n_rows; ++i) {
            const AttributeValue& t = test_set.targets[i];
            truths[i] = t.is_timestamp() ? static_cast<double>(t.as_timestamp()) : t.as_number();
            predictions[i] = result.model.predict_value(test_set.row(i));
        }
        result.metrics = compute_regression_metrics(truths, predictions);
    }
    return result;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

struct LineParser {
    std::string line;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < line.size() && line[pos] == ' ') ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= line.size();
    }
    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ') ++pos;
        if (start == pos) throw VersionMismatch("corrupt model file");
        return line.substr(start, pos - start);
    }
    std::string quoted() {
        skip_ws();
        if (pos >= line.size() || line[pos] != '"') throw VersionMismatch("corrupt model file");
        ++pos;
        std::string out;
        while (pos < line.size() && line[pos] != '"') {
            if (line[pos] == '\\' && pos + 1 < line.size()) ++pos;
            out += line[pos++];
        }
        if (pos >= line.size()) throw VersionMismatch("corrupt model file");
        ++pos;
        return out;
    }
    double number() {
        std::string w = word();
        double d = 0;
        auto res = std::from_chars(w.data(), w.data() + w.size(), d);
        if (res.ec != std::errc{} || res.ptr != w.data() + w.size())
            throw VersionMismatch("corrupt model file");
        return d;
    }
    std::int64_t integer() {
        std::string w = word();
        std::int64_t v = 0;
        auto res = std::from_chars(w.data(), w.data() + w.size(), v);
        if (res.ec != std::errc{} || res.ptr != w.data() + w.size())
            throw VersionMismatch("corrupt model file");
        return v;
    }
};

struct ModelReader {
    std::istream& in;

    LineParser next_line() {
        std::string line;
        for (;;) {
            if (!std::getline(in, line)) throw VersionMismatch("truncated model file");
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return LineParser{line};
        }
    }

    LineParser expect(const std::string& head) {
        LineParser p = next_line();
        if (p.word() != head) throw VersionMismatch("corrupt model file");
        return p;
    }
};

const char* kind_name(ModelSpec::Kind k) {
    switch (k) {
        case ModelSpec::Kind::ZeroR: return "zeror";
        case ModelSpec::Kind::DecisionTree: return "tree";
        case ModelSpec::Kind::LinearRegression: return "linear";
        case ModelSpec::Kind::LogisticRegression: return "logistic";
    }
    return "?";
}

const char* block_name(EncoderConfig::Kind k) {
    switch (k) {
        case EncoderConfig::Kind::LastNOneHot: return "onehot";
        case EncoderConfig::Kind::LastNNumeric: return "numeric";
        case EncoderConfig::Kind::TimeDeltas: return "timedeltas";
    }
    return "?";
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
    std::ostringstream out;
    out << "foe-predict-model v1 "
        << (model.task() == Task::Classification ? "classification" : "regression") << '\n';
    out << "kind " << kind_name(model.kind()) << '\n';
    out << "features " << model.feature_names_.size() << '\n';
    for (const std::string& f : model.feature_names_) out << "f " << quote(f) << '\n';
    out << "labels " << model.labels_.size() << '\n';
    for (const std::string& l : model.labels_) out << "l " << quote(l) << '\n';

    out << "encoder " << (model.encoder_ ? 1 : 0) << '\n';
    if (model.encoder_) {
        const auto& blocks = model.encoder_->blocks();
        out << "blocks " << blocks.size() << '\n';
        for (const auto& block : blocks) {
            out << "block " << block_name(block.kind) << ' ' << block.n << ' '
                << block.attributes.size() << '\n';
            for (const std::string& a : block.attributes) out << "a " << quote(a) << '\n';
            if (block.kind == EncoderConfig::Kind::LastNOneHot) {
                for (std::size_t i = 0; i < block.vocab.size(); ++i) {
                    out << "vocab " << i << ' ' << block.vocab[i].size() << '\n';
                    for (const auto& [key, display] : block.vocab[i])
                        out << "v " << quote(key) << ' ' << quote(display) << '\n';
                }
            }
        }
    }

    out << "params\n";
    switch (model.kind()) {
        case ModelSpec::Kind::ZeroR:
            if (model.task() == Task::Classification) {
                out << "priors";
                for (double p : model.class_priors_) out << ' ' << format_double(p);
                out << '\n';
            } else {
                out << "mean " << format_double(model.mean_) << '\n';
            }
            break;
        case ModelSpec::Kind::DecisionTree:
            out << "nodes " << model.nodes_.size() << '\n';
            for (const TreeNode& node : model.nodes_) {
                if (!node.leaf) {
                    out << "split " << node.feature << ' ' << format_double(node.threshold) << ' '
                        << node.left << ' ' << node.right << ' ' << format_double(node.n) << '\n';
                } else if (model.task() == Task::Classification) {
                    out << "leafc " << node.class_counts.size();
                    for (double c : node.class_counts) out << ' ' << format_double(c);
                    out << '\n';
                } else {
                    out << "leafr " << format_double(node.value) << ' ' << format_double(node.n)
                        << '\n';
                }
            }
            break;
        case ModelSpec::Kind::LinearRegression:
            out << "weights " << model.weights_.size();
            for (double w : model.weights_) out << ' ' << format_double(w);
            out << '\n';
            break;
        case ModelSpec::Kind::LogisticRegression:
            out << "ovr " << model.ovr_.size() << '\n';
            for (const auto& w : model.ovr_) {
                out << "w " << w.size();
                for (double v : w) out << ' ' << format_double(v);
                out << '\n';
            }
            break;
    }
    out << "end\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << out.str();
    if (!f) throw IoError("cannot write '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    ModelReader reader{f};

    TrainedModel model;
    {
        LineParser p = reader.next_line();
        if (p.word() != "foe-predict-model" || p.word() != "v1")
            throw VersionMismatch("not a foe-predict-model v1 file");
        std::string task = p.word();
        if (task == "classification")
            model.task_ = Task::Classification;
        else if (task == "regression")
            model.task_ = Task::Regression;
        else
            throw VersionMismatch("unknown task kind");
    }
    {
        LineParser p = reader.expect("kind");
        std::string kind = p.word();
        if (kind == "zeror")
            model.kind_ = ModelSpec::Kind::ZeroR;
        else if (kind == "tree")
            model.kind_ = ModelSpec::Kind::DecisionTree;
        else if (kind == "linear")
            model.kind_ = ModelSpec::Kind::LinearRegression;
        else if (kind == "logistic")
            model.kind_ = ModelSpec::Kind::LogisticRegression;
        else
            throw VersionMismatch("unknown model kind");
    }
    {
        std::int64_t n = reader.expect("features").integer();
        for (std::int64_t i = 0; i < n; ++i)
            model.feature_names_.push_back(reader.expect("f").quoted());
    }
    {
        std::int64_t n = reader.expect("labels").integer();
        for (std::int64_t i = 0; i < n; ++i) model.labels_.push_back(reader.expect("l").quoted());
    }
    if (reader.expect("encoder").integer() == 1) {
        std::int64_t n_blocks = reader.expect("blocks").integer();
        std::vector<FittedEncoder::Block> blocks;
        for (std::int64_t bi = 0; bi < n_blocks; ++bi) {
            LineParser p = reader.expect("block");
            FittedEncoder::Block block;
            std::string kind = p.word();
            if (kind == "onehot")
                block.kind = EncoderConfig::Kind::LastNOneHot;
            else if (kind == "numeric")
                block.kind = EncoderConfig::Kind::LastNNumeric;
            else if (kind == "timedeltas")
                block.kind = EncoderConfig::Kind::TimeDeltas;
            else
                throw VersionMismatch("unknown encoder block kind");
            block.n = static_cast<std::size_t>(p.integer());
            std::int64_t n_attrs = p.integer();
            for (std::int64_t a = 0; a < n_attrs; ++a)
                block.attributes.push_back(reader.expect("a").quoted());
            if (block.kind == EncoderConfig::Kind::LastNOneHot) {
                block.vocab.resize(block.attributes.size());
                for (std::size_t a = 0; a < block.attributes.size(); ++a) {
                    LineParser vp = reader.expect("vocab");
                    std::size_t attr_index = static_cast<std::size_t>(vp.integer());
                    if (attr_index != a) throw VersionMismatch("corrupt model file");
                    std::int64_t count = vp.integer();
                    for (std::int64_t v = 0; v < count; ++v) {
                        LineParser entry = reader.expect("v");
                        std::string key = entry.quoted();
                        std::string display = entry.quoted();
                        block.vocab[a].emplace_back(std::move(key), std::move(display));
                    }
                }
            }
            blocks.push_back(std::move(block));
        }
        model.encoder_ = FittedEncoder::from_blocks(std::move(blocks));
        if (model.encoder_->width() != model.feature_names_.size())
            throw VersionMismatch("encoder width disagrees with feature schema");
    }

    reader.expect("params");
    switch (model.kind_) {
        case ModelSpec::Kind::ZeroR:
            if (model.task_ == Task::Classification) {
                LineParser p = reader.expect("priors");
                for (std::size_t i = 0; i < model.labels_.size(); ++i)
                    model.class_priors_.push_back(p.number());
            } else {
                model.mean_ = reader.expect("mean").number();
            }
            break;
        case ModelSpec::Kind::DecisionTree: {
            std::int64_t n = reader.expect("nodes").integer();
            for (std::int64_t i = 0; i < n; ++i) {
                LineParser p = reader.next_line();
                std::string head = p.word();
                TreeNode node;
                if (head == "split") {
                    node.leaf = false;
                    node.feature = static_cast<std::size_t>(p.integer());
                    node.threshold = p.number();
                    node.left = static_cast<std::int32_t>(p.integer());
                    node.right = static_cast<std::int32_t>(p.integer());
                    node.n = p.number();
                    // children strictly follow their parent in preorder
                    if (node.feature >= model.feature_names_.size() || node.left <= i ||
                        node.right <= i || node.left >= n || node.right >= n)
                        throw VersionMismatch("corrupt model file");
                } else if (head == "leafc" && model.task_ == Task::Classification) {
                    std::int64_t m = p.integer();
                    if (m != static_cast<std::int64_t>(model.labels_.size()))
                        throw VersionMismatch("corrupt model file");
                    node.n = 0;
                    for (std::int64_t c = 0; c < m; ++c) {
                        node.class_counts.push_back(p.number());
                        node.n += node.class_counts.back();
                    }
                    if (node.n <= 0) throw VersionMismatch("corrupt model file");
                } else if (head == "leafr" && model.task_ == Task::Regression) {
                    node.value = p.number();
                    node.n = p.number();
                } else {
                    throw VersionMismatch("corrupt model file");
                }
                model.nodes_.push_back(std::move(node));
            }
            if (model.nodes_.empty()) throw VersionMismatch("corrupt model file");
            break;
        }
        case ModelSpec::Kind::LinearRegression: {
            LineParser p = reader.expect("weights");
            std::int64_t n = p.integer();
            if (n != static_cast<std::int64_t>(model.feature_names_.size() + 1))
                throw VersionMismatch("corrupt model file");
            for (std::int64_t i = 0; i < n; ++i) model.weights_.push_back(p.number());
            break;
        }
        case ModelSpec::Kind::LogisticRegression: {
            std::int64_t n = reader.expect("ovr").integer();
            for (std::int64_t c = 0; c < n; ++c) {
                LineParser p = reader.expect("w");
                std::int64_t m = p.integer();
                if (m != static_cast<std::int64_t>(model.feature_names_.size() + 1))
                    throw VersionMismatch("corrupt model file");
                std::vector<double> w;
                for (std::int64_t i = 0; i < m; ++i) w.push_back(p.number());
                model.ovr_.push_back(std::move(w));
            }
            break;
        }
    }
    reader.expect("end");
    return model;
}

}  // namespace foe
