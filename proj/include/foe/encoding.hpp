#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "foe/event_log.hpp"

namespace foe {

struct EmptyTrainingSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EncoderSchemaMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One member of an encoder pipeline. A pipeline (ordered list) concatenates
/// member outputs, mirroring the encoder-set union of the model-building
/// procedure.
struct EncoderConfig {
    enum class Kind {
        LastNOneHot,   // one-hot of selected attribute values, last n events
        LastNNumeric,  // raw numeric attribute values, last n events
        TimeDeltas,    // timestamp increase w.r.t. the previous event, last n gaps
    };

    Kind kind;
    /// 0 means "fit to the maximal trace length of the training split".
    std::size_t n = 0;
    std::vector<std::string> attributes;  // LastNOneHot / LastNNumeric

    static EncoderConfig one_hot(std::vector<std::string> attrs, std::size_t n = 0) {
        return {Kind::LastNOneHot, n, std::move(attrs)};
    }
    static EncoderConfig numeric(std::vector<std::string> attrs, std::size_t n = 0) {
        return {Kind::LastNNumeric, n, std::move(attrs)};
    }
    static EncoderConfig time_deltas(std::size_t n = 0) { return {Kind::TimeDeltas, n, {}}; }
};

/// A trace prefix participating in training: the trace and the largest
/// prefix length used from it (vocabularies must only see training data).
struct TrainingPrefixes {
    const Trace* trace;
    std::size_t max_k;
};

/// Frozen encoder pipeline: per-attribute vocabularies and the resolved
/// window size n. encode() is pure and emits the same width for every
/// prefix; unseen values and padding positions encode as zeros.
class FittedEncoder {
public:
    static constexpr const char* kTimestampAttr = "time:timestamp";

    struct Block {
        EncoderConfig::Kind kind;
        std::size_t n = 1;
        std::vector<std::string> attributes;
        /// Per attribute: sorted (match key, display) pairs. Keys are
        /// kind-tagged so text "5" and number 5 stay distinct.
        std::vector<std::vector<std::pair<std::string, std::string>>> vocab;
    };

    std::size_t width() const { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    /// Encodes the k-length prefix of a trace into `out` (size width()).
    void encode_into(const Trace& trace, std::size_t k, std::span<double> out) const;

    std::vector<double> encode(const Trace& trace, std::size_t k) const;

    /// Rebuilds a fitted encoder from its serialized pieces (model files).
    static FittedEncoder from_blocks(std::vector<Block> blocks);

private:
    friend FittedEncoder fit_encoders(const std::vector<EncoderConfig>&,
                                      const std::vector<TrainingPrefixes>&);
    void rebuild_feature_names();

    std::vector<Block> blocks_;
    std::vector<std::string> feature_names_;
};

/// Fits vocabularies over every event that occurs in some training prefix
/// and resolves n = 0 to the maximal training trace length.
/// Throws EmptyTrainingSet when no prefixes are given.
FittedEncoder fit_encoders(const std::vector<EncoderConfig>& configs,
                           const std::vector<TrainingPrefixes>& training);

/// The match key used for vocabularies and distinct-value logic.
std::string encoder_value_key(const AttributeValue& v);

}  // namespace foe
