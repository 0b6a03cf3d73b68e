#include "foe/encoding.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace foe {
namespace {

double numeric_value(const AttributeValue& v) {
    if (v.is_number()) return v.as_number();
    if (v.is_timestamp()) return static_cast<double>(v.as_timestamp());
    return 0.0;  // missing information encodes as 0
}

std::int64_t timestamp_of(const Event& e) {
    const AttributeValue* v = e.find(FittedEncoder::kTimestampAttr);
    if (v && v->is_timestamp()) return v->as_timestamp();
    if (v && v->is_number()) return static_cast<std::int64_t>(v->as_number());
    return 0;
}

}  // namespace

std::string encoder_value_key(const AttributeValue& v) {
    if (v.is_text()) return "t" + v.as_text();
    if (v.is_number()) return "n" + format_double(v.as_number());
    if (v.is_boolean()) return v.as_boolean() ? "b1" : "b0";
    if (v.is_timestamp()) return "m" + std::to_string(v.as_timestamp());
    return "u";
}

FittedEncoder fit_encoders(const std::vector<EncoderConfig>& configs,
                           const std::vector<TrainingPrefixes>& training) {
    if (training.empty()) throw EmptyTrainingSet("no training prefixes to fit encoders on");
    bool any = false;
    std::size_t max_len = 1;
    for (const TrainingPrefixes& t : training) {
        if (t.max_k >= 1) any = true;
        max_len = std::max(max_len, t.trace->events.size());
    }
    if (!any || configs.empty())
        throw EmptyTrainingSet("no training prefixes to fit encoders on");

    FittedEncoder fitted;
    for (const EncoderConfig& config : configs) {
        FittedEncoder::Block block;
        block.kind = config.kind;
        block.n = config.n > 0 ? config.n : max_len;
        block.attributes = config.attributes;
        if (config.kind == EncoderConfig::Kind::LastNOneHot) {
            block.vocab.resize(config.attributes.size());
            for (std::size_t a = 0; a < config.attributes.size(); ++a) {
                std::map<std::string, std::string> seen;  // key -> display
                for (const TrainingPrefixes& t : training) {
                    std::size_t limit = std::min(t.max_k, t.trace->events.size());
                    for (std::size_t j = 0; j < limit; ++j) {
                        const AttributeValue* v = t.trace->events[j].find(config.attributes[a]);
                        if (v && !v->is_undefined())
                            seen.emplace(encoder_value_key(*v), v->to_display_string());
                    }
                }
                block.vocab[a].assign(seen.begin(), seen.end());
            }
        }
        fitted.blocks_.push_back(std::move(block));
    }
    fitted.rebuild_feature_names();
    return fitted;
}

FittedEncoder FittedEncoder::from_blocks(std::vector<Block> blocks) {
    FittedEncoder fitted;
    fitted.blocks_ = std::move(blocks);
    fitted.rebuild_feature_names();
    return fitted;
}

void FittedEncoder::rebuild_feature_names() {
    feature_names_.clear();
    for (const Block& block : blocks_) {
        // Oldest window position first, the most recent event last.
        for (std::size_t o = block.n; o-- > 0;) {
            std::string suffix = "@-" + std::to_string(o);
            switch (block.kind) {
                case EncoderConfig::Kind::LastNOneHot:
                    for (std::size_t a = 0; a < block.attributes.size(); ++a)
                        for (const auto& [key, display] : block.vocab[a])
                            feature_names_.push_back(block.attributes[a] + suffix + "=" + display);
                    break;
                case EncoderConfig::Kind::LastNNumeric:
                    for (const std::string& attr : block.attributes)
                        feature_names_.push_back(attr + suffix);
                    break;
                case EncoderConfig::Kind::TimeDeltas:
                    feature_names_.push_back("dt" + suffix);
                    break;
            }
        }
    }
}

void FittedEncoder::encode_into(const Trace& trace, std::size_t k, std::span<double> out) const {
    if (out.size() != width())
        throw EncoderSchemaMismatch("encoder emits width " + std::to_string(width()) +
                                    ", caller expects " + std::to_string(out.size()));
    std::size_t pos = 0;
    for (const Block& block : blocks_) {
        for (std::size_t o = block.n; o-- > 0;) {
            // Window position o steps back from the current event.
            std::int64_t j = static_cast<std::int64_t>(k) - static_cast<std::int64_t>(o);
            const Event* event =
                j >= 1 && j <= static_cast<std::int64_t>(k) ? &trace.events[j - 1] : nullptr;
            switch (block.kind) {
                case EncoderConfig::Kind::LastNOneHot:
                    for (std::size_t a = 0; a < block.attributes.size(); ++a) {
                        const auto& vocab = block.vocab[a];
                        std::size_t base = pos;
                        for (std::size_t i = 0; i < vocab.size(); ++i) out[base + i] = 0.0;
                        if (event) {
                            const AttributeValue* v = event->find(block.attributes[a]);
                            if (v && !v->is_undefined()) {
                                std::string key = encoder_value_key(*v);
                                auto it = std::lower_bound(
                                    vocab.begin(), vocab.end(), key,
                                    [](const auto& p, const std::string& k_) {
                                        return p.first < k_;
                                    });
                                if (it != vocab.end() && it->first == key)
                                    out[base + (it - vocab.begin())] = 1.0;
                            }
                        }
                        pos += vocab.size();
                    }
                    break;
                case EncoderConfig::Kind::LastNNumeric:
                    for (const std::string& attr : block.attributes) {
                        const AttributeValue* v = event ? event->find(attr) : nullptr;
                        out[pos++] = v ? numeric_value(*v) : 0.0;
                    }
                    break;
                case EncoderConfig::Kind::TimeDeltas: {
                    double delta = 0.0;
                    if (event && j >= 2) {
                        delta = static_cast<double>(timestamp_of(trace.events[j - 1]) -
                                                    timestamp_of(trace.events[j - 2]));
                    }
                    out[pos++] = delta;
                    break;
                }
            }
        }
    }
}

std::vector<double> FittedEncoder::encode(const Trace& trace, std::size_t k) const {
    std::vector<double> out(width(), 0.0);
    encode_into(trace, k, out);
    return out;
}

}  // namespace foe
