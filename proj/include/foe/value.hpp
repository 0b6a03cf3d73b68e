#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace foe {

/// The value of an event attribute. Undefined is a first-class value: it is
/// what out-of-range accesses, missing attributes, and arithmetic over
/// Undefined produce, and every comparison touching it is false.
class AttributeValue {
public:
    struct Undefined {
        bool operator==(const Undefined&) const = default;
    };

    AttributeValue() : v_(Undefined{}) {}

    static AttributeValue undefined() { return AttributeValue(); }
    static AttributeValue text(std::string s) { return AttributeValue(Storage(std::move(s))); }
    static AttributeValue number(double d) { return AttributeValue(Storage(d)); }
    static AttributeValue boolean(bool b) { return AttributeValue(Storage(b)); }
    /// Milliseconds since Unix epoch, UTC.
    static AttributeValue timestamp(std::int64_t ms) { return AttributeValue(Storage(ms)); }

    bool is_undefined() const { return std::holds_alternative<Undefined>(v_); }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }
    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_boolean() const { return std::holds_alternative<bool>(v_); }
    bool is_timestamp() const { return std::holds_alternative<std::int64_t>(v_); }

    const std::string& as_text() const { return std::get<std::string>(v_); }
    double as_number() const { return std::get<double>(v_); }
    bool as_boolean() const { return std::get<bool>(v_); }
    std::int64_t as_timestamp() const { return std::get<std::int64_t>(v_); }

    /// Exact equality: kinds must match and payloads must be identical
    /// (numbers compare as exact doubles). Undefined equals Undefined.
    bool operator==(const AttributeValue& other) const = default;

    /// Canonical text rendering: numbers use shortest round-trip form,
    /// booleans "true"/"false", timestamps their millisecond count.
    std::string to_display_string() const;

private:
    using Storage = std::variant<Undefined, std::string, double, bool, std::int64_t>;
    explicit AttributeValue(Storage v) : v_(std::move(v)) {}
    Storage v_;
};

/// Shortest decimal rendering of a double that parses back bit-exactly.
std::string format_double(double d);

}  // namespace foe
