#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "foe/value.hpp"

namespace foe {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Event {
    /// 1-based position within the owning trace.
    std::size_t ordinal = 0;
    std::map<std::string, AttributeValue> attributes;

    const AttributeValue* find(const std::string& name) const {
        auto it = attributes.find(name);
        return it == attributes.end() ? nullptr : &it->second;
    }
};

struct Trace {
    std::string id;
    std::vector<Event> events;
    /// Trace-level attributes are kept for round-tripping but are not
    /// reachable from rule expressions.
    std::map<std::string, AttributeValue> attributes;

    std::size_t size() const { return events.size(); }
};

class EventLog {
public:
    EventLog() = default;

    /// Throws FormatError on a duplicate trace id.
    void add_trace(Trace t);

    const std::vector<Trace>& traces() const { return traces_; }
    std::size_t size() const { return traces_.size(); }
    const Trace& operator[](std::size_t i) const { return traces_[i]; }

    const Trace* find_trace(const std::string& id) const;

    std::size_t total_events() const;

private:
    std::vector<Trace> traces_;
    std::map<std::string, std::size_t> index_by_id_;
};

/// Total attribute accessor: the named attribute of the event at 1-based
/// `index`, or Undefined when the index is out of range or the attribute is
/// missing. Never fails.
AttributeValue attribute(const Trace& trace, std::int64_t index, const std::string& name);

}  // namespace foe
