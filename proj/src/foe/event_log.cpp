#include "foe/event_log.hpp"

#include <charconv>

namespace foe {

std::string format_double(double d) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, res.ptr);
}

std::string AttributeValue::to_display_string() const {
    if (is_undefined()) return "<undefined>";
    if (is_text()) return as_text();
    if (is_number()) return format_double(as_number());
    if (is_boolean()) return as_boolean() ? "true" : "false";
    return std::to_string(as_timestamp());
}

void EventLog::add_trace(Trace t) {
    auto [it, inserted] = index_by_id_.emplace(t.id, traces_.size());
    if (!inserted) throw FormatError("duplicate trace id '" + t.id + "'");
    traces_.push_back(std::move(t));
}

const Trace* EventLog::find_trace(const std::string& id) const {
    auto it = index_by_id_.find(id);
    return it == index_by_id_.end() ? nullptr : &traces_[it->second];
}

std::size_t EventLog::total_events() const {
    std::size_t n = 0;
    for (const auto& t : traces_) n += t.events.size();
    return n;
}

AttributeValue attribute(const Trace& trace, std::int64_t index, const std::string& name) {
    if (index < 1 || index > static_cast<std::int64_t>(trace.events.size()))
        return AttributeValue::undefined();
    const Event& e = trace.events[static_cast<std::size_t>(index - 1)];
    if (const AttributeValue* v = e.find(name)) return *v;
    return AttributeValue::undefined();
}

}  // namespace foe
