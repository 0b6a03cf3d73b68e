#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "foe/event_log.hpp"

namespace fixtures {

inline foe::AttributeValue T(const std::string& s) { return foe::AttributeValue::text(s); }
inline foe::AttributeValue N(double d) { return foe::AttributeValue::number(d); }
inline foe::AttributeValue B(bool b) { return foe::AttributeValue::boolean(b); }
inline foe::AttributeValue TS(std::int64_t ms) { return foe::AttributeValue::timestamp(ms); }

inline foe::Event ev(std::initializer_list<std::pair<std::string, foe::AttributeValue>> attrs) {
    foe::Event e;
    for (const auto& [name, value] : attrs) e.attributes[name] = value;
    return e;
}

inline foe::Trace tr(std::string id, std::vector<foe::Event> events) {
    foe::Trace t;
    t.id = std::move(id);
    t.events = std::move(events);
    for (std::size_t i = 0; i < t.events.size(); ++i) t.events[i].ordinal = i + 1;
    return t;
}

inline foe::EventLog log_of(std::vector<foe::Trace> traces) {
    foe::EventLog log;
    for (auto& t : traces) log.add_trace(std::move(t));
    return log;
}

/// The running four-event example trace: concept:name initialization /
/// validation / assembling / validation, every cost equal to 3.
inline foe::Trace example3_trace() {
    return tr("ex3", {
                         ev({{"concept:name", T("initialization")}, {"cost", N(3)}}),
                         ev({{"concept:name", T("validation")}, {"cost", N(3)}}),
                         ev({{"concept:name", T("assembling")}, {"cost", N(3)}}),
                         ev({{"concept:name", T("validation")}, {"cost", N(3)}}),
                     });
}

/// A 10-event trace carrying every attribute the bundled rule corpus
/// mentions, so any corpus rule can be applied to it.
inline foe::Trace rich_trace() {
    std::vector<foe::Event> events;
    const char* names[] = {"OrderCreated", "validation", "Waiting",   "assembling",
                           "checking",     "validation", "A_DECLINED", "Queued",
                           "OrderDelivered", "archive"};
    const char* resources[] = {"r1", "r2", "r1", "r3", "r2", "r2", "r4", "r1", "r3", "r2"};
    const char* groups[] = {"g1", "g1", "g2", "g2", "g1", "g3", "g2", "g1", "g3", "g2"};
    const char* lifecycles[] = {"start", "Wait", "complete", "Await. Assign.", "complete",
                                "Wait - User", "complete", "start", "complete", "complete"};
    for (int i = 0; i < 10; ++i) {
        events.push_back(ev({
            {"concept:name", T(names[i])},
            {"org:resource", T(resources[i])},
            {"org:group", T(groups[i])},
            {"lifecycle:transition", T(lifecycles[i])},
            {"activityNameEN", T(std::string("act") + std::to_string(i % 4))},
            {"time:timestamp", TS(1000000 + i * 600000)},
            {"cost", N(3 + i % 5)},
            {"humanCost", N(2 + i % 3)},
            {"materialCost", N(1 + i % 2)},
            {"orderID", T("ord-1")},
            {"expectedDuration", N(3600000)},
        }));
    }
    return tr("rich", std::move(events));
}

}  // namespace fixtures
