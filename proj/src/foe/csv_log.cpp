#include "foe/csv_log.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>

#include "foe/time_util.hpp"

namespace foe {
namespace {

std::vector<std::string> parse_csv_record(std::istream& in, bool& eof) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            field += ch;
        }
    }
    eof = !any;
    fields.push_back(std::move(field));
    return fields;
}

std::int64_t parse_with_pattern(const std::string& text, const std::string& pattern) {
    // Minimal strftime-style matcher; only the numeric fields we need.
    std::int64_t year = 1970;
    int month = 1, day = 1, hour = 0, minute = 0, second = 0;
    std::size_t ti = 0;
    auto read_int = [&](int width, auto& out) {
        std::int64_t v = 0;
        int n = 0;
        while (n < width && ti < text.size() && std::isdigit(static_cast<unsigned char>(text[ti]))) {
            v = v * 10 + (text[ti++] - '0');
            ++n;
        }
        if (n == 0) throw FormatError("timestamp '" + text + "' does not match '" + pattern + "'");
        out = static_cast<std::remove_reference_t<decltype(out)>>(v);
    };
    for (std::size_t pi = 0; pi < pattern.size(); ++pi) {
        if (pattern[pi] == '%' && pi + 1 < pattern.size()) {
            switch (pattern[++pi]) {
                case 'Y': read_int(4, year); break;
                case 'm': read_int(2, month); break;
                case 'd': read_int(2, day); break;
                case 'H': read_int(2, hour); break;
                case 'M': read_int(2, minute); break;
                case 'S': read_int(2, second); break;
                default:
                    throw FormatError("unsupported timestamp format directive %" +
                                      std::string(1, pattern[pi]));
            }
        } else {
            if (ti >= text.size() || text[ti] != pattern[pi])
                throw FormatError("timestamp '" + text + "' does not match '" + pattern + "'");
            ++ti;
        }
    }
    if (ti != text.size())
        throw FormatError("timestamp '" + text + "' does not match '" + pattern + "'");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02d-%02dT%02d:%02d:%02d",
                  static_cast<long long>(year), month, day, hour, minute, second);
    return parse_iso8601_ms(buf);
}

}  // namespace

std::int64_t parse_csv_timestamp(const std::string& text, const std::string& format) {
    if (format == "iso8601") return parse_iso8601_ms(text);
    if (format == "epoch_ms" || format == "epoch_s") {
        std::int64_t v = 0;
        const char* begin = text.data();
        const char* end = text.data() + text.size();
        auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc{} || res.ptr != end)
            throw FormatError("bad epoch timestamp '" + text + "'");
        return format == "epoch_ms" ? v : v * 1000;
    }
    return parse_with_pattern(text, format);
}

EventLog load_csv(const std::string& path, const CsvConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    bool eof = false;
    std::vector<std::string> header = parse_csv_record(in, eof);
    if (eof) throw FormatError("'" + path + "' is empty");

    auto column_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw FormatError("'" + path + "' has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id_col = column_of(config.trace_id_column);
    const std::size_t ts_col = column_of(config.timestamp_column);

    struct PendingEvent {
        std::int64_t ts;
        Event event;
    };
    std::vector<std::string> trace_order;
    std::map<std::string, std::vector<PendingEvent>> groups;

    std::size_t line = 1;
    for (;;) {
        std::vector<std::string> row = parse_csv_record(in, eof);
        if (eof) break;
        ++line;
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != header.size())
            throw FormatError(path + ":" + std::to_string(line) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(row.size()));
        const std::string& id = row[id_col];
        if (row[ts_col].empty())
            throw FormatError(path + ":" + std::to_string(line) + ": empty timestamp");
        std::int64_t ts;
        try {
            ts = parse_csv_timestamp(row[ts_col], config.timestamp_format);
        } catch (const FormatError& e) {
            throw FormatError(path + ":" + std::to_string(line) + ": " + e.what());
        }
        Event event;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == id_col || row[i].empty()) continue;
            if (i == ts_col) {
                event.attributes[header[i]] = AttributeValue::timestamp(ts);
            } else if (config.numeric_columns.count(header[i])) {
                double d = 0;
                auto res = std::from_chars(row[i].data(), row[i].data() + row[i].size(), d);
                if (res.ec != std::errc{} || res.ptr != row[i].data() + row[i].size())
                    throw FormatError(path + ":" + std::to_string(line) + ": bad number '" +
                                      row[i] + "' in column '" + header[i] + "'");
                event.attributes[header[i]] = AttributeValue::number(d);
            } else {
                event.attributes[header[i]] = AttributeValue::text(row[i]);
            }
        }
        auto it = groups.find(id);
        if (it == groups.end()) {
            trace_order.push_back(id);
            it = groups.emplace(id, std::vector<PendingEvent>{}).first;
        }
        it->second.push_back(PendingEvent{ts, std::move(event)});
    }

    EventLog log;
    for (const std::string& id : trace_order) {
        auto& pending = groups[id];
        std::stable_sort(pending.begin(), pending.end(),
                         [](const PendingEvent& a, const PendingEvent& b) { return a.ts < b.ts; });
        Trace trace;
        trace.id = id;
        trace.attributes["concept:name"] = AttributeValue::text(id);
        for (auto& p : pending) {
            p.event.ordinal = trace.events.size() + 1;
            trace.events.push_back(std::move(p.event));
        }
        log.add_trace(std::move(trace));
    }
    return log;
}

}  // namespace foe
