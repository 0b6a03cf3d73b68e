#include "foe/xes.hpp"

#include <zlib.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "foe/time_util.hpp"

namespace foe {
namespace {

namespace pt = boost::property_tree;

// gzread handles plain files as well as gzip streams, so one path covers both.
std::string slurp(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open '" + path + "'");
    std::string out;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
    bool bad = n < 0;
    gzclose(f);
    if (bad) throw IoError("cannot read '" + path + "'");
    return out;
}

double parse_number(const std::string& s, const std::string& key) {
    double d = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), d);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw FormatError("bad numeric value '" + s + "' for attribute '" + key + "'");
    return d;
}

AttributeValue parse_attribute(const std::string& kind, const std::string& key,
                               const std::string& value) {
    if (kind == "string" || kind == "id") return AttributeValue::text(value);
    if (kind == "int" || kind == "float") return AttributeValue::number(parse_number(value, key));
    if (kind == "boolean") {
        if (value == "true") return AttributeValue::boolean(true);
        if (value == "false") return AttributeValue::boolean(false);
        throw FormatError("bad boolean value '" + value + "' for attribute '" + key + "'");
    }
    if (kind == "date") return AttributeValue::timestamp(parse_iso8601_ms(value));
    throw FormatError("unknown attribute kind '" + kind + "' for attribute '" + key + "'");
}

bool is_attribute_element(const std::string& name) {
    return name == "string" || name == "date" || name == "int" || name == "float" ||
           name == "boolean" || name == "id";
}

void read_attributes(const pt::ptree& node, std::map<std::string, AttributeValue>& out) {
    for (const auto& [name, child] : node) {
        if (!is_attribute_element(name)) continue;
        auto key = child.get_optional<std::string>("<xmlattr>.key");
        auto value = child.get_optional<std::string>("<xmlattr>.value");
        if (!key || !value) throw FormatError("attribute element missing key/value");
        out[*key] = parse_attribute(name, *key, *value);
    }
}

void xml_escape(const std::string& s, std::string& out) {
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
}

void write_attribute(std::string& out, const std::string& indent, const std::string& key,
                     const AttributeValue& v) {
    const char* kind = nullptr;
    std::string value;
    if (v.is_text()) {
        kind = "string";
        value = v.as_text();
    } else if (v.is_number()) {
        kind = "float";
        value = format_double(v.as_number());
    } else if (v.is_boolean()) {
        kind = "boolean";
        value = v.as_boolean() ? "true" : "false";
    } else if (v.is_timestamp()) {
        kind = "date";
        value = format_iso8601_ms(v.as_timestamp());
    } else {
        return;  // Undefined has no XES representation
    }
    out += indent;
    out += '<';
    out += kind;
    out += " key=\"";
    xml_escape(key, out);
    out += "\" value=\"";
    xml_escape(value, out);
    out += "\"/>\n";
}

}  // namespace

EventLog load_xes(const std::string& path) {
    std::istringstream stream(slurp(path));
    pt::ptree tree;
    try {
        pt::read_xml(stream, tree);
    } catch (const pt::xml_parser_error& e) {
        throw FormatError("malformed XML in '" + path + "' at line " +
                          std::to_string(e.line()) + ": " + e.message());
    }
    auto log_node = tree.get_child_optional("log");
    if (!log_node) throw FormatError("'" + path + "' has no <log> root element");

    EventLog log;
    std::size_t trace_no = 0;
    for (const auto& [name, trace_node] : *log_node) {
        if (name != "trace") continue;
        ++trace_no;
        Trace trace;
        read_attributes(trace_node, trace.attributes);
        if (auto it = trace.attributes.find("concept:name");
            it != trace.attributes.end() && it->second.is_text()) {
            trace.id = it->second.as_text();
        } else {
            trace.id = "trace-" + std::to_string(trace_no);
        }
        for (const auto& [child_name, event_node] : trace_node) {
            if (child_name != "event") continue;
            Event event;
            event.ordinal = trace.events.size() + 1;
            read_attributes(event_node, event.attributes);
            trace.events.push_back(std::move(event));
        }
        log.add_trace(std::move(trace));
    }
    return log;
}

void write_xes(const EventLog& log, const std::string& path) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<log xes.version=\"1849-2016\">\n";
    for (const Trace& trace : log.traces()) {
        out += "  <trace>\n";
        bool has_name = trace.attributes.count("concept:name") > 0;
        if (!has_name) write_attribute(out, "    ", "concept:name", AttributeValue::text(trace.id));
        for (const auto& [key, value] : trace.attributes) write_attribute(out, "    ", key, value);
        for (const Event& event : trace.events) {
            out += "    <event>\n";
            for (const auto& [key, value] : event.attributes)
                write_attribute(out, "      ", key, value);
            out += "    </event>\n";
        }
        out += "  </trace>\n";
    }
    out += "</log>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << out;
    if (!f) throw IoError("cannot write '" + path + "'");
}

}  // namespace foe
