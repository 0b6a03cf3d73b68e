#include "foe/time_util.hpp"

#include <cctype>
#include <cstdio>

#include "foe/event_log.hpp"

namespace foe {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;

    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }

    int digits(int count) {
        int v = 0;
        for (int i = 0; i < count; ++i) {
            if (done() || !std::isdigit(static_cast<unsigned char>(s[pos])))
                throw FormatError("bad ISO-8601 timestamp: '" + s + "'");
            v = v * 10 + (s[pos++] - '0');
        }
        return v;
    }

    void expect(char c) {
        if (done() || s[pos] != c)
            throw FormatError("bad ISO-8601 timestamp: '" + s + "'");
        ++pos;
    }
};

}  // namespace

std::int64_t parse_iso8601_ms(const std::string& text) {
    Cursor c{text};
    bool neg_year = false;
    if (c.peek() == '-') {
        neg_year = true;
        ++c.pos;
    }
    std::int64_t year = c.digits(4);
    if (neg_year) year = -year;
    c.expect('-');
    int month = c.digits(2);
    c.expect('-');
    int day = c.digits(2);
    if (c.peek() != 'T' && c.peek() != ' ')
        throw FormatError("bad ISO-8601 timestamp: '" + text + "'");
    ++c.pos;
    int hour = c.digits(2);
    c.expect(':');
    int minute = c.digits(2);
    c.expect(':');
    int second = c.digits(2);
    std::int64_t millis = 0;
    if (c.peek() == '.' || c.peek() == ',') {
        ++c.pos;
        int scale = 100;
        bool any = false;
        while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) {
            if (scale > 0) millis += static_cast<std::int64_t>(c.peek() - '0') * scale;
            scale /= 10;
            ++c.pos;
            any = true;
        }
        if (!any) throw FormatError("bad ISO-8601 timestamp: '" + text + "'");
    }
    std::int64_t offset_min = 0;
    if (!c.done()) {
        char z = c.peek();
        if (z == 'Z') {
            ++c.pos;
        } else if (z == '+' || z == '-') {
            ++c.pos;
            int oh = c.digits(2);
            if (c.peek() == ':') ++c.pos;
            int om = c.done() ? 0 : c.digits(2);
            offset_min = oh * 60 + om;
            if (z == '-') offset_min = -offset_min;
        } else {
            throw FormatError("bad ISO-8601 timestamp: '" + text + "'");
        }
    }
    if (!c.done()) throw FormatError("bad ISO-8601 timestamp: '" + text + "'");
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        throw FormatError("bad ISO-8601 timestamp: '" + text + "'");

    std::int64_t days = days_from_civil(year, month, day);
    std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second - offset_min * 60;
    return secs * 1000 + millis;
}

std::string format_iso8601_ms(std::int64_t ms) {
    std::int64_t secs = ms / 1000;
    std::int64_t rem = ms % 1000;
    if (rem < 0) {
        rem += 1000;
        secs -= 1;
    }
    std::int64_t days = secs / 86400;
    std::int64_t sod = secs % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    std::int64_t y;
    int mo, d;
    civil_from_days(days, y, mo, d);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04lld-%02d-%02dT%02d:%02d:%02d.%03d+00:00",
                  static_cast<long long>(y), mo, d, static_cast<int>(sod / 3600),
                  static_cast<int>((sod / 60) % 60), static_cast<int>(sod % 60),
                  static_cast<int>(rem));
    return buf;
}

}  // namespace foe
