#pragma once

#include <cstdint>
#include <string>

namespace foe {

/// Parses an ISO-8601 date-time ("2013-04-05T14:30:00.123+02:00", 'Z', or no
/// zone designator meaning UTC) into milliseconds since the Unix epoch.
/// Fractional seconds beyond milliseconds are truncated.
/// Throws FormatError on malformed input.
std::int64_t parse_iso8601_ms(const std::string& text);

/// Renders milliseconds since epoch as "YYYY-MM-DDTHH:MM:SS.mmm+00:00".
std::string format_iso8601_ms(std::int64_t ms);

}  // namespace foe
