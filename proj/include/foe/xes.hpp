#pragma once

#include <string>

#include "foe/event_log.hpp"

namespace foe {

/// Loads an XES event log (IEEE 1849-2016 subset: string/date/int/float/
/// boolean attributes on traces and events). Transparently reads
/// gzip-compressed files. Traces and events keep document order.
/// Throws IoError on unreadable files and FormatError (with position) on
/// malformed XML, unknown attribute kinds, or unparsable dates.
EventLog load_xes(const std::string& path);

/// Writes a log back out as XES. Numbers become float attributes, booleans
/// boolean, timestamps date, text string. Mainly used by tests to check that
/// a load/write cycle preserves every value.
void write_xes(const EventLog& log, const std::string& path);

}  // namespace foe
