#pragma once

#include <set>
#include <string>

#include "foe/event_log.hpp"

namespace foe {

/// Column mapping for CSV ingestion. The file must have a header row.
struct CsvConfig {
    std::string trace_id_column;
    std::string timestamp_column;
    /// "iso8601", "epoch_ms", "epoch_s", or a pattern using %Y %m %d %H %M %S.
    std::string timestamp_format = "iso8601";
    /// Columns parsed as numbers; everything else becomes text.
    std::set<std::string> numeric_columns;
};

/// Loads a CSV file into an event log: rows are grouped by the trace-id
/// column (groups ordered by first appearance, so interleaved rows of one
/// trace merge), then sorted within each trace by timestamp ascending with a
/// stable sort, so equal timestamps keep file order. Empty cells are treated
/// as missing attributes.
/// Throws FormatError on missing mapped columns or unparsable values.
EventLog load_csv(const std::string& path, const CsvConfig& config);

/// Parses a timestamp cell according to CsvConfig::timestamp_format.
std::int64_t parse_csv_timestamp(const std::string& text, const std::string& format);

}  // namespace foe
