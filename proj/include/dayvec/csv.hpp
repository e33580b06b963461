#pragma once

#include "dayvec/types.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dayvec {

// Minimal strict CSV: comma-separated, no quoting or embedded separators.
// Values in this project (ids, tokens, ISO dates, numbers) never contain
// commas; ingest rejects rows with unexpected field counts.

std::vector<std::string> split_csv_line(std::string_view line);

// Reads one line, tolerating a trailing '\r' (CRLF input). Returns false on
// end of stream.
bool read_line(std::istream& in, std::string& line);

// Verifies the first line equals `expected` exactly. Throws Error otherwise.
void require_csv_header(std::istream& in, std::string_view expected,
                        std::string_view stream_name);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace dayvec
