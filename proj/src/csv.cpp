#include "dayvec/csv.hpp"

namespace dayvec {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void require_csv_header(std::istream& in, std::string_view expected,
                        std::string_view stream_name) {
  std::string line;
  if (!read_line(in, line)) {
    throw Error(std::string(stream_name) + ": missing header (empty stream)");
  }
  if (line != expected) {
    throw Error(std::string(stream_name) + ": expected header '" +
                std::string(expected) + "', got '" + line + "'");
  }
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace dayvec
