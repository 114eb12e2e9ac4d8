#include "geoaff/csv.hpp"

#include <istream>
#include <iterator>

#include "geoaff/errors.hpp"

namespace geoaff {

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ValidationError("CSV is missing required column '" + name + "'");
}

CsvTable read_csv(std::istream& in) {
  std::string text(std::istreambuf_iterator<char>(in), {});

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;  // true once the current record has any content

  auto end_cell = [&] {
    record.push_back(std::move(cell));
    cell.clear();
  };
  auto end_record = [&] {
    end_cell();
    records.push_back(std::move(record));
    record.clear();
    cell_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        cell_started = true;
        break;
      case ',':
        end_cell();
        cell_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        cell.push_back(c);
        cell_started = true;
        break;
    }
  }
  if (in_quotes) throw ValidationError("CSV ends inside a quoted field");
  if (cell_started || !record.empty() || !cell.empty()) end_record();

  if (records.empty()) throw ValidationError("CSV has no header record");

  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw ValidationError("CSV record " + std::to_string(r + 1) + " has " +
                            std::to_string(records[r].size()) + " cells, expected " +
                            std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

}  // namespace geoaff
