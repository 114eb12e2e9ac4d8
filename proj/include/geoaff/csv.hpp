#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geoaff {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each row has header.size() cells

  // Index of a header column; throws ValidationError naming the column if absent.
  std::size_t column_index(const std::string& name) const;
};

// RFC 4180 reader: quoted fields, doubled-quote escapes, embedded commas and
// newlines, CRLF or LF line ends, optional trailing newline. The first record
// is the header. Ragged records (cell count != header count) are a hard
// ValidationError with the record number.
CsvTable read_csv(std::istream& in);

}  // namespace geoaff
