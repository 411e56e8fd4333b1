#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mitk/discrete.hpp"

// Plain-text joint tables:
//
//   # comment lines and blank lines are ignored
//          y0    y1
//   x0    0.4   0.1
//   x1    0.1   0.4
//
// The first content line lists the column labels; every following line is a
// row label followed by one decimal entry per column. Fields are separated by
// whitespace or commas.
namespace mitk::discrete {

class TableFormatError : public std::runtime_error {
 public:
  TableFormatError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

JointPmf2 read_table(std::istream& in);
JointPmf2 read_table_file(const std::filesystem::path& path);
void write_table(std::ostream& out, const JointPmf2& table);

}  // namespace mitk::discrete
