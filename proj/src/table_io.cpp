#include "mitk/table_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "mitk/error.hpp"

namespace mitk::discrete {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\r') {
      if (!current.empty()) fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) fields.push_back(std::move(current));
  return fields;
}

double parse_real(const std::string& field, std::size_t line) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw TableFormatError(line, "not a decimal number: '" + field + "'");
  return value;
}

}  // namespace

TableFormatError::TableFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("table line " + std::to_string(line) + ": " + what), line_(line) {}

JointPmf2 read_table(std::istream& in) {
  Alphabet cols;
  Alphabet rows;
  std::vector<double> cells;
  bool have_header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (!have_header) {
      cols = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != cols.size() + 1) {
      throw TableFormatError(lineno, "expected a row label and " + std::to_string(cols.size()) + " entries, got " +
                                         std::to_string(fields.size()) + " fields");
    }
    rows.push_back(fields.front());
    for (std::size_t k = 1; k < fields.size(); ++k) cells.push_back(parse_real(fields[k], lineno));
  }
  if (!have_header) throw TableFormatError(lineno, "missing header line");
  if (rows.empty()) throw TableFormatError(lineno, "table has no rows");
  try {
    return JointPmf2(std::move(rows), std::move(cols), std::move(cells));
  } catch (const ContractViolation& e) {
    throw TableFormatError(lineno, e.what());
  }
}

JointPmf2 read_table_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table file " + path.string());
  return read_table(in);
}

void write_table(std::ostream& out, const JointPmf2& table) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t c = 0; c < table.cols(); ++c) os << (c == 0 ? "" : " ") << table.col_alphabet()[c];
  os << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    os << table.row_alphabet()[r];
    for (std::size_t c = 0; c < table.cols(); ++c) os << ' ' << table.at(r, c);
    os << '\n';
  }
  out << os.str();
}

}  // namespace mitk::discrete
