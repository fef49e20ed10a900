#include "yamabe/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "yamabe/model.hpp"

namespace yamabe {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalFailure("io", "refusing to emit a non-finite value");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header)
    : os_(os), columns_(header.size()) {
  bool first = true;
  for (auto h : header) {
    if (!first) os_ << ',';
    os_ << h;
    first = false;
  }
  os_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw std::invalid_argument("csv: row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os_ << ',';
    os_ << format_double(values[i]);
  }
  os_ << '\n';
}

void CsvWriter::row_with_gaps(std::span<const double> values) {
  if (values.size() != columns_) throw std::invalid_argument("csv: row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os_ << ',';
    if (!std::isnan(values[i])) os_ << format_double(values[i]);
  }
  os_ << '\n';
}

}  // namespace yamabe
