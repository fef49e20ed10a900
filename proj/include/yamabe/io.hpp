#pragma once

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace yamabe {

/// Shortest decimal string that round-trips to the same double. Throws
/// NumericalFailure on NaN or infinity so no non-finite value is emitted.
std::string format_double(double v);

/// CSV writer with a mandatory header and LF line endings.
class CsvWriter {
public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header);
  void row(std::initializer_list<double> values);
  void row(std::span<const double> values);
  /// Like row(), but NaN marks an undefined value and is written as an empty cell.
  void row_with_gaps(std::span<const double> values);

private:
  std::ostream& os_;
  std::size_t columns_;
};

}  // namespace yamabe
