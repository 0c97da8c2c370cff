#pragma once

#include <iosfwd>
#include <string>

#include "locfield/core.hpp"

namespace locfield {

// Dataset CSV: header `x,z` (1D) or `x,y,z` (2D), one observation per row.

Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Splits one CSV line on commas and trims surrounding whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace locfield
