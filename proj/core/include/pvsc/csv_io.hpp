#pragma once

#include <stdexcept>
#include <string>

#include "pvsc/stochastic.hpp"

namespace pvsc {

struct CsvParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Formats a double with 17 significant digits so re-ingestion reproduces the
// value exactly.
std::string format_full(double value);

// Reads a two-column CSV `timestamp_hours,value` (header row required).
// Validates strictly increasing, uniformly spaced timestamps. Errors carry
// the file name and line number.
SeriesSample read_series_csv(const std::string& path);

void write_series_csv(const std::string& path, const SeriesSample& sample);

}  // namespace pvsc
