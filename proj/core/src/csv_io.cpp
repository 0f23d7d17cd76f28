#include "pvsc/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace pvsc {

std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

double parse_number(const std::string& token, const std::string& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw CsvParseError(path + ":" + std::to_string(line) + ": bad number '" +
                        token + "'");
  }
}

}  // namespace

SeriesSample read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw CsvParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp_hours,value") {
    throw CsvParseError(path + ":1: expected header 'timestamp_hours,value'");
  }

  SeriesSample sample;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw CsvParseError(path + ":" + std::to_string(line_no) + ": missing comma");
    }
    sample.t_hours.push_back(parse_number(line.substr(0, comma), path, line_no));
    sample.values.push_back(parse_number(line.substr(comma + 1), path, line_no));
  }
  if (sample.t_hours.size() < 2) {
    throw CsvParseError(path + ": need at least two data rows");
  }

  const double dt = sample.t_hours[1] - sample.t_hours[0];
  if (!(dt > 0.0)) throw CsvParseError(path + ": timestamps must increase");
  for (std::size_t i = 1; i < sample.t_hours.size(); ++i) {
    const double step = sample.t_hours[i] - sample.t_hours[i - 1];
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw CsvParseError(path + ":" + std::to_string(i + 2) +
                          ": non-uniform timestamp spacing");
    }
  }
  return sample;
}

void write_series_csv(const std::string& path, const SeriesSample& sample) {
  std::ofstream out(path);
  if (!out) throw CsvParseError(path + ": cannot open for writing");
  out << "timestamp_hours,value\n";
  for (std::size_t i = 0; i < sample.t_hours.size(); ++i) {
    out << format_full(sample.t_hours[i]) << ',' << format_full(sample.values[i])
        << '\n';
  }
}

}  // namespace pvsc
