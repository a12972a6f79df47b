#pragma once

#include <string>
#include <vector>

namespace bessched::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated file with a mandatory header row.
/// Throws std::runtime_error naming the path on I/O or format problems.
Table read(const std::string& path);

/// Splits one CSV line on commas (no quoting; the formats here never need it).
std::vector<std::string> split_line(const std::string& line);

/// Parses a double, rejecting trailing junk. `context` goes into the error text.
double to_double(const std::string& field, const std::string& context);

/// Formats a double with enough digits to round-trip typical values ("%.12g").
std::string format(double value);

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);
  ~Writer();
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace bessched::csv
