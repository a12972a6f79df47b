#include "bessched/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bessched::csv {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size())
        throw std::runtime_error(path + ": row has " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(table.header.size()));
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw std::runtime_error(path + ": missing header row");
  return table;
}

double to_double(const std::string& field, const std::string& context) {
  try {
    size_t pos = 0;
    double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": not a number: '" + field + "'");
  }
}

std::string format(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

struct Writer::Impl {
  std::ofstream out;
  std::string path;
};

Writer::Writer(const std::string& path, const std::vector<std::string>& header)
    : impl_(new Impl{std::ofstream(path), path}) {
  if (!impl_->out) {
    delete impl_;
    throw std::runtime_error("cannot open for writing: " + path);
  }
  row(header);
}

Writer::~Writer() {
  close();
}

void Writer::row(const std::vector<std::string>& fields) {
  if (!impl_) return;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << fields[i];
  }
  impl_->out << '\n';
}

void Writer::close() {
  if (impl_) {
    impl_->out.close();
    delete impl_;
    impl_ = nullptr;
  }
}

}  // namespace bessched::csv
