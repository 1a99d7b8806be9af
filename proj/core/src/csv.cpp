#include "ksmz/csv.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace ksmz {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw std::runtime_error("csv: cannot open " + path + " for writing");
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

void CsvWriter::raw_line(const std::string& line) { out_ << line << '\n'; }

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_.good()) throw std::runtime_error("csv: write to " + path_ + " failed");
}

namespace {
std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}
}  // namespace

CsvContent read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  CsvContent content;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t b = 1;
      while (b < line.size() && line[b] == ' ') ++b;
      content.comments.push_back(line.substr(b));
      continue;
    }
    if (!header_seen) {
      content.header = split_commas(line);
      header_seen = true;
      continue;
    }
    content.rows.push_back(split_commas(line));
  }
  return content;
}

double to_double(const std::string& cell) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw std::runtime_error("csv: bad numeric cell '" + cell + "'");
  return v;
}

long to_long(const std::string& cell) {
  long v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw std::runtime_error("csv: bad integer cell '" + cell + "'");
  return v;
}

}  // namespace ksmz
