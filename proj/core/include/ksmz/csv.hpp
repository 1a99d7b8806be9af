#ifndef KSMZ_CSV_HPP
#define KSMZ_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

namespace ksmz {

/// Formats a double with 17 significant digits (round-trip exact).
std::string fmt_double(double v);

/// Line-oriented CSV writer; numeric cells use fmt_double.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void comment(const std::string& text);  // "# text"
  void raw_line(const std::string& line);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

struct CsvContent {
  std::vector<std::string> comments;  // leading # lines, '#' stripped
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvContent read_csv(const std::string& path);
double to_double(const std::string& cell);
long to_long(const std::string& cell);

}  // namespace ksmz

#endif
