// Copyright 2026 The wsnthin Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WSNTHIN_CSV_HPP_
#define WSNTHIN_CSV_HPP_

#include <fstream>
#include <string>
#include <vector>

namespace wsnthin {

// Minimal CSV handling for the pipeline's plain numeric/id tables. No
// quoting; '#'-prefixed lines are manifest/comment lines and are skipped on
// read. Doubles are written with %.17g so rereads are bit-exact.

std::vector<std::string> split_csv_line(const std::string& line);

class CsvReader {
 public:
  explicit CsvReader(const std::string& path);
  // Returns false at EOF; skips blank and '#' lines. The first non-comment
  // line read becomes the header if read_header() was called.
  bool next(std::vector<std::string>& fields);
  const std::vector<std::string>& header() const { return header_; }
  void read_header();
  size_t line_number() const { return line_number_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  size_t line_number_ = 0;
};

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void comment(const std::string& text);
  void row(const std::vector<std::string>& fields);
  void raw_line(const std::string& line);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

// %.17g, with "nan"/"inf" normalized for readability.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

}  // namespace wsnthin

#endif  // WSNTHIN_CSV_HPP_
