#include "locfield/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace locfield {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("line " + std::to_string(line_no) + ": not a number: '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  // Skip a UTF-8 byte order mark and blank lines before the header.
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  const auto header = split_csv_line(line);
  int dim = 0;
  if (header == std::vector<std::string>{"x", "z"}) {
    dim = 1;
  } else if (header == std::vector<std::string>{"x", "y", "z"}) {
    dim = 2;
  } else {
    throw ConfigError("dataset header must be 'x,z' or 'x,y,z'");
  }
  std::vector<Location> locs;
  std::vector<double> z;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(dim + 1)) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim + 1) + " fields");
    }
    Location loc(dim);
    for (int d = 0; d < dim; ++d) loc(d) = parse_number(fields[static_cast<std::size_t>(d)], line_no);
    locs.push_back(loc);
    z.push_back(parse_number(fields.back(), line_no));
  }
  Eigen::VectorXd responses = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  return Dataset(std::move(locs), std::move(responses));
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path);
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << (data.dim() == 1 ? "x,z\n" : "x,y,z\n");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& loc = data.location(i);
    for (Eigen::Index d = 0; d < loc.size(); ++d) out << format_double(loc(d)) << ',';
    out << format_double(data.responses()(static_cast<Eigen::Index>(i))) << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write: " + path);
  write_dataset_csv(out, data);
}

}  // namespace locfield
