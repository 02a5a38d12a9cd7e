#include <tessel/csv.hpp>
#include <tessel/format.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace tessel {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

double parse_number(const std::string& field, Index line) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError("non-numeric field '" + field + "'", line);
  }
  return value;
}

}  // namespace

Table parse_csv(std::istream& in) {
  Table table;
  std::string line;
  Index line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " columns, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("missing header row", line_no);
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (Index i = 0; i < table.values.rows(); ++i) {
    for (Index j = 0; j < table.values.cols(); ++j) {
      table.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return table;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return parse_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << ',';
    out << table.header[j];
  }
  out << '\n';
  for (Index i = 0; i < table.values.rows(); ++i) {
    for (Index j = 0; j < table.values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(table.values(i, j));
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, table);
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

Table point_table(const PointSet& points) {
  Table t;
  for (Index j = 0; j < points.dim(); ++j) t.header.push_back("x" + std::to_string(j + 1));
  t.values = points.matrix();
  return t;
}

}  // namespace

PointSet read_points(const std::string& path) {
  Table t = read_csv(path);
  if (t.header.empty()) throw ParseError(path + ": empty header", 1);
  try {
    return PointSet(std::move(t.values));
  } catch (const DomainError&) {
    throw ParseError(path + ": non-finite coordinate", 0);
  }
}

void write_points(const std::string& path, const PointSet& points) { write_csv(path, point_table(points)); }

void write_points(std::ostream& out, const PointSet& points) { write_csv(out, point_table(points)); }

Vector read_values(const std::string& path) {
  Table t = read_csv(path);
  if (t.header.size() != 1) throw ParseError(path + ": expected a single column", 1);
  return t.values.col(0);
}

void write_values(const std::string& path, const Vector& values, const std::string& name) {
  Table t;
  t.header = {name};
  t.values = values;
  write_csv(path, t);
}

}  // namespace tessel
