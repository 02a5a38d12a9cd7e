#pragma once

#include <tessel/measures.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace tessel {

/// A numeric table with a required header row.
struct Table {
  std::vector<std::string> header;
  Matrix values;
};

/// Comma-delimited, '.' decimal, scientific notation accepted. Malformed rows
/// raise ParseError carrying the 1-based line number.
Table parse_csv(std::istream& in);
Table read_csv(const std::string& path);

void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::string& path, const Table& table);

/// Point sets use the header x1,...,xd.
PointSet read_points(const std::string& path);
void write_points(const std::string& path, const PointSet& points);
void write_points(std::ostream& out, const PointSet& points);

/// Single-column response files (any header name).
Vector read_values(const std::string& path);
void write_values(const std::string& path, const Vector& values, const std::string& name = "y");

}  // namespace tessel
