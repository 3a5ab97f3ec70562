#include "gpa/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gpa {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token) {
  if (token.empty()) throw IoError("empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size())
    throw IoError("malformed numeric field '" + token + "'");
  return v;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Rows of a whole file, tolerant of CRLF and a trailing newline.
std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_row(line));
  }
  if (rows.empty()) throw IoError("'" + path + "' is empty");
  return rows;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> covariate_header(int dim) {
  std::vector<std::string> h = {"x"};
  for (int s = 2; s <= dim; ++s) h.push_back("x" + std::to_string(s));
  return h;
}

// How many leading x columns, and whether y / mu_true follow.
struct HeaderShape {
  int dim = 0;
  bool has_y = false;
  bool has_truth = false;
};

HeaderShape parse_header(const std::vector<std::string>& header,
                         const std::string& path) {
  HeaderShape shape;
  std::size_t i = 0;
  const auto expect_x = [&](int s) {
    return s == 1 ? std::string("x") : "x" + std::to_string(s);
  };
  while (i < header.size() && header[i] == expect_x(static_cast<int>(i) + 1)) {
    ++i;
    ++shape.dim;
  }
  if (shape.dim == 0)
    throw IoError("'" + path + "': header must start with column 'x'");
  if (i < header.size() && header[i] == "y") {
    shape.has_y = true;
    ++i;
  }
  if (i < header.size() && header[i] == "mu_true") {
    shape.has_truth = true;
    ++i;
  }
  if (i != header.size())
    throw IoError("'" + path + "': unexpected column '" + header[i] + "'");
  return shape;
}

}  // namespace

// =============================================================================
// Samples
// =============================================================================

void write_sample_csv(const std::string& path, const Sample& sample,
                      std::span<const double> truth) {
  if (!truth.empty() &&
      truth.size() != static_cast<std::size_t>(sample.size()))
    throw std::invalid_argument("write_sample_csv: truth length mismatch");

  std::ofstream out = open_out(path);
  for (const auto& name : covariate_header(sample.dim())) out << name << ',';
  out << 'y';
  if (!truth.empty()) out << ",mu_true";
  out << '\n';
  for (std::int64_t i = 0; i < sample.size(); ++i) {
    for (int s = 0; s < sample.dim(); ++s)
      out << format_double(sample.x(i, s)) << ',';
    out << format_double(sample.y(i));
    if (!truth.empty())
      out << ',' << format_double(truth[static_cast<std::size_t>(i)]);
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

SampleFile read_sample_csv(const std::string& path) {
  const auto rows = read_rows(path);
  const HeaderShape shape = parse_header(rows.front(), path);
  if (!shape.has_y) throw IoError("'" + path + "': missing 'y' column");
  if (rows.size() < 2) throw IoError("'" + path + "': no data rows");

  const std::size_t width = static_cast<std::size_t>(shape.dim) + 1 +
                            (shape.has_truth ? 1 : 0);
  std::vector<double> xs, ys, truth;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != width)
      throw IoError("'" + path + "': row " + std::to_string(r + 1) +
                    " has " + std::to_string(row.size()) + " fields, expected " +
                    std::to_string(width));
    for (int s = 0; s < shape.dim; ++s)
      xs.push_back(parse_double(row[static_cast<std::size_t>(s)]));
    ys.push_back(parse_double(row[static_cast<std::size_t>(shape.dim)]));
    if (shape.has_truth)
      truth.push_back(parse_double(row[static_cast<std::size_t>(shape.dim) + 1]));
  }
  return SampleFile{Sample(std::move(xs), std::move(ys), shape.dim),
                    std::move(truth)};
}

// =============================================================================
// Query points and predictions
// =============================================================================

std::vector<double> read_points_csv(const std::string& path,
                                    int expected_dim) {
  const auto rows = read_rows(path);
  const HeaderShape shape = parse_header(rows.front(), path);
  if (shape.has_y || shape.has_truth)
    throw IoError("'" + path + "': points file must hold covariates only");
  if (expected_dim > 0 && shape.dim != expected_dim)
    throw IoError("'" + path + "': points are " + std::to_string(shape.dim) +
                  "-dimensional, the model needs " +
                  std::to_string(expected_dim));
  if (rows.size() < 2) throw IoError("'" + path + "': no data rows");

  std::vector<double> pts;
  pts.reserve((rows.size() - 1) * static_cast<std::size_t>(shape.dim));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(shape.dim))
      throw IoError("'" + path + "': row " + std::to_string(r + 1) +
                    " has the wrong field count");
    for (const auto& tok : rows[r]) pts.push_back(parse_double(tok));
  }
  return pts;
}

void write_predictions_csv(const std::string& path,
                           std::span<const double> points, int dim,
                           std::span<const Estimate> estimates) {
  if (dim < 1 || points.size() != estimates.size() * static_cast<std::size_t>(dim))
    throw std::invalid_argument("write_predictions_csv: layout mismatch");

  std::ofstream out = open_out(path);
  for (const auto& name : covariate_header(dim)) out << name << ',';
  out << "estimate\n";
  for (std::size_t q = 0; q < estimates.size(); ++q) {
    for (int s = 0; s < dim; ++s)
      out << format_double(
                 points[q * static_cast<std::size_t>(dim) +
                        static_cast<std::size_t>(s)])
          << ',';
    out << (estimates[q].has_value() ? format_double(*estimates[q]) : "NA");
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace gpa
