#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpa/estimate.hpp"
#include "gpa/sample.hpp"

namespace gpa {

// Filesystem/parse failures; the CLI maps these to the usage/IO exit code.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// %.17g: enough digits that reading the text back reproduces the exact
// double, so artifacts round-trip bit-for-bit.
std::string format_double(double v);
double parse_double(const std::string& token);  // strict full-token parse

// =============================================================================
// CSV files
// =============================================================================
//
// Header row, comma separator, no quoting (numeric payloads only), literal
// `NA` for undefined predictions. Column layout:
//
//   samples      x[,x2,...],y[,mu_true]
//   points       x[,x2,...]
//   predictions  x[,x2,...],estimate

struct SampleFile {
  Sample sample;
  std::vector<double> truth;  // mu_true column when present, else empty
};

void write_sample_csv(const std::string& path, const Sample& sample,
                      std::span<const double> truth = {});
SampleFile read_sample_csv(const std::string& path);

std::vector<double> read_points_csv(const std::string& path,
                                    int expected_dim = 0);  // 0: any
void write_predictions_csv(const std::string& path,
                           std::span<const double> points, int dim,
                           std::span<const Estimate> estimates);

}  // namespace gpa
