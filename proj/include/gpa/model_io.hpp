#pragma once

#include <string>

#include "gpa/model.hpp"

namespace gpa {

// Fitted-model file: versioned JSON with a fixed key order and %.17g
// numerals, so identical models serialize to identical bytes.
inline constexpr const char* kModelFormatName = "gpa-model";
inline constexpr int kModelFormatVersion = 1;

void save_model(const std::string& path, const GpaModel& model);

// Rejects unknown formats and future versions loudly instead of misreading.
GpaModel load_model(const std::string& path);

// ISO-8601 UTC stamp from SOURCE_DATE_EPOCH when set, otherwise "" so that
// re-running a fit reproduces the artifact byte-for-byte.
std::string fitted_at_timestamp();

}  // namespace gpa
