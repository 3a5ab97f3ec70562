#include "gpa/model_io.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "gpa/csv.hpp"
#include "gpa/kernels.hpp"

namespace gpa {

// =============================================================================
// Save (hand-rolled: fixed key order, %.17g — byte-stable output)
// =============================================================================

void save_model(const std::string& path, const GpaModel& model) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out << "{\n";
  out << "  \"format\": \"" << kModelFormatName << "\",\n";
  out << "  \"version\": " << kModelFormatVersion << ",\n";
  out << "  \"dim\": " << model.dim << ",\n";
  out << "  \"grid\": {\"lo\": " << format_double(model.axis.lo())
      << ", \"hi\": " << format_double(model.axis.hi())
      << ", \"segments\": " << model.axis.segments() << ", \"mode\": \""
      << support_mode_name(model.axis.mode()) << "\"},\n";
  out << "  \"nu\": " << model.nu << ",\n";
  out << "  \"h\": " << format_double(model.h) << ",\n";
  out << "  \"kernel\": \"" << model.kernel_id << "\",\n";
  out << "  \"meta\": {\"n_train\": " << model.meta.n_train
      << ", \"machines\": " << model.meta.machines << ", \"fitted_at\": \""
      << model.meta.fitted_at << "\"},\n";

  out << "  \"values\": [";
  for (std::size_t j = 0; j < model.values.size(); ++j) {
    if (j) out << ", ";
    out << format_double(model.values[j]);
  }
  out << "],\n";

  out << "  \"undefined\": [";
  for (std::size_t j = 0; j < model.undefined.size(); ++j) {
    if (j) out << ", ";
    out << static_cast<int>(model.undefined[j]);
  }
  out << "]\n";
  out << "}\n";
  if (!out) throw IoError("write to '" + path + "' failed");
}

// =============================================================================
// Load (schema- and version-checked)
// =============================================================================

GpaModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + "': not valid JSON: " + e.what());
  }

  try {
    const auto format = j.at("format").get<std::string>();
    if (format != kModelFormatName)
      throw IoError("'" + path + "': format '" + format + "' is not a " +
                    kModelFormatName + " file");
    const int version = j.at("version").get<int>();
    if (version < 1 || version > kModelFormatVersion)
      throw IoError("'" + path + "': format version " +
                    std::to_string(version) + " unsupported (this build reads " +
                    std::to_string(kModelFormatVersion) + ")");

    const auto& g = j.at("grid");
    const Grid axis(g.at("lo").get<double>(), g.at("hi").get<double>(),
                    g.at("segments").get<std::int64_t>(),
                    support_mode_from_name(g.at("mode").get<std::string>()));

    ModelMeta meta;
    const auto& jm = j.at("meta");
    meta.n_train = jm.at("n_train").get<std::int64_t>();
    meta.machines = jm.at("machines").get<int>();
    meta.fitted_at = jm.at("fitted_at").get<std::string>();

    GpaModel model{j.at("dim").get<int>(),
                   axis,
                   j.at("nu").get<int>(),
                   j.at("h").get<double>(),
                   j.at("kernel").get<std::string>(),
                   j.at("values").get<std::vector<double>>(),
                   {},
                   std::move(meta)};
    for (const auto& u : j.at("undefined"))
      model.undefined.push_back(u.get<int>() ? 1 : 0);

    model.validate();
    KernelSpec::from_id(model.kernel_id);  // fail now, not at first predict
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + "': malformed model file: " + e.what());
  }
}

std::string fitted_at_timestamp() {
  const char* raw = std::getenv("SOURCE_DATE_EPOCH");
  if (raw == nullptr || *raw == '\0') return "";
  char* end = nullptr;
  const long long epoch = std::strtoll(raw, &end, 10);
  if (end == raw || *end != '\0') return "";
  const std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm{};
  if (gmtime_r(&t, &tm) == nullptr) return "";
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gpa
