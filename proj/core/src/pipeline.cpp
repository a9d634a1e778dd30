#include "xpci/pipeline.hpp"

#include <fftw3.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "xpci/constants.hpp"
#include "xpci/io.hpp"
#include "xpci/lsi.hpp"
#include "xpci/propagation.hpp"
#include "xpci/retrieval.hpp"
#include "xpci/sample.hpp"
#include "xpci/version.hpp"

namespace xpci {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum class KeyType { Str, Num, Int, Bool };

struct KeySpec {
  const char* name;
  KeyType type;
  bool required;
};

struct OpSpec {
  const char* name;
  std::vector<KeySpec> keys;
  std::vector<const char*> input_keys;  // values name files that must exist
  // exactly_one: both keys optional in `keys`, exactly one must be present
  // at_most_one: at most one of them may be present
  bool wavelength_exactly_one = false;
  bool wavelength_at_most_one = false;
};

const std::vector<OpSpec>& op_table() {
  static const std::vector<OpSpec> table = {
      {"phantom",
       {{"out", KeyType::Str, true},
        {"nx", KeyType::Int, true},
        {"ny", KeyType::Int, true},
        {"dx_m", KeyType::Num, true},
        {"dy_m", KeyType::Num, true},
        {"radius_m", KeyType::Num, true},
        {"delta", KeyType::Num, true},
        {"beta", KeyType::Num, true},
        {"wavelength_m", KeyType::Num, false},
        {"energy_keV", KeyType::Num, false}},
       {},
       true,
       false},
      {"project",
       {{"in", KeyType::Str, true},
        {"out", KeyType::Str, true},
        {"wavelength_m", KeyType::Num, false},
        {"energy_keV", KeyType::Num, false}},
       {"in"},
       false,
       true},
      {"transmit",
       {{"object", KeyType::Str, true},
        {"out", KeyType::Str, true},
        {"in", KeyType::Str, false}},
       {"object", "in"},
       false,
       false},
      {"propagate",
       {{"in", KeyType::Str, true},
        {"out", KeyType::Str, true},
        {"dist_m", KeyType::Num, true},
        {"pad", KeyType::Int, false},
        {"apodize", KeyType::Bool, false}},
       {"in"},
       false,
       false},
      {"intensity",
       {{"in", KeyType::Str, true}, {"out", KeyType::Str, true}},
       {"in"},
       false,
       false},
      {"paganin",
       {{"in", KeyType::Str, true},
        {"out", KeyType::Str, true},
        {"i0", KeyType::Num, true},
        {"delta", KeyType::Num, true},
        {"mu_per_m", KeyType::Num, true},
        {"dist_m", KeyType::Num, true}},
       {"in"},
       false,
       false},
      {"blur",
       {{"in", KeyType::Str, true},
        {"out", KeyType::Str, true},
        {"source_d_m", KeyType::Num, true},
        {"z1_m", KeyType::Num, true},
        {"z2_m", KeyType::Num, true},
        {"profile", KeyType::Str, false}},
       {"in"},
       false,
       false},
      {"export",
       {{"in", KeyType::Str, true},
        {"out", KeyType::Str, true},
        {"norm", KeyType::Str, true},
        {"lo", KeyType::Num, false},
        {"hi", KeyType::Num, false}},
       {"in"},
       false,
       false},
      {"lsi",
       {{"in", KeyType::Str, true},
        {"out", KeyType::Str, true},
        {"aberrations", KeyType::Str, true},
        {"allow_gain", KeyType::Bool, false}},
       {"in", "aberrations"},
       false,
       false},
  };
  return table;
}

bool type_matches(const json& v, KeyType t) {
  switch (t) {
    case KeyType::Str: return v.is_string();
    case KeyType::Num: return v.is_number();
    case KeyType::Int: return v.is_number_integer();
    case KeyType::Bool: return v.is_boolean();
  }
  return false;
}

const char* type_name(KeyType t) {
  switch (t) {
    case KeyType::Str: return "string";
    case KeyType::Num: return "number";
    case KeyType::Int: return "integer";
    case KeyType::Bool: return "boolean";
  }
  return "?";
}

std::string step_label(std::size_t i) { return "pipeline[" + std::to_string(i) + "]"; }

[[noreturn]] void reject(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

// Structural validation of the whole config. Runs before anything executes
// so a rejected config leaves no outputs behind.
void validate_config(const json& config, const std::string& base_dir) {
  if (!config.is_object()) reject("config", "top level must be a JSON object");
  for (const auto& [key, value] : config.items()) {
    if (key == "pipeline") continue;
    if (key == "manifest") {
      if (!value.is_string()) reject("manifest", "expected string");
      continue;
    }
    reject(key, "unknown top-level key");
  }
  if (!config.contains("pipeline")) reject("pipeline", "missing required key");
  const json& steps = config.at("pipeline");
  if (!steps.is_array()) reject("pipeline", "expected array of steps");

  std::unordered_set<std::string> produced;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string where = step_label(i);
    const json& step = steps[i];
    if (!step.is_object()) reject(where, "step must be a JSON object");
    if (!step.contains("op") || !step.at("op").is_string())
      reject(where + ".op", "missing op name");
    const std::string op = step.at("op").get<std::string>();

    const OpSpec* spec = nullptr;
    for (const OpSpec& s : op_table())
      if (op == s.name) spec = &s;
    if (!spec) reject(where + ".op", "unknown op \"" + op + "\"");

    for (const auto& [key, value] : step.items()) {
      if (key == "op") continue;
      const KeySpec* ks = nullptr;
      for (const KeySpec& k : spec->keys)
        if (key == k.name) ks = &k;
      if (!ks) reject(where + "." + key, "unknown key for op \"" + op + "\"");
      if (!type_matches(value, ks->type))
        reject(where + "." + key, std::string("expected ") + type_name(ks->type));
    }
    for (const KeySpec& k : spec->keys)
      if (k.required && !step.contains(k.name))
        reject(where + "." + k.name, "missing required key");

    const int have_wavelength =
        int(step.contains("wavelength_m")) + int(step.contains("energy_keV"));
    if (spec->wavelength_exactly_one && have_wavelength != 1)
      reject(where, "exactly one of wavelength_m or energy_keV is required");
    if (spec->wavelength_at_most_one && have_wavelength > 1)
      reject(where, "wavelength_m and energy_keV are mutually exclusive");

    if (op == "export") {
      const std::string norm = step.at("norm").get<std::string>();
      if (norm != "minmax" && norm != "fixed" && norm != "log")
        reject(where + ".norm", "expected minmax, fixed or log");
      if (norm == "fixed") {
        if (!step.contains("lo") || !step.contains("hi"))
          reject(where, "fixed normalization requires lo and hi");
      } else if (step.contains("lo") || step.contains("hi")) {
        reject(where, "lo/hi only apply to fixed normalization");
      }
    }
    if (op == "blur" && step.contains("profile")) {
      const std::string profile = step.at("profile").get<std::string>();
      if (profile != "disk" && profile != "gaussian")
        reject(where + ".profile", "expected disk or gaussian");
    }

    for (const char* key : spec->input_keys) {
      if (!step.contains(key)) continue;
      const std::string path = step.at(key).get<std::string>();
      const std::string full = resolve(base_dir, path);
      if (!produced.count(full) && !fs::exists(full))
        reject(where + "." + key, "input file not found: " + path);
    }
    if (step.contains("out"))
      produced.insert(resolve(base_dir, step.at("out").get<std::string>()));
  }
}

double step_wavelength(const json& step) {
  if (step.contains("wavelength_m")) {
    const double wl = step.at("wavelength_m").get<double>();
    if (!(wl > 0.0)) throw std::invalid_argument("wavelength_m must be positive");
    return wl;
  }
  return wavelength_from_energy_kev(step.at("energy_keV").get<double>());
}

const char* norm_name(PngNorm n) {
  switch (n) {
    case PngNorm::MinMax: return "minmax";
    case PngNorm::Fixed: return "fixed";
    case PngNorm::Log: return "log";
  }
  return "?";
}

// Executes one validated step; fills `extra` with op-specific telemetry.
void execute_step(const json& step, const std::string& base_dir, WarningLog& log, json& extra) {
  const std::string op = step.at("op").get<std::string>();
  auto in_path = [&](const char* key) {
    return resolve(base_dir, step.at(key).get<std::string>());
  };
  const std::string out = in_path("out");

  if (op == "phantom") {
    Grid2D grid(step.at("nx").get<int>(), step.at("ny").get<int>(),
                step.at("dx_m").get<double>(), step.at("dy_m").get<double>());
    ProjectedObject obj =
        sphere_phantom(grid, step.at("radius_m").get<double>(), step.at("delta").get<double>(),
                       step.at("beta").get<double>(), step_wavelength(step), &log);
    io::write_projected_object(out, obj);
  } else if (op == "project") {
    const std::string in = in_path("in");
    std::ifstream handle(in);
    if (!handle) throw std::runtime_error("cannot open " + in);
    json meta = json::parse(handle);
    if (meta.contains("delta_file")) {
      if (!step.contains("wavelength_m") && !step.contains("energy_keV"))
        throw std::invalid_argument("projecting a volume needs wavelength_m or energy_keV");
      RefractiveVolume vol = io::read_volume(in);
      io::write_projected_object(out, project_volume(vol, step_wavelength(step), &log));
    } else if (meta.value("kind", "") == "projected_object") {
      ProjectedObject obj = io::read_projected_object(in);
      if ((step.contains("wavelength_m") || step.contains("energy_keV")) &&
          step_wavelength(step) != obj.wavelength)
        throw std::invalid_argument("wavelength differs from the projected object's");
      io::write_projected_object(out, obj);
    } else {
      throw std::invalid_argument(in + " is neither a volume nor a projected object");
    }
  } else if (op == "transmit") {
    ProjectedObject obj = io::read_projected_object(in_path("object"));
    if (step.contains("in")) {
      ComplexField illumination = io::read_complex_field(in_path("in"));
      io::write_field(out, apply_transmission(illumination, obj));
    } else {
      io::write_field(out, transmission_function(obj));
    }
  } else if (op == "propagate") {
    ComplexField field = io::read_complex_field(in_path("in"));
    PropagationPlan plan;
    plan.distance = step.at("dist_m").get<double>();
    plan.pad_factor = step.value("pad", 2);
    plan.apodize = step.value("apodize", false);
    io::write_field(out, fresnel_propagate(field, plan, &log));
  } else if (op == "intensity") {
    ComplexField field = io::read_complex_field(in_path("in"));
    io::write_field(out, intensity_and_phase(field).intensity, field.wavelength);
  } else if (op == "paganin") {
    io::RealFieldFile in = io::read_real_field(in_path("in"));
    PaganinResult res = paganin_thickness(in.field, step.at("i0").get<double>(),
                                          step.at("delta").get<double>(),
                                          step.at("mu_per_m").get<double>(),
                                          step.at("dist_m").get<double>(), &log);
    extra["clamped"] = res.clamped;
    io::write_field(out, res.thickness, in.wavelength);
  } else if (op == "blur") {
    io::RealFieldFile in = io::read_real_field(in_path("in"));
    ConeBeamGeometry geom;
    geom.z1 = step.at("z1_m").get<double>();
    geom.z2 = step.at("z2_m").get<double>();
    const BlurProfile profile =
        step.value("profile", "disk") == std::string("gaussian") ? BlurProfile::Gaussian
                                                                 : BlurProfile::Disk;
    io::write_field(out, source_blur(in.field, step.at("source_d_m").get<double>(), geom,
                                     profile, &log),
                    in.wavelength);
  } else if (op == "export") {
    io::RealFieldFile in = io::read_real_field(in_path("in"));
    const std::string norm_key = step.at("norm").get<std::string>();
    const PngNorm norm = norm_key == "minmax"  ? PngNorm::MinMax
                         : norm_key == "fixed" ? PngNorm::Fixed
                                               : PngNorm::Log;
    ExportInfo info = export_png(out, in.field, norm, step.value("lo", 0.0),
                                 step.value("hi", 0.0), &log);
    write_export_sidecar(out, info);
    extra["lo"] = info.lo;
    extra["hi"] = info.hi;
  } else if (op == "lsi") {
    ComplexField field = io::read_complex_field(in_path("in"));
    AberrationSet ab = io::read_aberrations(in_path("aberrations"));
    TransferFunction tf =
        transfer_from_aberrations(field.grid, ab, step.value("allow_gain", false));
    io::write_field(out, apply_lsi(field, tf));
  } else {
    throw std::runtime_error("unreachable op " + op);
  }
}

}  // namespace

json warnings_json(const WarningLog& log) {
  json arr = json::array();
  for (const Warning& w : log.items()) {
    json data = json::object();
    for (const auto& [key, value] : w.data) data[key] = value;
    arr.push_back(json{{"code", w.code}, {"message", w.message}, {"data", data}});
  }
  return arr;
}

void write_export_sidecar(const std::string& png_path, const ExportInfo& info) {
  json sidecar = {{"kind", "png16"},
                  {"norm", norm_name(info.norm)},
                  {"lo", info.lo},
                  {"hi", info.hi}};
  std::ofstream out(io::sidecar_path(png_path), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + io::sidecar_path(png_path));
  out << sidecar.dump(2) << "\n";
}

PipelineResult run_pipeline(const json& config, const std::string& base_dir, WarningLog* log) {
  PipelineResult result;
  result.manifest = json{{"tool", "xpci"},
                         {"format", format_version},
                         {"versions", json{{"xpci", version_string},
                                           {"fftw", std::string(fftw_version)}}},
                         {"steps", json::array()},
                         {"ok", false}};

  try {
    validate_config(config, base_dir);
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.error = e.what();
    result.manifest["error"] = result.error;
    return result;
  }

  const json& steps = config.at("pipeline");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const json& step = steps[i];
    const std::string op = step.at("op").get<std::string>();
    WarningLog step_log;
    json extra = json::object();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      execute_step(step, base_dir, step_log, extra);
    } catch (const std::exception& e) {
      result.exit_code = 1;
      result.error = step_label(i) + " (" + op + "): " + e.what();
      result.manifest["error"] = result.error;
      if (log) log->merge(step_log);
      return result;
    }
    const auto t1 = std::chrono::steady_clock::now();
    json record = {{"index", i},
                   {"op", op},
                   {"params", step},
                   {"warnings", warnings_json(step_log)},
                   {"ms", std::chrono::duration<double, std::milli>(t1 - t0).count()}};
    if (!extra.empty()) record["info"] = extra;
    result.manifest["steps"].push_back(std::move(record));
    if (log) log->merge(step_log);
  }

  result.manifest["ok"] = true;
  if (config.contains("manifest")) {
    const std::string path = resolve(base_dir, config.at("manifest").get<std::string>());
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
      result.exit_code = 1;
      result.error = "cannot write manifest " + path;
      return result;
    }
    out << result.manifest.dump(2) << "\n";
  }
  return result;
}

PipelineResult run_pipeline_file(const std::string& config_path, WarningLog* log) {
  std::ifstream in(config_path);
  if (!in) {
    PipelineResult result;
    result.exit_code = 2;
    result.error = "cannot open config " + config_path;
    return result;
  }
  json config;
  try {
    config = json::parse(in);
  } catch (const std::exception& e) {
    PipelineResult result;
    result.exit_code = 2;
    result.error = std::string("config parse error: ") + e.what();
    return result;
  }
  const std::string base = fs::path(config_path).parent_path().string();
  return run_pipeline(config, base.empty() ? "." : base, log);
}

}  // namespace xpci
