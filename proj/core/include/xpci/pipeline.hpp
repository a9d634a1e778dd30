#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "xpci/png_io.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Batch pipelines are JSON configs:
//
//   {
//     "pipeline": [ {"op": "...", ...}, ... ],
//     "manifest": "run.json"            // optional, written on success
//   }
//
// Steps execute in list order. Relative paths resolve against base_dir.
// Operations and their keys:
//
//   phantom    out, nx, ny, dx_m, dy_m, radius_m, delta, beta,
//              wavelength_m | energy_keV      -> projected-object handle
//   project    in, out [, wavelength_m | energy_keV]
//              volume handle -> projection; object handle -> passthrough
//   transmit   object, out [, in]             object handle (+ incident
//              field) -> complex exit field
//   propagate  in, out, dist_m [, pad, apodize]
//   intensity  in, out                        complex field -> |psi|^2
//   paganin    in, out, i0, delta, mu_per_m, dist_m
//   blur       in, out, source_d_m, z1_m, z2_m [, profile: disk|gaussian]
//   export     in, out, norm: minmax|log|fixed [, lo, hi]
//   lsi        in, out, aberrations [, allow_gain]
//
// The config is validated in full (key types, op names, input files that no
// earlier step produces) before anything runs, so a rejected config leaves
// no partial outputs. Unknown ops or keys are rejected.
struct PipelineResult {
  int exit_code = 0;        // 0 ok, 1 runtime failure, 2 config rejected
  std::string error;        // empty on success
  nlohmann::json manifest;  // versions, per-step params/warnings/timings
};

PipelineResult run_pipeline(const nlohmann::json& config, const std::string& base_dir,
                            WarningLog* log = nullptr);

// Parses the file and runs it with base_dir set to the config's directory.
// A config that fails to parse reports exit code 2.
PipelineResult run_pipeline_file(const std::string& config_path, WarningLog* log = nullptr);

// Records the quantization window chosen by export_png in <png path>.json.
void write_export_sidecar(const std::string& png_path, const ExportInfo& info);

// Serializes a warning log as [{code, message, data}, ...] for manifests,
// provenance sidecars and diagnostics.
nlohmann::json warnings_json(const WarningLog& log);

}  // namespace xpci
