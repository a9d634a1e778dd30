#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "xpci/coherence.hpp"
#include "xpci/field.hpp"
#include "xpci/lsi.hpp"
#include "xpci/sample.hpp"

namespace xpci::io {

using json = nlohmann::json;

// Field files are raw little-endian float64, row major (y slow); complex
// fields interleave (re, im). Every data file <path> has a JSON sidecar
// <path>.json holding at least {nx, ny, dx_m, dy_m, wavelength_m, kind}
// with kind "complex" or "real". Round trips are bit exact. `extra` merges
// additional keys (e.g. "provenance") into the sidecar.
std::string sidecar_path(const std::string& data_path);

void write_field(const std::string& path, const ComplexField& field,
                 const json& extra = json::object());
void write_field(const std::string& path, const RealField& field, double wavelength = 0.0,
                 const json& extra = json::object());

ComplexField read_complex_field(const std::string& path);

struct RealFieldFile {
  RealField field;
  double wavelength = 0.0;
};
RealFieldFile read_real_field(const std::string& path);

// Volumes are described by a JSON file {nx, ny, nz, dx_m, dy_m, dz_m,
// delta_file, beta_file}; the two voxel files are raw little-endian float32
// in (z, y, x) order, paths relative to the JSON file.
void write_volume(const std::string& json_path, const RefractiveVolume& vol);
RefractiveVolume read_volume(const std::string& json_path);

// Projected objects pair two real maps with shared metadata: JSON file
// {kind: "projected_object", nx, ny, dx_m, dy_m, wavelength_m, phase_file,
// attenuation_file}, raw float64 payloads relative to the JSON file.
void write_projected_object(const std::string& json_path, const ProjectedObject& obj);
ProjectedObject read_projected_object(const std::string& json_path);

// Aberration sets serialize as a JSON array [{m, n, re, im}, ...].
void write_aberrations(const std::string& path, const AberrationSet& ab);
AberrationSet read_aberrations(const std::string& path);

// Ensemble manifests: {"members": [{"field": path, "weight": w}, ...]},
// field paths relative to the manifest.
void write_ensemble(const std::string& manifest_path, const Ensemble& ens,
                    const std::string& member_prefix);
Ensemble read_ensemble(const std::string& manifest_path);

}  // namespace xpci::io
