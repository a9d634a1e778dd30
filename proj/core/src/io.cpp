#include "xpci/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace xpci::io {

static_assert(std::endian::native == std::endian::little,
              "raw field files are little endian; big endian hosts need byte swapping");
static_assert(sizeof(double) == 8 && sizeof(float) == 4, "IEEE 754 layout required");

namespace {

namespace fs = std::filesystem;

void write_bytes(const std::string& path, const void* data, std::size_t bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw std::runtime_error("short write: " + path);
}

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(size));
  in.read(buf.data(), size);
  if (!in) throw std::runtime_error("short read: " + path);
  return buf;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": malformed JSON: " + e.what());
  }
  return j;
}

template <typename T>
T require_key(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key))
    throw std::invalid_argument(where + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(where + ": key \"" + key + "\" has the wrong type");
  }
}

std::string resolve_sibling(const std::string& anchor, const std::string& rel) {
  const fs::path p(rel);
  if (p.is_absolute()) return rel;
  return (fs::path(anchor).parent_path() / p).string();
}

json field_header(const Grid2D& g, double wavelength, const char* kind) {
  return json{{"nx", g.nx},         {"ny", g.ny},
              {"dx_m", g.dx},       {"dy_m", g.dy},
              {"wavelength_m", wavelength}, {"kind", kind}};
}

Grid2D grid_from_header(const json& h, const std::string& where) {
  return Grid2D(require_key<int>(h, "nx", where), require_key<int>(h, "ny", where),
                require_key<double>(h, "dx_m", where), require_key<double>(h, "dy_m", where));
}

}  // namespace

std::string sidecar_path(const std::string& data_path) { return data_path + ".json"; }

void write_field(const std::string& path, const ComplexField& field, const json& extra) {
  require_finite(field, "write_field");
  write_bytes(path, field.v.data(), field.v.size() * sizeof(complexd));
  json header = field_header(field.grid, field.wavelength, "complex");
  header.update(extra);
  write_json(sidecar_path(path), header);
}

void write_field(const std::string& path, const RealField& field, double wavelength,
                 const json& extra) {
  require_finite(field, "write_field");
  write_bytes(path, field.v.data(), field.v.size() * sizeof(double));
  json header = field_header(field.grid, wavelength, "real");
  header.update(extra);
  write_json(sidecar_path(path), header);
}

ComplexField read_complex_field(const std::string& path) {
  const json h = read_json(sidecar_path(path));
  const std::string where = sidecar_path(path);
  if (require_key<std::string>(h, "kind", where) != "complex")
    throw std::invalid_argument(where + ": expected kind \"complex\"");
  const Grid2D g = grid_from_header(h, where);
  const double lambda = require_key<double>(h, "wavelength_m", where);

  const std::vector<char> raw = read_bytes(path);
  if (raw.size() != g.size() * sizeof(complexd))
    throw std::runtime_error(path + ": payload is " + std::to_string(raw.size()) +
                                " bytes but the sidecar declares " +
                                std::to_string(g.size() * sizeof(complexd)));
  ComplexField f(g, lambda);
  std::memcpy(f.v.data(), raw.data(), raw.size());
  require_finite(f, "read_complex_field");
  return f;
}

RealFieldFile read_real_field(const std::string& path) {
  const json h = read_json(sidecar_path(path));
  const std::string where = sidecar_path(path);
  if (require_key<std::string>(h, "kind", where) != "real")
    throw std::invalid_argument(where + ": expected kind \"real\"");
  const Grid2D g = grid_from_header(h, where);

  const std::vector<char> raw = read_bytes(path);
  if (raw.size() != g.size() * sizeof(double))
    throw std::runtime_error(path + ": payload is " + std::to_string(raw.size()) +
                                " bytes but the sidecar declares " +
                                std::to_string(g.size() * sizeof(double)));
  RealFieldFile out{RealField(g), require_key<double>(h, "wavelength_m", where)};
  std::memcpy(out.field.v.data(), raw.data(), raw.size());
  require_finite(out.field, "read_real_field");
  return out;
}

void write_volume(const std::string& json_path, const RefractiveVolume& vol) {
  validate(vol, nullptr);
  const fs::path base(json_path);
  const std::string stem = base.stem().string();
  const std::string delta_rel = stem + ".delta.f32";
  const std::string beta_rel = stem + ".beta.f32";
  write_bytes(resolve_sibling(json_path, delta_rel), vol.delta.data(),
              vol.delta.size() * sizeof(float));
  write_bytes(resolve_sibling(json_path, beta_rel), vol.beta.data(),
              vol.beta.size() * sizeof(float));
  write_json(json_path, json{{"nx", vol.nx},
                             {"ny", vol.ny},
                             {"nz", vol.nz},
                             {"dx_m", vol.dx},
                             {"dy_m", vol.dy},
                             {"dz_m", vol.dz},
                             {"delta_file", delta_rel},
                             {"beta_file", beta_rel}});
}

RefractiveVolume read_volume(const std::string& json_path) {
  const json h = read_json(json_path);
  RefractiveVolume vol;
  vol.nx = require_key<int>(h, "nx", json_path);
  vol.ny = require_key<int>(h, "ny", json_path);
  vol.nz = require_key<int>(h, "nz", json_path);
  vol.dx = require_key<double>(h, "dx_m", json_path);
  vol.dy = require_key<double>(h, "dy_m", json_path);
  vol.dz = require_key<double>(h, "dz_m", json_path);

  for (const auto& [key, member] :
       {std::pair{"delta_file", &vol.delta}, std::pair{"beta_file", &vol.beta}}) {
    const std::string file = resolve_sibling(json_path, require_key<std::string>(h, key, json_path));
    const std::vector<char> raw = read_bytes(file);
    const std::size_t expected =
        static_cast<std::size_t>(vol.nx) * vol.ny * vol.nz * sizeof(float);
    if (raw.size() != expected)
      throw std::runtime_error(file + ": payload is " + std::to_string(raw.size()) +
                                  " bytes but the sidecar declares " + std::to_string(expected));
    member->resize(raw.size() / sizeof(float));
    std::memcpy(member->data(), raw.data(), raw.size());
  }
  validate(vol, nullptr);
  return vol;
}

void write_projected_object(const std::string& json_path, const ProjectedObject& obj) {
  validate(obj);
  const std::string stem = fs::path(json_path).stem().string();
  const std::string phase_rel = stem + ".phase.f64";
  const std::string att_rel = stem + ".att.f64";
  write_bytes(resolve_sibling(json_path, phase_rel), obj.phase_shift.data(),
              obj.phase_shift.size() * sizeof(double));
  write_bytes(resolve_sibling(json_path, att_rel), obj.attenuation_integral.data(),
              obj.attenuation_integral.size() * sizeof(double));
  write_json(json_path, json{{"kind", "projected_object"},
                             {"nx", obj.grid.nx},
                             {"ny", obj.grid.ny},
                             {"dx_m", obj.grid.dx},
                             {"dy_m", obj.grid.dy},
                             {"wavelength_m", obj.wavelength},
                             {"phase_file", phase_rel},
                             {"attenuation_file", att_rel}});
}

ProjectedObject read_projected_object(const std::string& json_path) {
  const json h = read_json(json_path);
  if (require_key<std::string>(h, "kind", json_path) != "projected_object")
    throw std::invalid_argument(json_path + ": expected kind \"projected_object\"");
  ProjectedObject obj;
  obj.grid = grid_from_header(h, json_path);
  obj.wavelength = require_key<double>(h, "wavelength_m", json_path);
  for (const auto& [key, member] : {std::pair{"phase_file", &obj.phase_shift},
                                    std::pair{"attenuation_file", &obj.attenuation_integral}}) {
    const std::string file = resolve_sibling(json_path, require_key<std::string>(h, key, json_path));
    const std::vector<char> raw = read_bytes(file);
    if (raw.size() != obj.grid.size() * sizeof(double))
      throw std::invalid_argument(file + ": payload size does not match the sidecar grid");
    member->resize(obj.grid.size());
    std::memcpy(member->data(), raw.data(), raw.size());
  }
  validate(obj);
  return obj;
}

void write_aberrations(const std::string& path, const AberrationSet& ab) {
  validate(ab);
  json arr = json::array();
  for (const auto& [mn, a] : ab.coeff)
    arr.push_back(json{{"m", mn.first}, {"n", mn.second}, {"re", a.real()}, {"im", a.imag()}});
  write_json(path, arr);
}

AberrationSet read_aberrations(const std::string& path) {
  const json arr = read_json(path);
  if (!arr.is_array())
    throw std::invalid_argument(path + ": aberration file must be a JSON array");
  AberrationSet ab;
  for (const auto& e : arr) {
    const int m = require_key<int>(e, "m", path);
    const int n = require_key<int>(e, "n", path);
    ab.coeff[{m, n}] = complexd{require_key<double>(e, "re", path),
                                require_key<double>(e, "im", path)};
  }
  validate(ab);
  return ab;
}

void write_ensemble(const std::string& manifest_path, const Ensemble& ens,
                    const std::string& member_prefix) {
  validate(ens);
  json members = json::array();
  for (std::size_t j = 0; j < ens.members.size(); ++j) {
    const std::string rel = member_prefix + std::to_string(j) + ".bin";
    write_field(resolve_sibling(manifest_path, rel), ens.members[j]);
    members.push_back(json{{"field", rel}, {"weight", ens.weights[j]}});
  }
  write_json(manifest_path, json{{"members", members}});
}

Ensemble read_ensemble(const std::string& manifest_path) {
  const json h = read_json(manifest_path);
  if (!h.contains("members") || !h.at("members").is_array())
    throw std::invalid_argument(manifest_path + ": missing \"members\" array");
  Ensemble ens;
  for (const auto& e : h.at("members")) {
    const std::string rel = require_key<std::string>(e, "field", manifest_path);
    ens.members.push_back(read_complex_field(resolve_sibling(manifest_path, rel)));
    ens.weights.push_back(require_key<double>(e, "weight", manifest_path));
  }
  validate(ens);
  return ens;
}

}  // namespace xpci::io
