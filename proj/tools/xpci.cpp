// Batch front end for the xpci library: forward simulation, retrieval and
// diagnostic exports driven from the command line. Exit codes: 0 success,
// 1 runtime failure, 2 bad configuration or arguments. Warnings stream to
// stderr as JSON lines; every output file carries a provenance sidecar.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xpci/coherence.hpp"
#include "xpci/constants.hpp"
#include "xpci/fokker_planck.hpp"
#include "xpci/io.hpp"
#include "xpci/lsi.hpp"
#include "xpci/multislice.hpp"
#include "xpci/pipeline.hpp"
#include "xpci/png_io.hpp"
#include "xpci/propagation.hpp"
#include "xpci/retrieval.hpp"
#include "xpci/sample.hpp"
#include "xpci/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void report_warnings(const xpci::WarningLog& log) {
  for (const xpci::Warning& w : log.items()) {
    json data = json::object();
    for (const auto& [key, value] : w.data) data[key] = value;
    std::cerr << json{{"warning", w.code}, {"message", w.message}, {"data", data}}.dump()
              << "\n";
  }
}

json provenance(const std::string& command, json params, std::vector<std::string> inputs,
                const xpci::WarningLog& log) {
  return json{{"tool", "xpci"},
              {"version", xpci::version_string},
              {"format", xpci::format_version},
              {"command", command},
              {"params", std::move(params)},
              {"inputs", std::move(inputs)},
              {"warnings", xpci::warnings_json(log)}};
}

// Inserts a "provenance" key into an existing JSON file (object handles,
// ensemble manifests, PNG sidecars).
void attach_provenance(const std::string& json_path, const json& prov) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot reopen " + json_path);
  json j = json::parse(in);
  in.close();
  j["provenance"] = prov;
  std::ofstream out(json_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot rewrite " + json_path);
  out << j.dump(2) << "\n";
}

void require_input(const std::string& path) {
  if (!fs::exists(path)) throw std::invalid_argument("input file not found: " + path);
}

json parse_json_file(const std::string& path) {
  require_input(path);
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string sibling(const std::string& anchor, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return p.string();
  return (fs::path(anchor).parent_path() / p).string();
}

// Wavelength arrives either directly in meters or as a photon energy.
struct WavelengthOpt {
  double wavelength_m = 0.0;
  double energy_kev = 0.0;
};

void add_wavelength_options(CLI::App* cmd, WavelengthOpt& w) {
  CLI::Option* a = cmd->add_option("--wavelength", w.wavelength_m, "vacuum wavelength [m]");
  CLI::Option* b = cmd->add_option("--energy-kev", w.energy_kev, "photon energy [keV]");
  a->excludes(b);
  b->excludes(a);
}

double resolve_wavelength(const CLI::App* cmd, const WavelengthOpt& w) {
  const bool have_wl = cmd->count("--wavelength") > 0;
  const bool have_ev = cmd->count("--energy-kev") > 0;
  if (!have_wl && !have_ev)
    throw std::invalid_argument("one of --wavelength or --energy-kev is required");
  if (have_wl) {
    if (!(w.wavelength_m > 0.0)) throw std::invalid_argument("--wavelength must be positive");
    return w.wavelength_m;
  }
  return xpci::wavelength_from_energy_kev(w.energy_kev);
}

xpci::Regularizer parse_regularizer(const std::string& text) {
  if (text == "auto") return xpci::Regularizer::automatic();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size())
    throw std::invalid_argument("--reg expects a number or \"auto\", got \"" + text + "\"");
  return xpci::Regularizer::fixed(value);
}

// Cascade stage lists are JSON arrays: {"type": "transmission", "field": f}
// or {"type": "transmission", "object": h}, {"type": "propagate", "dist_m":
// d, "pad": 2, "apodize": false}, {"type": "filter", "aberrations": a,
// "allow_gain": false}. Paths resolve relative to the list file.
std::vector<xpci::CascadeStage> load_stages(const std::string& path, const xpci::Grid2D& grid) {
  const json stages_json = parse_json_file(path);
  if (!stages_json.is_array())
    throw std::invalid_argument(path + ": expected a JSON array of stages");
  std::vector<xpci::CascadeStage> stages;
  for (std::size_t i = 0; i < stages_json.size(); ++i) {
    const json& s = stages_json[i];
    const std::string label = path + "[" + std::to_string(i) + "]";
    if (!s.is_object() || !s.contains("type") || !s.at("type").is_string())
      throw std::invalid_argument(label + ": stage needs a \"type\" string");
    const std::string type = s.at("type").get<std::string>();
    if (type == "transmission") {
      if (s.contains("field")) {
        stages.push_back(xpci::TransmissionStage{
            xpci::io::read_complex_field(sibling(path, s.at("field").get<std::string>()))});
      } else if (s.contains("object")) {
        xpci::ProjectedObject obj =
            xpci::io::read_projected_object(sibling(path, s.at("object").get<std::string>()));
        stages.push_back(xpci::TransmissionStage{xpci::transmission_function(obj)});
      } else {
        throw std::invalid_argument(label + ": transmission stage needs \"field\" or \"object\"");
      }
    } else if (type == "propagate") {
      if (!s.contains("dist_m") || !s.at("dist_m").is_number())
        throw std::invalid_argument(label + ": propagate stage needs numeric \"dist_m\"");
      xpci::PropagationPlan plan;
      plan.distance = s.at("dist_m").get<double>();
      plan.pad_factor = s.value("pad", 2);
      plan.apodize = s.value("apodize", false);
      stages.push_back(xpci::PropagateStage{plan});
    } else if (type == "filter") {
      if (!s.contains("aberrations"))
        throw std::invalid_argument(label + ": filter stage needs \"aberrations\"");
      xpci::AberrationSet ab =
          xpci::io::read_aberrations(sibling(path, s.at("aberrations").get<std::string>()));
      stages.push_back(xpci::FilterStage{
          xpci::transfer_from_aberrations(grid, ab, s.value("allow_gain", false))});
    } else {
      throw std::invalid_argument(label + ": unknown stage type \"" + type + "\"");
    }
  }
  return stages;
}

// ---------------------------------------------------------------------------
// Fresnel-number contour map (feature size a vertical, distance z
// horizontal, both log-spaced at pixel centres, row 0 carrying a_max).
// N_F = a^2 / (lambda z); log N_F is linear in the pixel coordinates, so
// crossing pixels sit within one pixel of the analytic contour.

struct FresnelMapSpec {
  double a_min = 0.0, a_max = 0.0;
  double z_min = 0.0, z_max = 0.0;
  double wavelength = 0.0;
  int width = 512, height = 512;
  int levels = 12;
};

constexpr std::uint16_t kContourValue = 60000;
constexpr std::uint16_t kHighlightValue = 65535;
constexpr double kHighlightLevel = 10.0;

xpci::Png16 render_fresnel_map(const FresnelMapSpec& spec) {
  if (!(spec.a_min > 0.0) || !(spec.z_min > 0.0))
    throw std::invalid_argument("fresnel-map: ranges must be positive");
  if (spec.a_max < spec.a_min || spec.z_max < spec.z_min)
    throw std::invalid_argument("fresnel-map: range maxima must not undercut minima");
  if (!(spec.wavelength > 0.0))
    throw std::invalid_argument("fresnel-map: wavelength must be positive");
  if (spec.width < 1 || spec.height < 1 || spec.levels < 0)
    throw std::invalid_argument("fresnel-map: bad raster dimensions");

  const int w = spec.width, h = spec.height;
  auto z_at = [&](int i) {
    if (spec.z_max == spec.z_min) return spec.z_min;
    return spec.z_min * std::pow(spec.z_max / spec.z_min, (i + 0.5) / w);
  };
  auto a_at = [&](int j) {
    if (spec.a_max == spec.a_min) return spec.a_min;
    return spec.a_max * std::pow(spec.a_min / spec.a_max, (j + 0.5) / h);
  };

  std::vector<double> f(static_cast<std::size_t>(w) * h);
  double fmin = INFINITY, fmax = -INFINITY;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const double nf = a_at(j) * a_at(j) / (spec.wavelength * z_at(i));
      const double v = std::log10(nf);
      f[static_cast<std::size_t>(j) * w + i] = v;
      fmin = std::min(fmin, v);
      fmax = std::max(fmax, v);
    }

  xpci::Png16 image;
  image.width = w;
  image.height = h;
  image.pixels.assign(f.size(), 32768);
  if (fmax > fmin) {
    const double scale = 52000.0 / (fmax - fmin);
    for (std::size_t p = 0; p < f.size(); ++p)
      image.pixels[p] = static_cast<std::uint16_t>(std::lround((f[p] - fmin) * scale));
  }

  auto draw_level = [&](double level_nf, std::uint16_t value) {
    const double level = std::log10(level_nf);
    if (level <= fmin || level >= fmax) return;
    auto mark = [&](int i0, int j0, int i1, int j1) {
      const double d0 = f[static_cast<std::size_t>(j0) * w + i0] - level;
      const double d1 = f[static_cast<std::size_t>(j1) * w + i1] - level;
      if (d0 * d1 > 0.0) return;
      if (std::abs(d0) <= std::abs(d1))
        image.pixels[static_cast<std::size_t>(j0) * w + i0] = value;
      else
        image.pixels[static_cast<std::size_t>(j1) * w + i1] = value;
    };
    for (int j = 0; j < h; ++j)
      for (int i = 0; i < w; ++i) {
        if (i + 1 < w) mark(i, j, i + 1, j);
        if (j + 1 < h) mark(i, j, i, j + 1);
      }
  };

  if (fmax > fmin) {
    for (int t = 0; t < spec.levels; ++t) {
      const double level = fmin + (t + 1) * (fmax - fmin) / (spec.levels + 1);
      draw_level(std::pow(10.0, level), kContourValue);
    }
    draw_level(kHighlightLevel, kHighlightValue);
  }
  return image;
}

// ---------------------------------------------------------------------------
// Per-subcommand option blocks. Each subcommand's callback throws on
// failure; main translates exceptions into exit codes.

struct PropagateOpts {
  std::string in, out;
  double dist = 0.0;
  int pad = 2;
  bool apodize = false;
};

struct ProjectOpts {
  std::string in, out;
  WavelengthOpt wl;
};

struct PhantomOpts {
  std::string out;
  int nx = 256, ny = 256;
  double dx = 0.0, dy = 0.0;
  double radius = 0.0, delta = 0.0, beta = 0.0;
  WavelengthOpt wl;
};

struct MultisliceOpts {
  std::string in, out, illum, scheme = "ptp", slices = "1";
  int pad = 1;
  bool apodize = false;
  WavelengthOpt wl;
};

struct LsiOpts {
  std::string in, out, aberr;
  bool allow_gain = false;
};

struct CascadeOpts {
  std::string in, out, pipeline;
};

struct EnsemblePropagateOpts {
  std::string manifest, out;
  double dist = 0.0;
  int pad = 2;
  bool apodize = false;
};

struct EnsembleIntensityOpts {
  std::string manifest, out;
};

struct BlurOpts {
  std::string in, out, profile = "disk";
  double source_d = 0.0, z1 = 0.0, z2 = 0.0;
};

struct FpStepOpts {
  std::string intensity, phase, out, d_map;
  double dz = 0.0, d = 0.0;
  WavelengthOpt wl;
};

struct PaganinOpts {
  std::string in, out;
  double i0 = 1.0, delta = 0.0, mu = 0.0, dist = 0.0;
};

struct SchiskeOpts {
  std::string manifest, out, reg = "auto";
};

struct CtfOpts {
  std::string manifest, out, reg = "auto";
};

struct DarkfieldOpts {
  std::string a, b, out_dphi, out_theta2;
  WavelengthOpt wl;
};

struct FresnelMapOpts {
  std::string out;
  FresnelMapSpec spec;
  WavelengthOpt wl;
};

struct ExportOpts {
  std::string in, out, norm = "minmax";
  double lo = 0.0, hi = 0.0;
};

struct RunOpts {
  std::string config;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xpci: paraxial wave-optics simulation and phase retrieval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", xpci::version_string);
  int exit_code = 0;

  // propagate -------------------------------------------------------------
  auto po = std::make_shared<PropagateOpts>();
  CLI::App* propagate = app.add_subcommand("propagate", "Fresnel-propagate a complex field");
  propagate->add_option("--in", po->in, "input complex field")->required();
  propagate->add_option("--out", po->out, "output complex field")->required();
  propagate->add_option("--dist", po->dist, "propagation distance [m]")->required();
  propagate->add_option("--pad", po->pad, "zero-padding factor (1, 2 or 4)");
  propagate->add_flag("--apodize", po->apodize, "raised-cosine edge taper");
  propagate->callback([po]() {
    require_input(po->in);
    xpci::ComplexField field = xpci::io::read_complex_field(po->in);
    xpci::PropagationPlan plan;
    plan.distance = po->dist;
    plan.pad_factor = po->pad;
    plan.apodize = po->apodize;
    xpci::WarningLog log;
    xpci::ComplexField out = xpci::fresnel_propagate(field, plan, &log);
    xpci::io::write_field(
        po->out, out,
        json{{"provenance",
              provenance("propagate",
                         json{{"dist_m", po->dist}, {"pad", po->pad}, {"apodize", po->apodize}},
                         {po->in}, log)}});
    report_warnings(log);
  });

  // project ---------------------------------------------------------------
  auto pj = std::make_shared<ProjectOpts>();
  CLI::App* project =
      app.add_subcommand("project", "Project a refractive volume to phase and attenuation");
  project->add_option("--in", pj->in, "volume or projected-object handle")->required();
  project->add_option("--out", pj->out, "output projected-object handle")->required();
  add_wavelength_options(project, pj->wl);
  project->callback([pj, project]() {
    require_input(pj->in);
    const json meta = parse_json_file(pj->in);
    xpci::WarningLog log;
    xpci::ProjectedObject obj;
    if (meta.contains("delta_file")) {
      obj = xpci::project_volume(xpci::io::read_volume(pj->in),
                                 resolve_wavelength(project, pj->wl), &log);
    } else if (meta.value("kind", "") == "projected_object") {
      obj = xpci::io::read_projected_object(pj->in);
    } else {
      throw std::invalid_argument(pj->in + " is neither a volume nor a projected object");
    }
    xpci::io::write_projected_object(pj->out, obj);
    attach_provenance(pj->out, provenance("project", json{{"wavelength_m", obj.wavelength}},
                                          {pj->in}, log));
    report_warnings(log);
  });

  // phantom ---------------------------------------------------------------
  auto ph = std::make_shared<PhantomOpts>();
  CLI::App* phantom = app.add_subcommand("phantom", "Analytic projected sphere phantom");
  phantom->add_option("--out", ph->out, "output projected-object handle")->required();
  phantom->add_option("--nx", ph->nx, "grid width [pixels]");
  phantom->add_option("--ny", ph->ny, "grid height [pixels]");
  phantom->add_option("--dx", ph->dx, "pixel pitch x [m]")->required();
  phantom->add_option("--dy", ph->dy, "pixel pitch y [m]")->required();
  phantom->add_option("--radius", ph->radius, "sphere radius [m]")->required();
  phantom->add_option("--delta", ph->delta, "refractive index decrement")->required();
  phantom->add_option("--beta", ph->beta, "absorption index")->required();
  add_wavelength_options(phantom, ph->wl);
  phantom->callback([ph, phantom]() {
    const double wl = resolve_wavelength(phantom, ph->wl);
    xpci::WarningLog log;
    xpci::ProjectedObject obj = xpci::sphere_phantom(xpci::Grid2D(ph->nx, ph->ny, ph->dx, ph->dy),
                                                     ph->radius, ph->delta, ph->beta, wl, &log);
    xpci::io::write_projected_object(ph->out, obj);
    attach_provenance(ph->out,
                      provenance("phantom",
                                 json{{"nx", ph->nx},
                                      {"ny", ph->ny},
                                      {"dx_m", ph->dx},
                                      {"dy_m", ph->dy},
                                      {"radius_m", ph->radius},
                                      {"delta", ph->delta},
                                      {"beta", ph->beta},
                                      {"wavelength_m", wl}},
                                 {}, log));
    report_warnings(log);
  });

  // multislice --------------------------------------------------------------
  auto ms = std::make_shared<MultisliceOpts>();
  CLI::App* multislice =
      app.add_subcommand("multislice", "Beam propagation through a refractive volume");
  multislice->add_option("--in", ms->in, "volume handle")->required();
  multislice->add_option("--out", ms->out, "output complex exit field")->required();
  multislice->add_option("--illum", ms->illum, "entrance field (default unit plane wave)");
  multislice->add_option("--scheme", ms->scheme, "slice order: ptp or prp")
      ->check(CLI::IsMember({"ptp", "prp"}));
  multislice->add_option("--slices", ms->slices, "sub-slices per voxel slice, or \"auto\"");
  multislice->add_option("--pad", ms->pad, "zero-padding factor (1, 2 or 4)");
  multislice->add_flag("--apodize", ms->apodize, "raised-cosine edge taper");
  add_wavelength_options(multislice, ms->wl);
  multislice->callback([ms, multislice]() {
    require_input(ms->in);
    xpci::RefractiveVolume vol = xpci::io::read_volume(ms->in);
    xpci::ComplexField entrance;
    std::vector<std::string> inputs{ms->in};
    if (!ms->illum.empty()) {
      require_input(ms->illum);
      entrance = xpci::io::read_complex_field(ms->illum);
      inputs.push_back(ms->illum);
    } else {
      entrance = xpci::ComplexField(vol.transverse_grid(),
                                    resolve_wavelength(multislice, ms->wl), {1.0, 0.0});
    }
    xpci::MultisliceOptions opts;
    opts.scheme = ms->scheme == "prp" ? xpci::SliceScheme::PropagateThenProject
                                      : xpci::SliceScheme::ProjectThenPropagate;
    opts.pad_factor = ms->pad;
    opts.apodize = ms->apodize;
    xpci::WarningLog log;
    xpci::ComplexField exit_field;
    int used_subdivision = 1;
    if (ms->slices == "auto") {
      exit_field = xpci::multislice_auto(entrance, vol, opts, 1e-3, 64, &used_subdivision, &log);
    } else {
      try {
        std::size_t used = 0;
        opts.subdivision = std::stoi(ms->slices, &used);
        if (used != ms->slices.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::invalid_argument("--slices expects an integer or \"auto\"");
      }
      used_subdivision = opts.subdivision;
      exit_field = xpci::multislice_propagate(entrance, vol, opts, &log);
    }
    xpci::io::write_field(
        ms->out, exit_field,
        json{{"provenance", provenance("multislice",
                                       json{{"scheme", ms->scheme},
                                            {"slices", ms->slices},
                                            {"subdivision", used_subdivision},
                                            {"pad", ms->pad},
                                            {"apodize", ms->apodize}},
                                       inputs, log)}});
    report_warnings(log);
  });

  // lsi ---------------------------------------------------------------------
  auto lo = std::make_shared<LsiOpts>();
  CLI::App* lsi = app.add_subcommand("lsi", "Apply an aberration transfer function");
  lsi->add_option("--aberr", lo->aberr, "aberration coefficient file")->required();
  lsi->add_option("--in", lo->in, "input complex field")->required();
  lsi->add_option("--out", lo->out, "output complex field")->required();
  lsi->add_flag("--allow-gain", lo->allow_gain, "skip the passivity check");
  lsi->callback([lo]() {
    require_input(lo->in);
    require_input(lo->aberr);
    xpci::ComplexField field = xpci::io::read_complex_field(lo->in);
    xpci::AberrationSet ab = xpci::io::read_aberrations(lo->aberr);
    xpci::TransferFunction tf =
        xpci::transfer_from_aberrations(field.grid, ab, lo->allow_gain);
    xpci::WarningLog log;
    xpci::io::write_field(
        lo->out, xpci::apply_lsi(field, tf),
        json{{"provenance", provenance("lsi", json{{"allow_gain", lo->allow_gain}},
                                       {lo->in, lo->aberr}, log)}});
    report_warnings(log);
  });

  // cascade -----------------------------------------------------------------
  auto co = std::make_shared<CascadeOpts>();
  CLI::App* cascade_cmd = app.add_subcommand("cascade", "Run a staged imaging system");
  cascade_cmd->add_option("--pipeline", co->pipeline, "JSON stage list")->required();
  cascade_cmd->add_option("--in", co->in, "input complex field")->required();
  cascade_cmd->add_option("--out", co->out, "output complex field")->required();
  cascade_cmd->callback([co]() {
    require_input(co->in);
    xpci::ComplexField field = xpci::io::read_complex_field(co->in);
    std::vector<xpci::CascadeStage> stages = load_stages(co->pipeline, field.grid);
    xpci::WarningLog log;
    xpci::ComplexField out = xpci::cascade(field, stages, &log);
    xpci::io::write_field(
        co->out, out,
        json{{"provenance", provenance("cascade", json{{"stages", stages.size()}},
                                       {co->in, co->pipeline}, log)}});
    report_warnings(log);
  });

  // ensemble ----------------------------------------------------------------
  CLI::App* ensemble = app.add_subcommand("ensemble", "Partially coherent ensemble operations");
  ensemble->require_subcommand(1);

  auto ep = std::make_shared<EnsemblePropagateOpts>();
  CLI::App* ens_prop = ensemble->add_subcommand("propagate", "Propagate every member");
  ens_prop->add_option("--manifest", ep->manifest, "ensemble manifest")->required();
  ens_prop->add_option("--out", ep->out, "output ensemble manifest")->required();
  ens_prop->add_option("--dist", ep->dist, "propagation distance [m]")->required();
  ens_prop->add_option("--pad", ep->pad, "zero-padding factor (1, 2 or 4)");
  ens_prop->add_flag("--apodize", ep->apodize, "raised-cosine edge taper");
  ens_prop->callback([ep]() {
    require_input(ep->manifest);
    xpci::Ensemble ens = xpci::io::read_ensemble(ep->manifest);
    xpci::PropagationPlan plan;
    plan.distance = ep->dist;
    plan.pad_factor = ep->pad;
    plan.apodize = ep->apodize;
    xpci::WarningLog log;
    xpci::Ensemble out = xpci::propagate_ensemble(ens, {xpci::PropagateStage{plan}}, &log);
    const std::string prefix = fs::path(ep->out).stem().string() + "_member";
    xpci::io::write_ensemble(ep->out, out, prefix);
    attach_provenance(ep->out, provenance("ensemble propagate",
                                          json{{"dist_m", ep->dist},
                                               {"pad", ep->pad},
                                               {"apodize", ep->apodize}},
                                          {ep->manifest}, log));
    report_warnings(log);
  });

  auto ei = std::make_shared<EnsembleIntensityOpts>();
  CLI::App* ens_int = ensemble->add_subcommand("intensity", "Ensemble-averaged intensity");
  ens_int->add_option("--manifest", ei->manifest, "ensemble manifest")->required();
  ens_int->add_option("--out", ei->out, "output real image")->required();
  ens_int->callback([ei]() {
    require_input(ei->manifest);
    xpci::Ensemble ens = xpci::io::read_ensemble(ei->manifest);
    xpci::WarningLog log;
    xpci::RealField s = xpci::spectral_density(ens);
    const double wl = ens.members.empty() ? 0.0 : ens.members[0].wavelength;
    xpci::io::write_field(ei->out, s, wl,
                          json{{"provenance", provenance("ensemble intensity", json::object(),
                                                         {ei->manifest}, log)}});
    report_warnings(log);
  });

  // blur ----------------------------------------------------------------------
  auto bo = std::make_shared<BlurOpts>();
  CLI::App* blur = app.add_subcommand("blur", "Finite source-size blur of an image");
  blur->add_option("--in", bo->in, "input real image")->required();
  blur->add_option("--out", bo->out, "output real image")->required();
  blur->add_option("--source-d", bo->source_d, "source diameter (disk) or FWHM (gaussian) [m]")
      ->required();
  blur->add_option("--z1", bo->z1, "source-to-sample distance [m]")->required();
  blur->add_option("--z2", bo->z2, "sample-to-detector distance [m]")->required();
  blur->add_option("--profile", bo->profile, "source profile: disk or gaussian")
      ->check(CLI::IsMember({"disk", "gaussian"}));
  blur->callback([bo]() {
    require_input(bo->in);
    xpci::io::RealFieldFile in = xpci::io::read_real_field(bo->in);
    xpci::ConeBeamGeometry geom;
    geom.z1 = bo->z1;
    geom.z2 = bo->z2;
    xpci::WarningLog log;
    xpci::RealField out = xpci::source_blur(
        in.field, bo->source_d, geom,
        bo->profile == "gaussian" ? xpci::BlurProfile::Gaussian : xpci::BlurProfile::Disk,
        &log);
    xpci::io::write_field(bo->out, out, in.wavelength,
                          json{{"provenance", provenance("blur",
                                                         json{{"source_d_m", bo->source_d},
                                                              {"z1_m", bo->z1},
                                                              {"z2_m", bo->z2},
                                                              {"profile", bo->profile}},
                                                         {bo->in}, log)}});
    report_warnings(log);
  });

  // fp-step ---------------------------------------------------------------------
  auto fo = std::make_shared<FpStepOpts>();
  CLI::App* fp = app.add_subcommand("fp-step", "One diffusive transport-of-intensity step");
  fp->add_option("--intensity", fo->intensity, "input intensity image")->required();
  fp->add_option("--phase", fo->phase, "input phase map")->required();
  fp->add_option("--out", fo->out, "output intensity image")->required();
  fp->add_option("--dz", fo->dz, "step length [m]")->required();
  CLI::Option* d_const = fp->add_option("--d", fo->d, "uniform isotropic diffusion coefficient");
  CLI::Option* d_map = fp->add_option("--d-map", fo->d_map, "per-pixel isotropic diffusion map");
  d_const->excludes(d_map);
  d_map->excludes(d_const);
  add_wavelength_options(fp, fo->wl);
  fp->callback([fo, fp]() {
    require_input(fo->intensity);
    require_input(fo->phase);
    const double wl = resolve_wavelength(fp, fo->wl);
    xpci::io::RealFieldFile intensity = xpci::io::read_real_field(fo->intensity);
    xpci::io::RealFieldFile phase = xpci::io::read_real_field(fo->phase);
    xpci::RealField d_field(intensity.field.grid, fo->d);
    std::vector<std::string> inputs{fo->intensity, fo->phase};
    if (!fo->d_map.empty()) {
      require_input(fo->d_map);
      d_field = xpci::io::read_real_field(fo->d_map).field;
      inputs.push_back(fo->d_map);
    }
    xpci::WarningLog log;
    xpci::RealField out = xpci::fp_step(intensity.field, phase.field,
                                        xpci::diffusion_isotropic(d_field), fo->dz, wl, &log);
    xpci::io::write_field(
        fo->out, out, wl,
        json{{"provenance",
              provenance("fp-step", json{{"dz_m", fo->dz}, {"d", fo->d}, {"wavelength_m", wl}},
                         inputs, log)}});
    report_warnings(log);
  });

  // paganin ---------------------------------------------------------------------
  auto pa = std::make_shared<PaganinOpts>();
  CLI::App* paganin = app.add_subcommand("paganin", "Single-image thickness retrieval");
  paganin->add_option("--in", pa->in, "near-field intensity image")->required();
  paganin->add_option("--out", pa->out, "output thickness map [m]")->required();
  paganin->add_option("--i0", pa->i0, "incident intensity")->required();
  paganin->add_option("--delta", pa->delta, "refractive index decrement")->required();
  paganin->add_option("--mu", pa->mu, "linear attenuation coefficient [1/m]")->required();
  paganin->add_option("--dist", pa->dist, "propagation distance [m]")->required();
  paganin->callback([pa]() {
    require_input(pa->in);
    xpci::io::RealFieldFile in = xpci::io::read_real_field(pa->in);
    xpci::WarningLog log;
    xpci::PaganinResult res =
        xpci::paganin_thickness(in.field, pa->i0, pa->delta, pa->mu, pa->dist, &log);
    json params{{"i0", pa->i0},
                {"delta", pa->delta},
                {"mu_per_m", pa->mu},
                {"dist_m", pa->dist},
                {"clamped", res.clamped}};
    xpci::io::write_field(pa->out, res.thickness, in.wavelength,
                          json{{"provenance", provenance("paganin", params, {pa->in}, log)}});
    report_warnings(log);
  });

  // schiske ---------------------------------------------------------------------
  auto so = std::make_shared<SchiskeOpts>();
  CLI::App* schiske = app.add_subcommand("schiske", "Least-squares multi-state field recovery");
  schiske->add_option("--manifest", so->manifest,
                      "JSON {states: [{field, aberrations}, ...]}")
      ->required();
  schiske->add_option("--out", so->out, "output complex field")->required();
  schiske->add_option("--reg", so->reg, "regularization value or \"auto\"");
  schiske->callback([so]() {
    const json manifest = parse_json_file(so->manifest);
    if (!manifest.contains("states") || !manifest.at("states").is_array() ||
        manifest.at("states").empty())
      throw std::invalid_argument(so->manifest + ": needs a non-empty \"states\" array");
    std::vector<xpci::ComplexField> outputs;
    std::vector<xpci::TransferFunction> tfs;
    std::vector<std::string> inputs{so->manifest};
    for (const json& state : manifest.at("states")) {
      const std::string field_path = sibling(so->manifest, state.at("field").get<std::string>());
      const std::string ab_path =
          sibling(so->manifest, state.at("aberrations").get<std::string>());
      require_input(field_path);
      require_input(ab_path);
      outputs.push_back(xpci::io::read_complex_field(field_path));
      tfs.push_back(xpci::transfer_from_aberrations(outputs.back().grid,
                                                    xpci::io::read_aberrations(ab_path),
                                                    state.value("allow_gain", false)));
      inputs.push_back(field_path);
      inputs.push_back(ab_path);
    }
    xpci::WarningLog log;
    xpci::ComplexField rec = xpci::schiske_combine(outputs, tfs, parse_regularizer(so->reg));
    xpci::io::write_field(
        so->out, rec,
        json{{"provenance", provenance("schiske", json{{"reg", so->reg}}, inputs, log)}});
    report_warnings(log);
  });

  // ctf-retrieve -------------------------------------------------------------
  auto ct = std::make_shared<CtfOpts>();
  CLI::App* ctf = app.add_subcommand("ctf-retrieve", "Weak-phase retrieval from intensities");
  ctf->add_option("--manifest", ct->manifest, "JSON {states: [{image, aberrations}, ...]}")
      ->required();
  ctf->add_option("--out", ct->out, "output phase map")->required();
  ctf->add_option("--reg", ct->reg, "regularization value or \"auto\"");
  ctf->callback([ct]() {
    const json manifest = parse_json_file(ct->manifest);
    if (!manifest.contains("states") || !manifest.at("states").is_array() ||
        manifest.at("states").empty())
      throw std::invalid_argument(ct->manifest + ": needs a non-empty \"states\" array");
    std::vector<xpci::RealField> images;
    std::vector<xpci::TransferFunction> tfs;
    std::vector<std::string> inputs{ct->manifest};
    double wl = 0.0;
    for (const json& state : manifest.at("states")) {
      const std::string image_path = sibling(ct->manifest, state.at("image").get<std::string>());
      const std::string ab_path =
          sibling(ct->manifest, state.at("aberrations").get<std::string>());
      require_input(image_path);
      require_input(ab_path);
      xpci::io::RealFieldFile image = xpci::io::read_real_field(image_path);
      wl = image.wavelength;
      images.push_back(std::move(image.field));
      tfs.push_back(xpci::transfer_from_aberrations(images.back().grid,
                                                    xpci::io::read_aberrations(ab_path),
                                                    state.value("allow_gain", false)));
      inputs.push_back(image_path);
      inputs.push_back(ab_path);
    }
    xpci::WarningLog log;
    xpci::RealField phase = xpci::ctf_retrieve(images, tfs, parse_regularizer(ct->reg));
    xpci::io::write_field(
        ct->out, phase, wl,
        json{{"provenance", provenance("ctf-retrieve", json{{"reg", ct->reg}}, inputs, log)}});
    report_warnings(log);
  });

  // darkfield -----------------------------------------------------------------
  auto dk = std::make_shared<DarkfieldOpts>();
  CLI::App* darkfield =
      app.add_subcommand("darkfield", "Two-state refraction / dark-field separation");
  darkfield->add_option("--a", dk->a, "state A JSON {tau_re, tau_im, i_in, i_out}")->required();
  darkfield->add_option("--b", dk->b, "state B JSON")->required();
  darkfield->add_option("--out-dphi", dk->out_dphi, "output slow phase gradient [rad/m]")
      ->required();
  darkfield->add_option("--out-theta2", dk->out_theta2, "output angular variance [rad^2]")
      ->required();
  add_wavelength_options(darkfield, dk->wl);
  darkfield->callback([dk, darkfield]() {
    const double wl = resolve_wavelength(darkfield, dk->wl);
    auto load_state = [](const std::string& path, xpci::DarkfieldMeasurement& m,
                         xpci::LinearTFState& tau) {
      const json j = parse_json_file(path);
      for (const char* key : {"tau_re", "tau_im", "i_in", "i_out"})
        if (!j.contains(key))
          throw std::invalid_argument(path + ": missing key \"" + key + "\"");
      tau.tau = {j.at("tau_re").get<double>(), j.at("tau_im").get<double>()};
      const std::string in_path = sibling(path, j.at("i_in").get<std::string>());
      const std::string out_path = sibling(path, j.at("i_out").get<std::string>());
      require_input(in_path);
      require_input(out_path);
      m.i_in = xpci::io::read_real_field(in_path).field;
      m.i_out = xpci::io::read_real_field(out_path).field;
    };
    xpci::DarkfieldMeasurement ma, mb;
    xpci::LinearTFState ta, tb;
    load_state(dk->a, ma, ta);
    load_state(dk->b, mb, tb);
    xpci::WarningLog log;
    xpci::DarkfieldResult res = xpci::darkfield_solve(ma, mb, ta, tb, wl, &log);
    json params{{"wavelength_m", wl}, {"negative_theta2", res.negative_theta2}};
    xpci::io::write_field(dk->out_dphi, res.dphi1_dx, wl,
                          json{{"provenance",
                                provenance("darkfield", params, {dk->a, dk->b}, log)}});
    xpci::io::write_field(dk->out_theta2, res.theta2, wl,
                          json{{"provenance",
                                provenance("darkfield", params, {dk->a, dk->b}, log)}});
    report_warnings(log);
  });

  // fresnel-map ---------------------------------------------------------------
  auto fm = std::make_shared<FresnelMapOpts>();
  CLI::App* fresnel_map = app.add_subcommand(
      "fresnel-map", "Contour map of the Fresnel number over feature size and distance");
  fresnel_map->add_option("--out", fm->out, "output PNG")->required();
  fresnel_map->add_option("--a-min", fm->spec.a_min, "smallest feature size [m]")->required();
  fresnel_map->add_option("--a-max", fm->spec.a_max, "largest feature size [m]")->required();
  fresnel_map->add_option("--z-min", fm->spec.z_min, "smallest distance [m]")->required();
  fresnel_map->add_option("--z-max", fm->spec.z_max, "largest distance [m]")->required();
  fresnel_map->add_option("--width", fm->spec.width, "raster width [pixels]");
  fresnel_map->add_option("--height", fm->spec.height, "raster height [pixels]");
  fresnel_map->add_option("--levels", fm->spec.levels, "number of log-spaced contours");
  add_wavelength_options(fresnel_map, fm->wl);
  fresnel_map->callback([fm, fresnel_map]() {
    fm->spec.wavelength = resolve_wavelength(fresnel_map, fm->wl);
    xpci::Png16 image = render_fresnel_map(fm->spec);
    xpci::write_png16(fm->out, image);
    xpci::WarningLog log;
    json params{{"a_min_m", fm->spec.a_min},     {"a_max_m", fm->spec.a_max},
                {"z_min_m", fm->spec.z_min},     {"z_max_m", fm->spec.z_max},
                {"wavelength_m", fm->spec.wavelength}, {"width", fm->spec.width},
                {"height", fm->spec.height},     {"levels", fm->spec.levels},
                {"contour_value", kContourValue}, {"highlight_value", kHighlightValue},
                {"highlight_level", kHighlightLevel}};
    std::ofstream sidecar(xpci::io::sidecar_path(fm->out), std::ios::trunc);
    if (!sidecar) throw std::runtime_error("cannot write " + xpci::io::sidecar_path(fm->out));
    sidecar << json{{"kind", "fresnel_map"},
                    {"params", params},
                    {"provenance", provenance("fresnel-map", params, {}, log)}}
                   .dump(2)
            << "\n";
  });

  // export ---------------------------------------------------------------------
  auto eo = std::make_shared<ExportOpts>();
  CLI::App* export_cmd = app.add_subcommand("export", "Quantize a real image to 16-bit PNG");
  export_cmd->add_option("--in", eo->in, "input real image")->required();
  export_cmd->add_option("--out", eo->out, "output PNG")->required();
  export_cmd->add_option("--norm", eo->norm, "normalization: minmax, fixed or log")
      ->check(CLI::IsMember({"minmax", "fixed", "log"}));
  export_cmd->add_option("--lo", eo->lo, "fixed normalization floor");
  export_cmd->add_option("--hi", eo->hi, "fixed normalization ceiling");
  export_cmd->callback([eo, export_cmd]() {
    require_input(eo->in);
    const bool have_window = export_cmd->count("--lo") > 0 || export_cmd->count("--hi") > 0;
    if (eo->norm == "fixed" &&
        (export_cmd->count("--lo") == 0 || export_cmd->count("--hi") == 0))
      throw std::invalid_argument("--norm fixed requires both --lo and --hi");
    if (eo->norm != "fixed" && have_window)
      throw std::invalid_argument("--lo/--hi only apply to --norm fixed");
    xpci::io::RealFieldFile in = xpci::io::read_real_field(eo->in);
    const xpci::PngNorm norm = eo->norm == "minmax"  ? xpci::PngNorm::MinMax
                               : eo->norm == "fixed" ? xpci::PngNorm::Fixed
                                                     : xpci::PngNorm::Log;
    xpci::WarningLog log;
    xpci::ExportInfo info = xpci::export_png(eo->out, in.field, norm, eo->lo, eo->hi, &log);
    xpci::write_export_sidecar(eo->out, info);
    attach_provenance(xpci::io::sidecar_path(eo->out),
                      provenance("export",
                                 json{{"norm", eo->norm}, {"lo", info.lo}, {"hi", info.hi}},
                                 {eo->in}, log));
    report_warnings(log);
  });

  // run --------------------------------------------------------------------------
  auto ro = std::make_shared<RunOpts>();
  CLI::App* run = app.add_subcommand("run", "Execute a JSON pipeline config");
  run->add_option("config", ro->config, "pipeline config file")->required();
  run->callback([ro, &exit_code]() {
    xpci::WarningLog log;
    xpci::PipelineResult result = xpci::run_pipeline_file(ro->config, &log);
    report_warnings(log);
    if (result.exit_code != 0) std::cerr << "error: " << result.error << "\n";
    std::cout << result.manifest.dump(2) << "\n";
    exit_code = result.exit_code;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
