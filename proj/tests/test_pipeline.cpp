#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/testutil.hpp"
#include "xpci/coherence.hpp"
#include "xpci/field.hpp"
#include "xpci/io.hpp"
#include "xpci/lsi.hpp"
#include "xpci/pipeline.hpp"
#include "xpci/png_io.hpp"
#include "xpci/propagation.hpp"
#include "xpci/retrieval.hpp"
#include "xpci/sample.hpp"
#include "xpci/warnings.hpp"

using namespace xpci;
using json = nlohmann::json;
using testutil::max_abs_diff;
namespace fs = std::filesystem;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

ComplexField gaussian_blob(const Grid2D& g, double wavelength) {
  ComplexField f(g, wavelength);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double x = g.x(ix), y = g.y(iy);
      const double w = 0.2 * g.nx * g.dx;
      f.at(ix, iy) = complexd{std::exp(-(x * x + y * y) / (2.0 * w * w)), 0.0};
    }
  return f;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("a simulation chain runs, writes its outputs and records a manifest") {
  const fs::path dir = testutil::scratch_dir("pipeline_chain");

  const json config = {
      {"pipeline",
       json::array(
           {json{{"op", "phantom"}, {"out", "obj.json"}, {"nx", 64}, {"ny", 64},
                 {"dx_m", 1e-6}, {"dy_m", 1e-6}, {"radius_m", 8e-6}, {"delta", 1e-6},
                 {"beta", 1e-9}, {"wavelength_m", 1e-10}},
            json{{"op", "transmit"}, {"object", "obj.json"}, {"out", "exit.field"}},
            json{{"op", "propagate"}, {"in", "exit.field"}, {"out", "prop.field"},
                 {"dist_m", 0.01}, {"pad", 2}},
            json{{"op", "intensity"}, {"in", "prop.field"}, {"out", "img.field"}},
            json{{"op", "export"}, {"in", "img.field"}, {"out", "img.png"},
                 {"norm", "minmax"}}})},
      {"manifest", "run.json"}};

  WarningLog log;
  const PipelineResult res = run_pipeline(config, dir.string(), &log);
  REQUIRE(res.error == "");
  REQUIRE(res.exit_code == 0);
  CHECK(log.empty());

  for (const char* name :
       {"obj.json", "exit.field", "prop.field", "img.field", "img.png", "img.png.json",
        "run.json"})
    CHECK(fs::exists(dir / name));

  // Manifest shape: tool/format/versions plus one record per step.
  const json& m = res.manifest;
  CHECK(m.at("ok") == true);
  CHECK(m.at("tool") == "xpci");
  CHECK(m.at("format") == 1);
  CHECK(m.at("versions").at("xpci") == "1.0.0");
  CHECK(m.at("versions").at("fftw").is_string());
  CHECK(!m.at("versions").at("fftw").get<std::string>().empty());
  const json& steps = m.at("steps");
  REQUIRE(steps.size() == 5);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    CHECK(steps[i].at("index") == i);
    CHECK(steps[i].at("op") == config.at("pipeline")[i].at("op"));
    CHECK(steps[i].at("params") == config.at("pipeline")[i]);
    CHECK(steps[i].at("warnings").is_array());
    CHECK(steps[i].at("warnings").empty());
    CHECK(steps[i].at("ms").get<double>() >= 0.0);
  }

  // The manifest file holds the same document the call returned.
  CHECK(read_json_file(dir / "run.json") == m);

  // The chain reproduces the direct library calls bit for bit.
  const Grid2D g(64, 64, 1e-6, 1e-6);
  const ProjectedObject obj = sphere_phantom(g, 8e-6, 1e-6, 1e-9, 1e-10);
  const ComplexField exit_field = transmission_function(obj);
  const ComplexField prop =
      fresnel_propagate(exit_field, {.distance = 0.01, .pad_factor = 2});
  const RealField img = intensity_and_phase(prop).intensity;

  const io::RealFieldFile stored = io::read_real_field((dir / "img.field").string());
  CHECK(stored.wavelength == 1e-10);
  CHECK(max_abs_diff(stored.field.v, img.v) == 0.0);

  // PNG and its quantization sidecar agree with the step telemetry.
  const Png16 png = read_png16((dir / "img.png").string());
  CHECK(png.width == 64);
  CHECK(png.height == 64);
  const json sidecar = read_json_file(dir / "img.png.json");
  CHECK(sidecar.at("kind") == "png16");
  CHECK(sidecar.at("norm") == "minmax");
  const json& info = steps[4].at("info");
  CHECK(sidecar.at("lo") == info.at("lo"));
  CHECK(sidecar.at("hi") == info.at("hi"));
}

TEST_CASE("a rejected config leaves no partial outputs") {
  const fs::path dir = testutil::scratch_dir("pipeline_reject");
  io::write_field((dir / "seed.field").string(), gaussian_blob(Grid2D(16, 16, 1e-6, 1e-6), 1e-10));

  // Step 0 would be runnable; step 1 carries a type error.
  const json config = {
      {"pipeline",
       json::array({json{{"op", "propagate"}, {"in", "seed.field"}, {"out", "a.field"},
                         {"dist_m", 0.01}},
                    json{{"op", "propagate"}, {"in", "a.field"}, {"out", "b.field"},
                         {"dist_m", "oops"}}})}};

  const PipelineResult res = run_pipeline(config, dir.string());
  CHECK(res.exit_code == 2);
  CHECK(res.error == "pipeline[1].dist_m: expected number");
  CHECK(res.manifest.at("ok") == false);
  CHECK(res.manifest.at("error") == res.error);
  CHECK(res.manifest.at("steps").empty());
  CHECK(!fs::exists(dir / "a.field"));
  CHECK(!fs::exists(dir / "b.field"));
}

TEST_CASE("config validation pinpoints each class of mistake") {
  const fs::path dir = testutil::scratch_dir("pipeline_validate");
  io::write_field((dir / "in.field").string(), gaussian_blob(Grid2D(8, 8, 1e-6, 1e-6), 1e-10));

  auto error_of = [&](const json& config) {
    const PipelineResult res = run_pipeline(config, dir.string());
    CHECK(res.exit_code == 2);
    return res.error;
  };

  CHECK(error_of(json{{"manifest", "m.json"}}) == "pipeline: missing required key");
  CHECK(error_of(json{{"pipeline", json::array()}, {"bogus", 1}}) ==
        "bogus: unknown top-level key");
  CHECK(error_of(json{{"pipeline", 3}}) == "pipeline: expected array of steps");
  CHECK(error_of(json{{"pipeline", json::array({42})}}) ==
        "pipeline[0]: step must be a JSON object");
  CHECK(error_of(json{{"pipeline", json::array({json::object()})}}) ==
        "pipeline[0].op: missing op name");
  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "frobnicate"}}})}}) ==
        "pipeline[0].op: unknown op \"frobnicate\"");
  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "intensity"},
                                                     {"in", "in.field"},
                                                     {"out", "o.field"},
                                                     {"extra", 1}}})}}) ==
        "pipeline[0].extra: unknown key for op \"intensity\"");
  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "intensity"},
                                                     {"in", "in.field"}}})}}) ==
        "pipeline[0].out: missing required key");

  const json phantom_base = {{"op", "phantom"}, {"out", "o.json"}, {"nx", 8}, {"ny", 8},
                             {"dx_m", 1e-6}, {"dy_m", 1e-6}, {"radius_m", 2e-6},
                             {"delta", 1e-6}, {"beta", 1e-9}};
  json both = phantom_base;
  both["wavelength_m"] = 1e-10;
  both["energy_keV"] = 20.0;
  CHECK(error_of(json{{"pipeline", json::array({both})}}) ==
        "pipeline[0]: exactly one of wavelength_m or energy_keV is required");
  CHECK(error_of(json{{"pipeline", json::array({phantom_base})}}) ==
        "pipeline[0]: exactly one of wavelength_m or energy_keV is required");

  const json project_both = {{"op", "project"}, {"in", "in.field"}, {"out", "o.json"},
                             {"wavelength_m", 1e-10}, {"energy_keV", 20.0}};
  CHECK(error_of(json{{"pipeline", json::array({project_both})}}) ==
        "pipeline[0]: wavelength_m and energy_keV are mutually exclusive");

  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "export"}, {"in", "in.field"},
                                                     {"out", "o.png"},
                                                     {"norm", "weird"}}})}}) ==
        "pipeline[0].norm: expected minmax, fixed or log");
  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "export"}, {"in", "in.field"},
                                                     {"out", "o.png"},
                                                     {"norm", "fixed"}}})}}) ==
        "pipeline[0]: fixed normalization requires lo and hi");
  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "export"}, {"in", "in.field"},
                                                     {"out", "o.png"}, {"norm", "minmax"},
                                                     {"lo", 0.0}}})}}) ==
        "pipeline[0]: lo/hi only apply to fixed normalization");
  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "blur"}, {"in", "in.field"},
                                                     {"out", "o.field"},
                                                     {"source_d_m", 1e-4}, {"z1_m", 0.1},
                                                     {"z2_m", 0.1},
                                                     {"profile", "square"}}})}}) ==
        "pipeline[0].profile: expected disk or gaussian");
  CHECK(error_of(json{{"pipeline", json::array({json{{"op", "intensity"},
                                                     {"in", "ghost.field"},
                                                     {"out", "o.field"}}})}}) ==
        "pipeline[0].in: input file not found: ghost.field");
}

TEST_CASE("a failing step stops the run and is labeled with its index and op") {
  const fs::path dir = testutil::scratch_dir("pipeline_runtime");
  io::write_field((dir / "seed.field").string(), gaussian_blob(Grid2D(16, 16, 1e-6, 1e-6), 1e-10));

  SUBCASE("failure in the first step leaves nothing behind") {
    const json config = {{"pipeline", json::array({json{{"op", "propagate"},
                                                        {"in", "seed.field"},
                                                        {"out", "a.field"},
                                                        {"dist_m", 0.01},
                                                        {"pad", 3}}})}};
    const PipelineResult res = run_pipeline(config, dir.string());
    CHECK(res.exit_code == 1);
    CHECK(res.error == "pipeline[0] (propagate): PropagationPlan: pad_factor must be 1, 2 or 4, got 3");
    CHECK(res.manifest.at("ok") == false);
    CHECK(res.manifest.at("steps").empty());
    CHECK(!fs::exists(dir / "a.field"));
  }

  SUBCASE("completed steps keep their outputs and manifest records") {
    const json config = {
        {"pipeline",
         json::array({json{{"op", "propagate"}, {"in", "seed.field"}, {"out", "a.field"},
                           {"dist_m", 1e-5}, {"pad", 1}},
                      json{{"op", "propagate"}, {"in", "a.field"}, {"out", "b.field"},
                           {"dist_m", 1e-5}, {"pad", 3}}})}};
    const PipelineResult res = run_pipeline(config, dir.string());
    CHECK(res.exit_code == 1);
    CHECK(res.error ==
          "pipeline[1] (propagate): PropagationPlan: pad_factor must be 1, 2 or 4, got 3");
    CHECK(res.manifest.at("steps").size() == 1);
    CHECK(fs::exists(dir / "a.field"));
    CHECK(!fs::exists(dir / "b.field"));
  }

  SUBCASE("library validation errors pass through verbatim") {
    RealField img(Grid2D(8, 8, 1e-6, 1e-6), 1.0);
    io::write_field((dir / "img.field").string(), img, 1e-10);
    const json config = {{"pipeline", json::array({json{{"op", "paganin"},
                                                        {"in", "img.field"},
                                                        {"out", "t.field"},
                                                        {"i0", -1.0},
                                                        {"delta", 1e-6},
                                                        {"mu_per_m", 1e4},
                                                        {"dist_m", 0.1}}})}};
    const PipelineResult res = run_pipeline(config, dir.string());
    CHECK(res.exit_code == 1);
    CHECK(res.error == "pipeline[0] (paganin): paganin_thickness: I0 must be > 0");
  }
}

TEST_CASE("projection handles volumes, passthrough and mismatches") {
  const fs::path dir = testutil::scratch_dir("pipeline_project");

  RefractiveVolume vol;
  vol.nx = 8;
  vol.ny = 8;
  vol.nz = 3;
  vol.dx = vol.dy = 1e-6;
  vol.dz = 2e-6;
  vol.delta.assign(vol.size(), 1e-6f);
  vol.beta.assign(vol.size(), 1e-9f);
  io::write_volume((dir / "vol.json").string(), vol);

  SUBCASE("volume projection matches the library") {
    const json config = {{"pipeline", json::array({json{{"op", "project"}, {"in", "vol.json"},
                                                        {"out", "obj.json"},
                                                        {"wavelength_m", 1e-10}}})}};
    REQUIRE(run_pipeline(config, dir.string()).exit_code == 0);
    const ProjectedObject got = io::read_projected_object((dir / "obj.json").string());
    const ProjectedObject want = project_volume(vol, 1e-10);
    CHECK(got.wavelength == 1e-10);
    CHECK(max_abs_diff(got.phase_shift, want.phase_shift) == 0.0);
    CHECK(max_abs_diff(got.attenuation_integral, want.attenuation_integral) == 0.0);
  }

  SUBCASE("volume projection requires a wavelength") {
    const json config = {{"pipeline", json::array({json{{"op", "project"}, {"in", "vol.json"},
                                                        {"out", "obj.json"}}})}};
    const PipelineResult res = run_pipeline(config, dir.string());
    CHECK(res.exit_code == 1);
    CHECK(res.error ==
          "pipeline[0] (project): projecting a volume needs wavelength_m or energy_keV");
  }

  SUBCASE("photon energy fixes the wavelength") {
    const json config = {{"pipeline",
                          json::array({json{{"op", "phantom"}, {"out", "obj.json"}, {"nx", 16},
                                            {"ny", 16}, {"dx_m", 1e-6}, {"dy_m", 1e-6},
                                            {"radius_m", 3e-6}, {"delta", 1e-6}, {"beta", 1e-9},
                                            {"energy_keV", 12.3984198}}})}};
    REQUIRE(run_pipeline(config, dir.string()).exit_code == 0);
    const ProjectedObject obj = io::read_projected_object((dir / "obj.json").string());
    CHECK(obj.wavelength == doctest::Approx(1e-10).epsilon(1e-12));
  }

  SUBCASE("passthrough re-emits the object but rejects a differing wavelength") {
    const ProjectedObject obj =
        sphere_phantom(Grid2D(16, 16, 1e-6, 1e-6), 3e-6, 1e-6, 1e-9, 1e-10);
    io::write_projected_object((dir / "obj.json").string(), obj);

    const json ok = {{"pipeline", json::array({json{{"op", "project"}, {"in", "obj.json"},
                                                    {"out", "copy.json"}}})}};
    REQUIRE(run_pipeline(ok, dir.string()).exit_code == 0);
    const ProjectedObject copy = io::read_projected_object((dir / "copy.json").string());
    CHECK(max_abs_diff(copy.phase_shift, obj.phase_shift) == 0.0);

    const json bad = {{"pipeline", json::array({json{{"op", "project"}, {"in", "obj.json"},
                                                     {"out", "copy2.json"},
                                                     {"wavelength_m", 2e-10}}})}};
    const PipelineResult res = run_pipeline(bad, dir.string());
    CHECK(res.exit_code == 1);
    CHECK(res.error == "pipeline[0] (project): wavelength differs from the projected object's");
  }

  SUBCASE("a file that is neither volume nor object is rejected at runtime") {
    std::ofstream weird(dir / "weird.json");
    weird << "{\"hello\": 1}\n";
    weird.close();
    const json config = {{"pipeline", json::array({json{{"op", "project"}, {"in", "weird.json"},
                                                        {"out", "obj.json"}}})}};
    const PipelineResult res = run_pipeline(config, dir.string());
    CHECK(res.exit_code == 1);
    CHECK(res.error.find("is neither a volume nor a projected object") != std::string::npos);
  }
}

TEST_CASE("ops reproduce their library counterparts bit for bit") {
  const fs::path dir = testutil::scratch_dir("pipeline_ops");
  const Grid2D g(32, 32, 1e-6, 1e-6);
  const ComplexField seed = gaussian_blob(g, 1e-10);
  io::write_field((dir / "seed.field").string(), seed);

  SUBCASE("propagate honors pad and apodize") {
    const json config = {{"pipeline", json::array({json{{"op", "propagate"},
                                                        {"in", "seed.field"},
                                                        {"out", "out.field"},
                                                        {"dist_m", 0.005},
                                                        {"pad", 4},
                                                        {"apodize", true}}})}};
    REQUIRE(run_pipeline(config, dir.string()).exit_code == 0);
    const ComplexField want =
        fresnel_propagate(seed, {.distance = 0.005, .pad_factor = 4, .apodize = true});
    const ComplexField got = io::read_complex_field((dir / "out.field").string());
    CHECK(max_abs_diff(got.v, want.v) == 0.0);
  }

  SUBCASE("blur selects its kernel profile and defaults to disk") {
    RealField img(g);
    for (std::size_t i = 0; i < img.v.size(); ++i) img.v[i] = std::norm(seed.v[i]);
    io::write_field((dir / "img.field").string(), img, 1e-10);

    const json config = {
        {"pipeline",
         json::array({json{{"op", "blur"}, {"in", "img.field"}, {"out", "gauss.field"},
                           {"source_d_m", 1e-4}, {"z1_m", 0.1}, {"z2_m", 0.02},
                           {"profile", "gaussian"}},
                      json{{"op", "blur"}, {"in", "img.field"}, {"out", "disk.field"},
                           {"source_d_m", 1e-4}, {"z1_m", 0.1}, {"z2_m", 0.02}}})}};
    REQUIRE(run_pipeline(config, dir.string()).exit_code == 0);

    const ConeBeamGeometry geom{0.1, 0.02};
    const RealField want_gauss = source_blur(img, 1e-4, geom, BlurProfile::Gaussian);
    const RealField want_disk = source_blur(img, 1e-4, geom, BlurProfile::Disk);
    CHECK(max_abs_diff(io::read_real_field((dir / "gauss.field").string()).field.v,
                       want_gauss.v) == 0.0);
    CHECK(max_abs_diff(io::read_real_field((dir / "disk.field").string()).field.v,
                       want_disk.v) == 0.0);
  }

  SUBCASE("lsi applies a stored aberration set") {
    AberrationSet ab;
    ab(2, 0) = complexd{3e-14, 0.0};
    ab(0, 2) = complexd{3e-14, 0.0};
    io::write_aberrations((dir / "ab.json").string(), ab);

    const json config = {{"pipeline", json::array({json{{"op", "lsi"}, {"in", "seed.field"},
                                                        {"out", "out.field"},
                                                        {"aberrations", "ab.json"}}})}};
    REQUIRE(run_pipeline(config, dir.string()).exit_code == 0);
    const ComplexField want = apply_lsi(seed, transfer_from_aberrations(g, ab));
    const ComplexField got = io::read_complex_field((dir / "out.field").string());
    CHECK(max_abs_diff(got.v, want.v) == 0.0);
  }

  SUBCASE("paganin records its clamp count in the step info") {
    RealField img(g, 1.0);
    io::write_field((dir / "flat.field").string(), img, 1e-10);
    const json config = {{"pipeline", json::array({json{{"op", "paganin"},
                                                        {"in", "flat.field"},
                                                        {"out", "t.field"},
                                                        {"i0", 1.0},
                                                        {"delta", 1e-6},
                                                        {"mu_per_m", 1e4},
                                                        {"dist_m", 0.1}}})}};
    const PipelineResult res = run_pipeline(config, dir.string());
    REQUIRE(res.exit_code == 0);
    CHECK(res.manifest.at("steps")[0].at("info").at("clamped") == 0);
  }

  SUBCASE("fixed-window export quantizes against the given range") {
    const Grid2D g4(4, 2, 1e-6, 1e-6);
    RealField ramp(g4);
    ramp.at(0, 0) = 0.0;
    ramp.at(1, 0) = 0.5;
    ramp.at(2, 0) = 1.0;
    ramp.at(3, 0) = 2.0;
    for (int ix = 0; ix < 4; ++ix) ramp.at(ix, 1) = ramp.at(ix, 0);
    io::write_field((dir / "ramp.field").string(), ramp);

    const json config = {{"pipeline", json::array({json{{"op", "export"}, {"in", "ramp.field"},
                                                        {"out", "ramp.png"}, {"norm", "fixed"},
                                                        {"lo", 0.0}, {"hi", 2.0}}})}};
    REQUIRE(run_pipeline(config, dir.string()).exit_code == 0);
    const Png16 png = read_png16((dir / "ramp.png").string());
    CHECK(png.at(0, 0) == 0);
    CHECK(png.at(1, 0) == 16384);
    CHECK(png.at(2, 0) == 32768);
    CHECK(png.at(3, 0) == 65535);
    const json sidecar = read_json_file(dir / "ramp.png.json");
    CHECK(sidecar.at("norm") == "fixed");
    CHECK(sidecar.at("lo") == 0.0);
    CHECK(sidecar.at("hi") == 2.0);
  }
}

TEST_CASE("warnings surface in the caller log and the manifest") {
  const fs::path dir = testutil::scratch_dir("pipeline_warnings");
  // 16 um frame at lambda = 1 um: the sampling limit nx dx^2 / lambda is
  // only 16 um, so a millimeter hop warns loudly.
  io::write_field((dir / "seed.field").string(),
                  gaussian_blob(Grid2D(16, 16, 1e-6, 1e-6), 1e-6));
  const json config = {{"pipeline", json::array({json{{"op", "propagate"},
                                                      {"in", "seed.field"},
                                                      {"out", "out.field"},
                                                      {"dist_m", 1e-3},
                                                      {"pad", 1}}})}};
  WarningLog log;
  const PipelineResult res = run_pipeline(config, dir.string(), &log);
  REQUIRE(res.exit_code == 0);
  CHECK(log.has("fresnel.sampling"));

  const json& warnings = res.manifest.at("steps")[0].at("warnings");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].at("code") == "fresnel.sampling");
  CHECK(warnings[0].at("message").is_string());
  CHECK(warnings[0].at("data").at("distance_m") == 1e-3);
}

TEST_CASE("warning logs serialize as JSON arrays") {
  WarningLog log;
  CHECK(warnings_json(log) == json::array());

  log.add("some.code", "something bent", {{"bend_m", 1.5}, {"pixels", 3.0}});
  const json arr = warnings_json(log);
  REQUIRE(arr.size() == 1);
  CHECK(arr[0].at("code") == "some.code");
  CHECK(arr[0].at("message") == "something bent");
  CHECK(arr[0].at("data").at("bend_m") == 1.5);
  CHECK(arr[0].at("data").at("pixels") == 3.0);
}

TEST_CASE("pipeline files resolve paths against their own directory") {
  const fs::path dir = testutil::scratch_dir("pipeline_file");
  io::write_field((dir / "seed.field").string(),
                  gaussian_blob(Grid2D(16, 16, 1e-6, 1e-6), 1e-10));

  const json config = {{"pipeline", json::array({json{{"op", "intensity"},
                                                      {"in", "seed.field"},
                                                      {"out", "img.field"}}})},
                       {"manifest", "run.json"}};
  {
    std::ofstream out(dir / "config.json");
    out << config.dump(2) << "\n";
  }

  const PipelineResult res = run_pipeline_file((dir / "config.json").string());
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "img.field"));
  CHECK(fs::exists(dir / "run.json"));

  const PipelineResult missing = run_pipeline_file((dir / "ghost.json").string());
  CHECK(missing.exit_code == 2);
  CHECK(missing.error.find("cannot open config") == 0);

  {
    std::ofstream out(dir / "broken.json");
    out << "{ not json\n";
  }
  const PipelineResult broken = run_pipeline_file((dir / "broken.json").string());
  CHECK(broken.exit_code == 2);
  CHECK(broken.error.find("config parse error:") == 0);
}

TEST_CASE("export sidecars record the quantization window") {
  const fs::path dir = testutil::scratch_dir("pipeline_sidecar");
  ExportInfo info;
  info.lo = -1.25;
  info.hi = 4.5;
  info.norm = PngNorm::Log;
  write_export_sidecar((dir / "img.png").string(), info);

  const json sidecar = read_json_file(dir / "img.png.json");
  CHECK(sidecar.at("kind") == "png16");
  CHECK(sidecar.at("norm") == "log");
  CHECK(sidecar.at("lo") == -1.25);
  CHECK(sidecar.at("hi") == 4.5);
}

}  // TEST_SUITE
