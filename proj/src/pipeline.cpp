#include "hflw/pipeline.hpp"

#include <omp.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hflw/clutter.hpp"
#include "hflw/container.hpp"
#include "hflw/errors.hpp"
#include "hflw/optics.hpp"
#include "hflw/png_io.hpp"

namespace hflw {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json optics_to_json(const OpticalParams& p) {
  return {{"wavelength_m", p.wavelength_m},
          {"numerical_aperture", p.numerical_aperture},
          {"frame_rate_hz", p.frame_rate_hz},
          {"pixel_pitch_m", p.pixel_pitch_m},
          {"propagation_distance_m", p.propagation_distance_m},
          {"papilla_diameter_m", p.papilla_diameter_m}};
}

OpticalParams optics_from_json(const json& j) {
  OpticalParams p;
  p.wavelength_m = j.value("wavelength_m", p.wavelength_m);
  p.numerical_aperture = j.value("numerical_aperture", p.numerical_aperture);
  p.frame_rate_hz = j.value("frame_rate_hz", p.frame_rate_hz);
  p.pixel_pitch_m = j.value("pixel_pitch_m", p.pixel_pitch_m);
  p.propagation_distance_m = j.value("propagation_distance_m", p.propagation_distance_m);
  p.papilla_diameter_m = j.value("papilla_diameter_m", p.papilla_diameter_m);
  return p;
}

json window_to_json(const SpectralWindowConfig& w) {
  return {{"window_len", w.window_len},
          {"hop", w.hop},
          {"svd_remove", w.svd_remove},
          {"band_low_hz", w.band_low_hz},
          {"band_high_hz", w.band_high_hz},
          {"apodization", w.apodization == Apodization::kHann ? "hann" : "none"},
          {"saturation_fraction", w.saturation_fraction}};
}

SpectralWindowConfig window_from_json(const json& j) {
  SpectralWindowConfig w;
  w.window_len = j.value("window_len", w.window_len);
  w.hop = j.value("hop", w.hop);
  w.svd_remove = j.value("svd_remove", w.svd_remove);
  w.band_low_hz = j.value("band_low_hz", w.band_low_hz);
  w.band_high_hz = j.value("band_high_hz", w.band_high_hz);
  w.apodization = j.value("apodization", "hann") == std::string("none")
                      ? Apodization::kNone
                      : Apodization::kHann;
  w.saturation_fraction = j.value("saturation_fraction", w.saturation_fraction);
  return w;
}

json seg_to_json(const SegmentationConfig& s) {
  return {{"flatfield_sigma_px", s.flatfield_sigma_px},
          {"frangi_scales_px", s.frangi_scales_px},
          {"frangi_beta", s.frangi_beta},
          {"frangi_c", s.frangi_c},
          {"vessel_threshold", s.vessel_threshold},
          {"artery_threshold", s.artery_threshold},
          {"min_component_px", s.min_component_px},
          {"connectivity", s.connectivity}};
}

SegmentationConfig seg_from_json(const json& j) {
  SegmentationConfig s;
  s.flatfield_sigma_px = j.value("flatfield_sigma_px", s.flatfield_sigma_px);
  s.frangi_scales_px = j.value("frangi_scales_px", s.frangi_scales_px);
  s.frangi_beta = j.value("frangi_beta", s.frangi_beta);
  s.frangi_c = j.value("frangi_c", s.frangi_c);
  s.vessel_threshold = j.value("vessel_threshold", s.vessel_threshold);
  s.artery_threshold = j.value("artery_threshold", s.artery_threshold);
  s.min_component_px = j.value("min_component_px", s.min_component_px);
  s.connectivity = j.value("connectivity", s.connectivity);
  return s;
}

json flow_to_json(const FlowConfig& f) {
  return {{"circle_radius_px", f.circle_radius_px},
          {"circle_width_px", f.circle_width_px},
          {"center_x_px", f.center_x_px},
          {"center_y_px", f.center_y_px},
          {"profile_half_len_px", f.profile_half_len_px},
          {"profile_width_px", f.profile_width_px},
          {"papilla_diameter_px", f.papilla_diameter_px},
          {"mean_velocity_factor", f.mean_velocity_factor},
          {"fit_floor_fraction", f.fit_floor_fraction},
          {"smoothing_windows", f.smoothing_windows},
          {"include_negative_sections", f.include_negative_sections}};
}

FlowConfig flow_from_json(const json& j) {
  FlowConfig f;
  f.circle_radius_px = j.value("circle_radius_px", f.circle_radius_px);
  f.circle_width_px = j.value("circle_width_px", f.circle_width_px);
  f.center_x_px = j.value("center_x_px", f.center_x_px);
  f.center_y_px = j.value("center_y_px", f.center_y_px);
  f.profile_half_len_px = j.value("profile_half_len_px", f.profile_half_len_px);
  f.profile_width_px = j.value("profile_width_px", f.profile_width_px);
  f.papilla_diameter_px = j.value("papilla_diameter_px", f.papilla_diameter_px);
  f.mean_velocity_factor = j.value("mean_velocity_factor", f.mean_velocity_factor);
  f.fit_floor_fraction = j.value("fit_floor_fraction", f.fit_floor_fraction);
  f.smoothing_windows = j.value("smoothing_windows", f.smoothing_windows);
  f.include_negative_sections =
      j.value("include_negative_sections", f.include_negative_sections);
  return f;
}

json phantom_to_json(const PhantomSpec& p) {
  json vessels = json::array();
  for (const auto& v : p.vessels) {
    json pts = json::array();
    for (const auto& pt : v.centerline) pts.push_back({pt[0], pt[1]});
    vessels.push_back({{"centerline", pts},
                       {"radius_px", v.radius_px},
                       {"peak_delta_f_hz", v.peak_delta_f_hz},
                       {"pulsatility", v.pulsatility},
                       {"cardiac_freq_hz", v.cardiac_freq_hz}});
  }
  return {{"width", p.width},
          {"height", p.height},
          {"frame_count", p.frame_count},
          {"background_sigma_hz", p.background_sigma_hz},
          {"vessels", vessels},
          {"reference_beam_amplitude", p.reference_beam_amplitude},
          {"scattered_amplitude", p.scattered_amplitude},
          {"noise_floor", p.noise_floor},
          {"rng_seed", p.rng_seed},
          {"papilla_diameter_px", p.papilla_diameter_px},
          {"synth_segment_len", p.synth_segment_len}};
}

PhantomSpec phantom_from_json(const json& j, const OpticalParams& optics,
                              const SpectralWindowConfig& window) {
  PhantomSpec p;
  p.params = optics;
  p.window = window;
  p.width = j.value("width", p.width);
  p.height = j.value("height", p.height);
  p.frame_count = j.value("frame_count", p.frame_count);
  p.background_sigma_hz = j.value("background_sigma_hz", p.background_sigma_hz);
  p.reference_beam_amplitude =
      j.value("reference_beam_amplitude", p.reference_beam_amplitude);
  p.scattered_amplitude = j.value("scattered_amplitude", p.scattered_amplitude);
  p.noise_floor = j.value("noise_floor", p.noise_floor);
  p.rng_seed = j.value("rng_seed", p.rng_seed);
  p.papilla_diameter_px = j.value("papilla_diameter_px", p.papilla_diameter_px);
  p.synth_segment_len = j.value("synth_segment_len", p.synth_segment_len);
  if (j.contains("vessels")) {
    for (const auto& jv : j.at("vessels")) {
      PhantomVessel v;
      for (const auto& pt : jv.at("centerline"))
        v.centerline.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      v.radius_px = jv.value("radius_px", v.radius_px);
      v.peak_delta_f_hz = jv.value("peak_delta_f_hz", v.peak_delta_f_hz);
      v.pulsatility = jv.value("pulsatility", v.pulsatility);
      v.cardiac_freq_hz = jv.value("cardiac_freq_hz", v.cardiac_freq_hz);
      p.vessels.push_back(std::move(v));
    }
  }
  return p;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

void write_run_config(const RunConfig& cfg, const std::string& out_dir) {
  write_text(out_dir + "/run_config.json", run_config_to_json(cfg));
}

std::string fmt_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["optics"] = optics_to_json(cfg.optics);
  j["window"] = window_to_json(cfg.window);
  j["segmentation"] = seg_to_json(cfg.seg);
  j["flow"] = flow_to_json(cfg.flow);
  j["background_ring"] = {{"inner_px", cfg.ring_inner_px},
                          {"outer_px", cfg.ring_outer_px}};
  j["threads"] = cfg.threads;
  j["phantom"] = phantom_to_json(cfg.phantom);
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  if (j.contains("optics")) cfg.optics = optics_from_json(j["optics"]);
  if (j.contains("window")) cfg.window = window_from_json(j["window"]);
  if (j.contains("segmentation")) cfg.seg = seg_from_json(j["segmentation"]);
  if (j.contains("flow")) cfg.flow = flow_from_json(j["flow"]);
  if (j.contains("background_ring")) {
    cfg.ring_inner_px = j["background_ring"].value("inner_px", cfg.ring_inner_px);
    cfg.ring_outer_px = j["background_ring"].value("outer_px", cfg.ring_outer_px);
  }
  cfg.threads = j.value("threads", cfg.threads);
  cfg.phantom = phantom_from_json(j.value("phantom", json::object()), cfg.optics,
                                  cfg.window);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return run_config_from_json(read_text(path));
}

void apply_thread_config(const RunConfig& cfg) {
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
}

void run_phantom_stage(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  apply_thread_config(cfg);
  PhantomSpec spec = cfg.phantom;
  spec.params = cfg.optics;
  spec.window = cfg.window;
  auto [stack, truth] = generate_phantom(spec);
  write_stack(out_dir + "/stack.hflw", stack);
  write_pgm(out_dir + "/truth_artery_raster.pgm", truth.artery_raster);

  const size_t npix = static_cast<size_t>(spec.width) * spec.height;
  std::vector<float> df_all, v_all;
  for (size_t w = 0; w < truth.delta_f.size(); ++w) {
    df_all.insert(df_all.end(), truth.delta_f[w].data.begin(),
                  truth.delta_f[w].data.end());
    v_all.insert(v_all.end(), truth.velocity[w].data.begin(),
                 truth.velocity[w].data.end());
  }
  write_f32(out_dir + "/truth_delta_f.f32", df_all.data(), df_all.size());
  write_f32(out_dir + "/truth_velocity.f32", v_all.data(), v_all.size());

  json t;
  t["width"] = spec.width;
  t["height"] = spec.height;
  t["window_count"] = truth.delta_f.size();
  t["pixel_scale_m_per_px"] = truth.pixel_scale_m_per_px;
  t["papilla_diameter_px"] = truth.papilla_diameter_px;
  t["m2_background_hz2"] = truth.m2_background_hz2;
  t["time_s"] = truth.time_s;
  t["total_flow_ul_min"] = truth.total_flow_ul_min;
  t["section_flows_ul_min"] = truth.section_flows_ul_min;
  write_text(out_dir + "/truth.json", t.dump(2) + "\n");
  write_run_config(cfg, out_dir);
  (void)npix;
}

void run_render_stage(const RunConfig& cfg, const std::string& stack_path,
                      const std::string& out_dir) {
  ensure_dir(out_dir);
  apply_thread_config(cfg);
  InterferogramStack stack = read_stack(stack_path);
  // Container carries acquisition metadata; NA, z and papilla size come from
  // the run config.
  stack.params.numerical_aperture = cfg.optics.numerical_aperture;
  stack.params.papilla_diameter_m = cfg.optics.papilla_diameter_m;
  HologramStack holo =
      render_hologram_stack(stack, cfg.optics.propagation_distance_m);

  std::ofstream out(out_dir + "/holograms.cf32", std::ios::binary);
  if (!out) throw DataError("cannot write holograms.cf32");
  out.write(reinterpret_cast<const char*>(holo.frames.data()),
            holo.frames.size() * sizeof(std::complex<float>));
  if (!out) throw DataError("write failed: holograms.cf32");

  json j;
  j["width"] = holo.width;
  j["height"] = holo.height;
  j["frame_count"] = holo.frame_count;
  j["layout"] = "cf32 interleaved, frame-major";
  j["optics"] = optics_to_json(holo.params);
  write_text(out_dir + "/render.json", j.dump(2) + "\n");
  write_run_config(cfg, out_dir);
}

void run_doppler_stage(const RunConfig& cfg, const std::string& render_dir,
                       const std::string& out_dir) {
  ensure_dir(out_dir);
  apply_thread_config(cfg);
  json meta;
  try {
    meta = json::parse(read_text(render_dir + "/render.json"));
  } catch (const json::exception& e) {
    throw DataError("bad render.json: " + std::string(e.what()));
  }
  const int width = meta.at("width");
  const int height = meta.at("height");
  const int frame_count = meta.at("frame_count");
  const OpticalParams optics = optics_from_json(meta.at("optics"));
  const double fs = optics.frame_rate_hz;
  cfg.window.validate(fs);
  if (frame_count < cfg.window.window_len)
    throw DataError("doppler: fewer frames than one window");

  const size_t npix = static_cast<size_t>(width) * height;
  const std::string holo_path = render_dir + "/holograms.cf32";
  std::ifstream in(holo_path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + holo_path);
  const size_t expected =
      npix * static_cast<size_t>(frame_count) * sizeof(std::complex<float>);
  if (static_cast<size_t>(in.tellg()) != expected)
    throw DataError(holo_path + ": size mismatch, expected " +
                    std::to_string(expected) + " bytes, got " +
                    std::to_string(static_cast<size_t>(in.tellg())));

  const int nw = cfg.window.window_count(frame_count);
  std::vector<float> m0_all, m2_all;
  std::vector<uint8_t> def_all, sat_all;
  std::vector<int> window_starts;
  std::vector<std::complex<float>> window(npix * cfg.window.window_len);

  for (int w = 0; w < nw; ++w) {
    const int start = w * cfg.window.hop;
    window_starts.push_back(start);
    in.seekg(static_cast<std::streamoff>(npix * start * sizeof(std::complex<float>)));
    in.read(reinterpret_cast<char*>(window.data()),
            window.size() * sizeof(std::complex<float>));
    if (!in) throw DataError(holo_path + ": truncated window read");
    svd_clutter_filter(window.data(), width, height, cfg.window.window_len,
                       cfg.window.svd_remove, w);
    MomentMaps maps = compute_moment_maps(window.data(), width, height,
                                          cfg.window, fs, w, start);
    m0_all.insert(m0_all.end(), maps.m0.data.begin(), maps.m0.data.end());
    m2_all.insert(m2_all.end(), maps.m2.data.begin(), maps.m2.data.end());
    def_all.insert(def_all.end(), maps.defined.data.begin(), maps.defined.data.end());
    sat_all.insert(sat_all.end(), maps.saturated.data.begin(),
                   maps.saturated.data.end());
  }

  write_f32(out_dir + "/m0.f32", m0_all.data(), m0_all.size());
  write_f32(out_dir + "/m2.f32", m2_all.data(), m2_all.size());
  write_u8(out_dir + "/defined.u8", def_all.data(), def_all.size());
  write_u8(out_dir + "/saturated.u8", sat_all.data(), sat_all.size());

  json j;
  j["width"] = width;
  j["height"] = height;
  j["window_count"] = nw;
  j["window_starts"] = window_starts;
  j["optics"] = optics_to_json(optics);
  j["window"] = window_to_json(cfg.window);
  write_text(out_dir + "/doppler.json", j.dump(2) + "\n");
  write_run_config(cfg, out_dir);
}

DopplerArtifacts load_doppler_artifacts(const std::string& doppler_dir) {
  json meta;
  try {
    meta = json::parse(read_text(doppler_dir + "/doppler.json"));
  } catch (const json::exception& e) {
    throw DataError("bad doppler.json: " + std::string(e.what()));
  }
  DopplerArtifacts art;
  art.width = meta.at("width");
  art.height = meta.at("height");
  art.window_count = meta.at("window_count");
  art.optics = optics_from_json(meta.at("optics"));
  art.window = window_from_json(meta.at("window"));

  const size_t npix = static_cast<size_t>(art.width) * art.height;
  const size_t total = npix * art.window_count;
  std::vector<float> m0 = read_f32(doppler_dir + "/m0.f32", total);
  std::vector<float> m2 = read_f32(doppler_dir + "/m2.f32", total);
  std::vector<uint8_t> def = read_u8(doppler_dir + "/defined.u8", total);
  std::vector<uint8_t> sat = read_u8(doppler_dir + "/saturated.u8", total);
  for (int w = 0; w < art.window_count; ++w) {
    ImageF a(art.width, art.height), b(art.width, art.height);
    Mask c(art.width, art.height), d(art.width, art.height);
    std::copy_n(m0.begin() + w * npix, npix, a.data.begin());
    std::copy_n(m2.begin() + w * npix, npix, b.data.begin());
    std::copy_n(def.begin() + w * npix, npix, c.data.begin());
    std::copy_n(sat.begin() + w * npix, npix, d.data.begin());
    art.m0.push_back(std::move(a));
    art.m2.push_back(std::move(b));
    art.defined.push_back(std::move(c));
    art.saturated.push_back(std::move(d));
  }
  return art;
}

void run_segment_stage(const RunConfig& cfg, const std::string& doppler_dir,
                       const std::string& out_dir) {
  ensure_dir(out_dir);
  apply_thread_config(cfg);
  DopplerArtifacts art = load_doppler_artifacts(doppler_dir);

  // Temporal average of M0 is the working power Doppler image.
  ImageF avg(art.width, art.height);
  for (const auto& m0 : art.m0)
    for (size_t p = 0; p < avg.size(); ++p) avg.data[p] += m0.data[p];
  for (auto& v : avg.data) v /= static_cast<float>(art.window_count);

  FlatFieldResult ff = flat_field_correct(avg, cfg.seg.flatfield_sigma_px);
  ImageF vesselness = frangi_vesselness(ff.image, cfg.seg.frangi_scales_px,
                                        cfg.seg.frangi_beta, cfg.seg.frangi_c);
  Mask vessel_mask(art.width, art.height);
  for (size_t p = 0; p < vessel_mask.size(); ++p)
    vessel_mask.data[p] = vesselness.data[p] >= cfg.seg.vessel_threshold ? 1 : 0;

  ImageF correlation(art.width, art.height, 1.0f);
  const bool use_corr =
      cfg.seg.artery_threshold > -1.0 && art.window_count >= 8;
  if (use_corr) correlation = temporal_correlation_map(art.m0, vessel_mask);

  SegmentationConfig seg_cfg = cfg.seg;
  if (!use_corr) seg_cfg.artery_threshold = -2.0;  // disable the gate
  RefineResult refined = threshold_and_refine(vesselness, correlation, seg_cfg);

  write_f32(out_dir + "/flatfield.f32", ff.image.data.data(), ff.image.size());
  write_f32(out_dir + "/vesselness.f32", vesselness.data.data(), vesselness.size());
  write_f32(out_dir + "/correlation.f32", correlation.data.data(), correlation.size());
  write_pgm(out_dir + "/vessel_mask.pgm", vessel_mask);
  write_pgm(out_dir + "/artery_mask.pgm", refined.artery_mask);
  write_png_gray(out_dir + "/vesselness.png", to_gray(vesselness));

  json j;
  j["width"] = art.width;
  j["height"] = art.height;
  j["vessel_threshold"] = cfg.seg.vessel_threshold;
  j["artery_threshold"] = cfg.seg.artery_threshold;
  j["correlation_gate_used"] = use_corr;
  j["flatfield_warning"] = ff.warned;
  j["component_sizes"] = refined.component_sizes;
  write_text(out_dir + "/segment.json", j.dump(2) + "\n");
  write_run_config(cfg, out_dir);
}

void run_flow_stage(const RunConfig& cfg, const std::string& doppler_dir,
                    const std::string& segment_dir, const std::string& out_dir) {
  ensure_dir(out_dir);
  apply_thread_config(cfg);
  DopplerArtifacts art = load_doppler_artifacts(doppler_dir);
  Mask artery = read_pgm(segment_dir + "/artery_mask.pgm");
  if (artery.width != art.width || artery.height != art.height)
    throw DataError("flow: artery mask dimensions do not match doppler maps");

  const double cx =
      cfg.flow.center_x_px >= 0 ? cfg.flow.center_x_px : (art.width - 1) / 2.0;
  const double cy =
      cfg.flow.center_y_px >= 0 ? cfg.flow.center_y_px : (art.height - 1) / 2.0;
  std::vector<SectionSeed> seeds = select_sections(
      artery, cx, cy, cfg.flow.circle_radius_px, cfg.flow.circle_width_px);

  const double scale = pixel_scale_from_papilla(cfg.flow.papilla_diameter_px,
                                                cfg.optics.papilla_diameter_m);

  std::vector<float> df_all, v_all;
  int total_fallbacks = 0;
  std::vector<std::vector<ArterySection>> window_sections(art.window_count);
  for (int w = 0; w < art.window_count; ++w) {
    BackgroundEstimate bg =
        estimate_background(art.m2[w], art.defined[w], artery,
                            cfg.ring_inner_px, cfg.ring_outer_px);
    total_fallbacks += bg.fallback_count;
    BroadeningMap bmap = differential_broadening(
        art.m2[w], bg.m2_background, artery, art.defined[w], art.saturated[w]);
    VelocityMap vel = velocity_from_broadening(bmap, art.optics);
    df_all.insert(df_all.end(), bmap.delta_f.data.begin(), bmap.delta_f.data.end());
    v_all.insert(v_all.end(), vel.v.data.begin(), vel.v.data.end());

    for (const auto& seed : seeds) {
      auto section = extract_profile(vel.v, seed, cfg.flow.profile_half_len_px,
                                     cfg.flow.profile_width_px);
      if (section) window_sections[w].push_back(std::move(*section));
    }
  }

  FlowResult result = total_flow_series(
      std::move(window_sections), cfg.flow, scale, art.optics.frame_rate_hz,
      art.window.window_len, art.window.hop);

  write_f32(out_dir + "/delta_f.f32", df_all.data(), df_all.size());
  write_f32(out_dir + "/velocity.f32", v_all.data(), v_all.size());

  // CSV time series.
  std::ostringstream csv;
  csv << "window_index,time_s,total_flow_ul_min,n_valid_sections\n";
  for (size_t w = 0; w < result.total_flow_ul_min.size(); ++w) {
    int valid = 0;
    for (const auto& s : result.sections[w]) valid += s.fit.valid ? 1 : 0;
    csv << w << "," << fmt_double(result.time_s[w]) << ","
        << fmt_double(result.total_flow_ul_min[w]) << "," << valid << "\n";
  }
  write_text(out_dir + "/total_flow.csv", csv.str());

  SysDiaProfiles phases;
  const bool have_phases = result.sections.size() >= 2;
  if (have_phases) {
    phases = systole_diastole_profiles(result);
    std::ostringstream pcsv;
    pcsv << "axis_r_over_R,systole_mean,systole_sd,diastole_mean,diastole_sd\n";
    for (size_t i = 0; i < phases.systole.axis.size(); ++i)
      pcsv << fmt_double(phases.systole.axis[i]) << ","
           << fmt_double(phases.systole.mean[i]) << ","
           << fmt_double(phases.systole.sd[i]) << ","
           << fmt_double(phases.diastole.mean[i]) << ","
           << fmt_double(phases.diastole.sd[i]) << "\n";
    write_text(out_dir + "/profiles.csv", pcsv.str());
  }

  // FlowResult JSON.
  json j;
  j["pixel_scale_m_per_px"] = result.pixel_scale_m_per_px;
  j["mean_total_flow_ul_min"] = result.mean_total_flow_ul_min;
  j["systolic_flow_ul_min"] = result.systolic_flow_ul_min;
  j["diastolic_flow_ul_min"] = result.diastolic_flow_ul_min;
  j["systolic_window"] = result.systolic_window;
  j["diastolic_window"] = result.diastolic_window;
  j["resistivity_index"] = result.resistivity_index;
  j["excluded_section_count"] = result.excluded_section_count;
  j["background_fallback_pixels"] = total_fallbacks;
  j["total_flow_ul_min"] = result.total_flow_ul_min;
  j["time_s"] = result.time_s;
  json jsec = json::array();
  for (size_t w = 0; w < result.sections.size(); ++w) {
    json jw = json::array();
    for (const auto& s : result.sections[w])
      jw.push_back({{"centroid_x", s.seed.centroid_x},
                    {"centroid_y", s.seed.centroid_y},
                    {"orientation_rad", s.orientation_rad},
                    {"valid", s.fit.valid},
                    {"vmax_m_s", s.fit.vmax},
                    {"radius_px", s.fit.radius_px},
                    {"radius_m", s.fitted_radius_m},
                    {"area_m2", s.area_m2},
                    {"volume_rate_m3s", s.volume_rate_m3s}});
    jsec.push_back(jw);
  }
  j["sections"] = jsec;
  write_text(out_dir + "/flow.json", j.dump(2) + "\n");

  // Figure analogs.
  {
    PlotSeries total{result.time_s, result.total_flow_ul_min, Rgb{200, 30, 30}};
    write_png_rgb(out_dir + "/total_flow.png", render_plot({total}));
    if (have_phases && phases.systole.section_count > 0) {
      PlotSeries sys{phases.systole.axis, phases.systole.mean, Rgb{200, 30, 30}};
      PlotSeries dia{phases.diastole.axis, phases.diastole.mean, Rgb{30, 30, 200}};
      write_png_rgb(out_dir + "/profiles.png", render_plot({sys, dia}));
    }
    ImageF avg(art.width, art.height);
    for (const auto& m0 : art.m0)
      for (size_t p = 0; p < avg.size(); ++p) avg.data[p] += m0.data[p];
    write_png_rgb(out_dir + "/composite_mask.png", overlay_mask(avg, artery));
  }
  write_run_config(cfg, out_dir);
}

void run_report(const RunConfig& cfg, const std::string& stack_path,
                const std::string& out_dir) {
  ensure_dir(out_dir);
  run_render_stage(cfg, stack_path, out_dir + "/render");
  run_doppler_stage(cfg, out_dir + "/render", out_dir + "/doppler");
  run_segment_stage(cfg, out_dir + "/doppler", out_dir + "/segment");
  run_flow_stage(cfg, out_dir + "/doppler", out_dir + "/segment",
                 out_dir + "/flow");

  json flow_json = json::parse(read_text(out_dir + "/flow/flow.json"));
  std::ostringstream rep;
  rep << "Doppler holography flow report\n"
      << "==============================\n"
      << "input stack:            " << stack_path << "\n"
      << "mean total flow:        " << flow_json["mean_total_flow_ul_min"]
      << " uL/min\n"
      << "systolic / diastolic:   " << flow_json["systolic_flow_ul_min"]
      << " / " << flow_json["diastolic_flow_ul_min"] << " uL/min\n"
      << "resistivity index:      " << flow_json["resistivity_index"] << "\n"
      << "pixel scale:            " << flow_json["pixel_scale_m_per_px"]
      << " m/px\n"
      << "excluded sections:      " << flow_json["excluded_section_count"]
      << "\n";
  write_text(out_dir + "/report.txt", rep.str());
  write_run_config(cfg, out_dir);
}

}  // namespace hflw
