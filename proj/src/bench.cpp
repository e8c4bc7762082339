#include "hflw/bench.hpp"

#include <omp.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <sstream>

#include "hflw/clutter.hpp"
#include "hflw/optics.hpp"
#include "hflw/phantom.hpp"
#include "hflw/spectral.hpp"

namespace hflw {
namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

constexpr double kAcquisitionRateHz = 33000.0;

}  // namespace

std::string BenchReport::to_json() const {
  nlohmann::json j;
  j["width"] = width;
  j["height"] = height;
  j["window_len"] = window_len;
  j["end_to_end_frames_per_s"] = end_to_end_frames_per_s;
  j["acquisition_rate_hz"] = kAcquisitionRateHz;
  j["ratio_to_acquisition"] = ratio_to_acquisition;
  nlohmann::json jr = nlohmann::json::array();
  for (const auto& r : rates)
    jr.push_back({{"stage", r.stage},
                  {"threads", r.threads},
                  {"seconds", r.seconds},
                  {"frames_per_s", r.frames_per_s},
                  {"pixels_per_s", r.pixels_per_s}});
  j["rates"] = jr;
  return j.dump(2) + "\n";
}

BenchReport run_benchmark(int width, int height, int window_len,
                          const std::vector<int>& thread_counts) {
  BenchReport report;
  report.width = width;
  report.height = height;
  report.window_len = window_len;

  // Synthetic input window, generated once.
  PhantomSpec spec;
  spec.width = width;
  spec.height = height;
  spec.frame_count = window_len;
  spec.window.window_len = window_len;
  spec.window.hop = window_len;
  spec.synth_segment_len = window_len;
  auto [stack, truth] = generate_phantom(spec);

  SpectralWindowConfig cfg = spec.window;
  const size_t npix = static_cast<size_t>(width) * height;
  const int saved_threads = omp_get_max_threads();

  double best_total = 1e300;
  for (int nt : thread_counts) {
    omp_set_num_threads(nt);

    double t0 = now_s();
    HologramStack holo = render_hologram_stack(stack, 5e-3);
    const double t_render = now_s() - t0;

    std::vector<std::complex<float>> window = holo.frames;
    t0 = now_s();
    svd_clutter_filter(window.data(), width, height, window_len, cfg.svd_remove);
    const double t_svd = now_s() - t0;

    t0 = now_s();
    MomentMaps maps = compute_moment_maps(window.data(), width, height, cfg,
                                          spec.params.frame_rate_hz);
    const double t_stft = now_s() - t0;
    (void)maps;

    auto add = [&](const std::string& name, double sec) {
      StageRate r;
      r.stage = name;
      r.threads = nt;
      r.seconds = sec;
      r.frames_per_s = window_len / sec;
      r.pixels_per_s = npix * window_len / sec;
      report.rates.push_back(r);
    };
    add("render", t_render);
    add("svd_filter", t_svd);
    add("stft_moments", t_stft);
    add("end_to_end", t_render + t_svd + t_stft);
    best_total = std::min(best_total, t_render + t_svd + t_stft);
  }
  omp_set_num_threads(saved_threads);

  report.end_to_end_frames_per_s = window_len / best_total;
  report.ratio_to_acquisition = report.end_to_end_frames_per_s / kAcquisitionRateHz;

  std::ostringstream table;
  table << "benchmark window " << width << "x" << height << "x" << window_len
        << "\n";
  table << "stage           threads   seconds     frames/s      pixels/s\n";
  for (const auto& r : report.rates) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-15s %7d %9.3f %12.1f %13.3e\n",
                  r.stage.c_str(), r.threads, r.seconds, r.frames_per_s,
                  r.pixels_per_s);
    table << line;
  }
  char tail[160];
  std::snprintf(tail, sizeof(tail),
                "end-to-end best: %.1f frames/s (%.4fx the 33000 frames/s "
                "acquisition rate)\n",
                report.end_to_end_frames_per_s, report.ratio_to_acquisition);
  table << tail;
  report.table = table.str();
  return report;
}

}  // namespace hflw
