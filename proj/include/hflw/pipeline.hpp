#pragma once

#include <string>

#include "hflw/flow.hpp"
#include "hflw/params.hpp"
#include "hflw/phantom.hpp"
#include "hflw/segmentation.hpp"
#include "hflw/spectral.hpp"

namespace hflw {

// Full run configuration; serialized as a single JSON document and embedded
// in every stage's output directory for reproducibility.
struct RunConfig {
  OpticalParams optics;
  SpectralWindowConfig window;
  SegmentationConfig seg;
  FlowConfig flow;
  double ring_inner_px = 3.0;
  double ring_outer_px = 9.0;
  int threads = 0;  // 0 keeps the OpenMP default
  PhantomSpec phantom;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);  // empty path -> defaults

void apply_thread_config(const RunConfig& cfg);

// Stage runners behind the CLI subcommands. Each writes its artifacts plus
// the embedded run_config.json into out_dir.
void run_phantom_stage(const RunConfig& cfg, const std::string& out_dir);
void run_render_stage(const RunConfig& cfg, const std::string& stack_path,
                      const std::string& out_dir);
void run_doppler_stage(const RunConfig& cfg, const std::string& render_dir,
                       const std::string& out_dir);
void run_segment_stage(const RunConfig& cfg, const std::string& doppler_dir,
                       const std::string& out_dir);
void run_flow_stage(const RunConfig& cfg, const std::string& doppler_dir,
                    const std::string& segment_dir, const std::string& out_dir);

// One-shot chain: render -> doppler -> segment -> flow under out_dir/<stage>,
// then a human-readable report.txt. Bit-identical to running the stages
// separately.
void run_report(const RunConfig& cfg, const std::string& stack_path,
                const std::string& out_dir);

// Helpers shared with tests.
struct DopplerArtifacts {
  int width = 0, height = 0, window_count = 0;
  std::vector<ImageF> m0, m2;
  std::vector<Mask> defined, saturated;
  OpticalParams optics;
  SpectralWindowConfig window;
};
DopplerArtifacts load_doppler_artifacts(const std::string& doppler_dir);

}  // namespace hflw
