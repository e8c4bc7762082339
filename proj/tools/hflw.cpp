// hflw: Doppler holography retinal blood-flow pipeline.
//
// Subcommands: phantom, render, doppler, segment, flow, bench, report.
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "hflw/bench.hpp"
#include "hflw/container.hpp"
#include "hflw/errors.hpp"
#include "hflw/pipeline.hpp"

namespace {

hflw::RunConfig make_config(const std::string& config_path, int threads_flag) {
  hflw::RunConfig cfg = hflw::load_run_config(config_path);
  if (threads_flag > 0) cfg.threads = threads_flag;
  if (const char* env = std::getenv("HFLW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) cfg.threads = n;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doppler holography retinal blood-flow pipeline"};
  app.require_subcommand(1);

  std::string config_path, stack_path, in_dir, seg_dir, out_dir = "out";
  int threads = 0;
  int bench_w = 384, bench_h = 384, bench_len = 512;
  std::vector<int> bench_threads = {1, 2, 4};

  app.add_option("--config", config_path, "RunConfig JSON file");
  app.add_option("--threads", threads, "OpenMP thread count");

  auto* cmd_phantom = app.add_subcommand("phantom", "generate a synthetic stack");
  cmd_phantom->add_option("--out", out_dir, "output directory");

  auto* cmd_render = app.add_subcommand("render", "interferograms -> holograms");
  cmd_render->add_option("--stack", stack_path, "HFLW container")->required();
  cmd_render->add_option("--out", out_dir, "output directory");

  auto* cmd_doppler = app.add_subcommand("doppler", "holograms -> moment maps");
  cmd_doppler->add_option("--render", in_dir, "render stage directory")->required();
  cmd_doppler->add_option("--out", out_dir, "output directory");

  auto* cmd_segment = app.add_subcommand("segment", "moment maps -> artery mask");
  cmd_segment->add_option("--doppler", in_dir, "doppler stage directory")->required();
  cmd_segment->add_option("--out", out_dir, "output directory");

  auto* cmd_flow = app.add_subcommand("flow", "mask + maps -> flow estimates");
  cmd_flow->add_option("--doppler", in_dir, "doppler stage directory")->required();
  cmd_flow->add_option("--segment", seg_dir, "segment stage directory")->required();
  cmd_flow->add_option("--out", out_dir, "output directory");

  auto* cmd_bench = app.add_subcommand("bench", "stage throughput report");
  cmd_bench->add_option("--width", bench_w, "window width");
  cmd_bench->add_option("--height", bench_h, "window height");
  cmd_bench->add_option("--window-len", bench_len, "frames per window");
  cmd_bench->add_option("--thread-sweep", bench_threads, "thread counts to sweep");
  cmd_bench->add_option("--out", out_dir, "output directory");

  auto* cmd_report = app.add_subcommand("report",
                                        "run the full chain and summarize");
  cmd_report->add_option("--stack", stack_path, "HFLW container")->required();
  cmd_report->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const hflw::RunConfig cfg = make_config(config_path, threads);
    if (cmd_phantom->parsed()) {
      hflw::run_phantom_stage(cfg, out_dir);
    } else if (cmd_render->parsed()) {
      hflw::run_render_stage(cfg, stack_path, out_dir);
    } else if (cmd_doppler->parsed()) {
      hflw::run_doppler_stage(cfg, in_dir, out_dir);
    } else if (cmd_segment->parsed()) {
      hflw::run_segment_stage(cfg, in_dir, out_dir);
    } else if (cmd_flow->parsed()) {
      hflw::run_flow_stage(cfg, in_dir, seg_dir, out_dir);
    } else if (cmd_bench->parsed()) {
      hflw::apply_thread_config(cfg);
      hflw::BenchReport report =
          hflw::run_benchmark(bench_w, bench_h, bench_len, bench_threads);
      std::filesystem::create_directories(out_dir);
      hflw::write_text(out_dir + "/bench.json", report.to_json());
      hflw::write_text(out_dir + "/bench.txt", report.table);
      std::cout << report.table;
    } else if (cmd_report->parsed()) {
      hflw::run_report(cfg, stack_path, out_dir);
      std::cout << hflw::read_text(out_dir + "/report.txt");
    }
  } catch (const hflw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hflw::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const hflw::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
