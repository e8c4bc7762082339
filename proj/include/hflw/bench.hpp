#pragma once

#include <string>
#include <vector>

namespace hflw {

struct StageRate {
  std::string stage;
  int threads = 0;
  double seconds = 0.0;
  double frames_per_s = 0.0;
  double pixels_per_s = 0.0;
};

struct BenchReport {
  int width = 0, height = 0, window_len = 0;
  std::vector<StageRate> rates;       // per stage, per thread count
  double end_to_end_frames_per_s = 0.0;  // best thread count
  double ratio_to_acquisition = 0.0;  // end-to-end rate / 33 kHz
  std::string table;                  // human-readable
  std::string to_json() const;
};

// Time render / SVD filter / STFT-moment stages on one synthetic window
// across a thread-count sweep. Rates are reported, never asserted.
BenchReport run_benchmark(int width = 384, int height = 384,
                          int window_len = 512,
                          const std::vector<int>& thread_counts = {1, 2, 4});

}  // namespace hflw
