#include <benchmark/benchmark.h>

#include <random>

#include "facegest/frameio.h"
#include "facegest/mouthseg.h"
#include "facegest/synthetic.h"
#include "facegest/trackers.h"

using namespace facegest;

namespace {

frameio::Frame mouth_roi(int w, int h) {
  frameio::Frame f(w, h, 1);
  std::fill(f.pixels().begin(), f.pixels().end(), std::uint8_t{170});
  synthetic::draw_ellipse(f, {{w / 2.0, h / 2.0}, w * 0.3, h * 0.2, 10.0, 20});
  return f;
}

void BM_Segment(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const auto roi = mouth_roi(w, w * 3 / 4);
  const mouthseg::SegmentationParams params;
  for (auto _ : state) benchmark::DoNotOptimize(mouthseg::segment(roi, params));
  state.SetItemsProcessed(state.iterations() * roi.width() * roi.height());
}
BENCHMARK(BM_Segment)->Arg(64)->Arg(128)->Arg(256);

void BM_LabelNoise(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  mouthseg::BlobMask mask(n, n);
  std::mt19937 rng(7);
  std::bernoulli_distribution on(0.45);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) mask.set(x, y, on(rng));
  for (auto _ : state) benchmark::DoNotOptimize(mouthseg::label_components(mask, 8));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_LabelNoise)->Arg(64)->Arg(256);

void BM_CropOriented(benchmark::State& state) {
  frameio::Frame frame(640, 480, 3);
  std::mt19937 rng(3);
  for (auto& p : frame.pixels()) p = static_cast<std::uint8_t>(rng());
  const frameio::OrientedRoi roi{{320, 240}, 160, 120, static_cast<double>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(frameio::crop_oriented(frame, roi));
}
BENCHMARK(BM_CropOriented)->Arg(0)->Arg(30);

void BM_NfUpdate(benchmark::State& state) {
  const auto frame = synthetic::render(synthetic::NostrilFace{});
  const trackers::TrackerConfig cfg;
  const auto start = trackers::nf_init(frame, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(trackers::nf_update(start, frame, cfg));
}
BENCHMARK(BM_NfUpdate);

}  // namespace

BENCHMARK_MAIN();
