#include <benchmark/benchmark.h>

#include <cmath>

#include "cocycle/asymptotics.hpp"
#include "cocycle/bernstein.hpp"
#include "cocycle/euclid.hpp"
#include "cocycle/folner.hpp"
#include "cocycle/group.hpp"
#include "cocycle/kernels.hpp"

using namespace cocycle;

namespace {

void BM_EnumerateBall(benchmark::State& state, const char* family) {
  const int radius = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto model = GroupModel::from_name(family);
    benchmark::DoNotOptimize(enumerate_ball(model, radius).size());
  }
}
BENCHMARK_CAPTURE(BM_EnumerateBall, Z2, "Z2")->Arg(20)->Arg(80);
BENCHMARK_CAPTURE(BM_EnumerateBall, F2, "F2")->Arg(6)->Arg(9);
BENCHMARK_CAPTURE(BM_EnumerateBall, Heisenberg, "H3")->Arg(6)->Arg(10);
BENCHMARK_CAPTURE(BM_EnumerateBall, Lamplighter, "L2")->Arg(6)->Arg(10);

void BM_CndCheckFreeGroup(benchmark::State& state) {
  auto f2 = GroupModel::free_group(2);
  const int r = static_cast<int>(state.range(0));
  auto psi = tabulate(f2, 2 * r, [&](const GroupElement& g) { return double(f2.word_length(g)); },
                      KernelKind::cnd_candidate);
  for (auto _ : state) benchmark::DoNotOptimize(cnd_check(psi, kDefaultPsdTolerance, r).min_eigenvalue);
}
BENCHMARK(BM_CndCheckFreeGroup)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GnsEmbedZ2(benchmark::State& state) {
  auto z2 = GroupModel::free_abelian(2);
  const int r = static_cast<int>(state.range(0));
  auto psi = tabulate(z2, 2 * r, [](const GroupElement& g) {
    return double(g.coords[0] * g.coords[0] + g.coords[1] * g.coords[1]);
  }, KernelKind::cnd_candidate);
  for (auto _ : state) benchmark::DoNotOptimize(gns_embed(psi, kDefaultPsdTolerance, r).dimension());
}
BENCHMARK(BM_GnsEmbedZ2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_MinorizeProper(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(minorize_proper({[](double t) { return 1 + std::log1p(t); }, {}}, 8).steps.size());
}
BENCHMARK(BM_MinorizeProper)->Unit(benchmark::kMillisecond);

void BM_MajorizeSublinear(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(majorize_sublinear([](double x) { return std::sqrt(x); }).threshold);
}
BENCHMARK(BM_MajorizeSublinear)->Unit(benchmark::kMillisecond);

void BM_StandardFolner(benchmark::State& state, const char* family) {
  auto model = GroupModel::from_name(family);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(standard_folner(model, n).elements.size());
}
BENCHMARK_CAPTURE(BM_StandardFolner, Z2, "Z2")->Arg(10)->Arg(40);
BENCHMARK_CAPTURE(BM_StandardFolner, Lamplighter, "L2")->Arg(3)->Arg(5);

void BM_SphereSubsequence(benchmark::State& state) {
  auto z2 = GroupModel::free_abelian(2);
  for (auto _ : state) benchmark::DoNotOptimize(sphere_subsequence(z2, 30).c);
}
BENCHMARK(BM_SphereSubsequence)->Unit(benchmark::kMillisecond);

void BM_FourierSqrt(benchmark::State& state) {
  auto z = GroupModel::free_abelian(1);
  auto f = tabulate(z, 128, [](const GroupElement& g) { return std::exp(-0.1 * double(g.coords[0] * g.coords[0])); },
                    KernelKind::pd_candidate);
  const int window = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fourier_sqrt_abelian(f, {window}).norm_sq);
}
BENCHMARK(BM_FourierSqrt)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_GromovAverage(benchmark::State& state) {
  auto z = GroupModel::free_abelian(1);
  auto f = sample_embedding(z, 1300, [](const GroupElement& g) {
    double k = double(g.coords[0]);
    return Eigen::VectorXd::Constant(1, k + std::sin(k));
  });
  std::vector<FolnerSet> boxes;
  for (int n : {25, 50, 100, 200}) boxes.push_back(standard_folner(z, n));
  GromovOptions o;
  o.output_radius = 12;
  for (auto _ : state) benchmark::DoNotOptimize(gromov_average(f, boxes, o).stabilized);
}
BENCHMARK(BM_GromovAverage)->Unit(benchmark::kMillisecond);

void BM_SmoothFloor(benchmark::State& state) {
  GridSpec grid{{-50}, {50}, 0.01};
  auto floor_map = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array().floor().matrix()); };
  for (auto _ : state) benchmark::DoNotOptimize(smooth_uniform_map(floor_map, grid, 1.0).sup_distance);
}
BENCHMARK(BM_SmoothFloor)->Unit(benchmark::kMillisecond);

void BM_Displacement(benchmark::State& state) {
  Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  EuclideanIsometry g{r, Eigen::Vector3d(1, -2, 0.5)};
  for (auto _ : state) benchmark::DoNotOptimize(displacement(g).length);
}
BENCHMARK(BM_Displacement);

void BM_CocompactP4(benchmark::State& state) {
  std::vector<EuclideanIsometry> p4{plane_rotation(M_PI / 2), translation(Eigen::Vector2d(1, 0))};
  FlatSearchOptions o;
  o.max_length = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cocompact_check(p4, o).verdict);
}
BENCHMARK(BM_CocompactP4)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
