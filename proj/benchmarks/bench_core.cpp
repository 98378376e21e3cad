#include <benchmark/benchmark.h>

#include <random>

#include "lgp/consistency.hpp"
#include "lgp/experiments.hpp"
#include "lgp/operators.hpp"

namespace {

using namespace lgp;

struct Fixture {
  DataConfig dc;
  TrainingDataset data = generate_training_data(dc);
  PriorModel prior = make_two_link_prior(dc.plant.erroneous());
  LagrangianKernel kernel = make_kernel(KernelConfig{});
  TrainedModel model = train(data, prior, kernel);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

DifferentialInput input(double s) {
  return {(Vector(2) << 0.3 * s, -0.2).finished(), (Vector(2) << -1.0, 1.0).finished(),
          (Vector(2) << 1.0, 0.5 * s).finished()};
}

void BM_TorqueBlock(benchmark::State& state) {
  const LagrangianKernel& k = fixture().kernel;
  const DifferentialInput a = input(1.0), b = input(-0.7);
  for (auto _ : state) benchmark::DoNotOptimize(torque_kernel_block(k, a, b));
}
BENCHMARK(BM_TorqueBlock);

void BM_AssembleJoint(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(assemble_joint(f.data, f.prior, f.kernel));
}
BENCHMARK(BM_AssembleJoint)->Unit(benchmark::kMillisecond);

void BM_Train(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(train(f.data, f.prior, f.kernel));
}
BENCHMARK(BM_Train)->Unit(benchmark::kMillisecond);

void BM_PredictMatrix(benchmark::State& state) {
  const TrainedModel& m = fixture().model;
  const Vector q = (Vector(2) << 0.4, -0.9).finished();
  for (auto _ : state) benchmark::DoNotOptimize(m.predict_matrix(1, q));
}
BENCHMARK(BM_PredictMatrix);

void BM_PredictTorque(benchmark::State& state) {
  const TrainedModel& m = fixture().model;
  const DifferentialInput x = input(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict_torque(x.q, x.qdot, x.qddot));
}
BENCHMARK(BM_PredictTorque);

void BM_EigLowerBound(benchmark::State& state) {
  const TrainedModel& m = fixture().model;
  const Vector q = (Vector(2) << 0.4, -0.9).finished();
  for (auto _ : state) benchmark::DoNotOptimize(eig_lower_bound_unchecked(m, 1, q));
}
BENCHMARK(BM_EigLowerBound);

}  // namespace

BENCHMARK_MAIN();
