// Parallel (OpenMP) kernels against their serial references on crossed meshes.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "shear/assembly.hpp"

using namespace shear;

namespace {

struct Fixture {
  std::shared_ptr<Assembler> a;
  Eigen::VectorXd v;
  std::vector<SymTensor2> sigma;
  std::vector<PointTangent> tangent;
};

const Fixture& fixture(int n) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& f = cache[n];
  if (!f) {
    f = std::make_unique<Fixture>();
    f->a = std::make_shared<Assembler>(make_discretization(Mesh::structured(n, n)));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    f->v.resize(f->a->num_velocity());
    for (auto& x : f->v) x = nd(rng);
    f->sigma = f->a->strain(f->v);
    f->tangent.resize(f->sigma.size());
    for (std::size_t q = 0; q < f->sigma.size(); ++q) {
      const double s = f->sigma[q].norm();
      f->tangent[q] = {1.0 / (1.0 + s), 0.5, s > 0.0 ? (1.0 / s) * f->sigma[q] : f->sigma[q]};
    }
  }
  return *f;
}

void sym_gradient(benchmark::State& st, Exec exec) {
  const Fixture& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto e = exec == Exec::serial ? reference::sym_gradient(f.a->disc(), f.v)
                                  : kernels::sym_gradient(f.a->disc(), f.v, Exec::parallel);
    benchmark::DoNotOptimize(e.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.a->disc().num_elements()));
}

void integrate_stress(benchmark::State& st, Exec exec) {
  const Fixture& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto r = exec == Exec::serial ? reference::integrate_stress(f.a->disc(), f.sigma)
                                  : kernels::integrate_stress(f.a->disc(), f.sigma, Exec::parallel);
    benchmark::DoNotOptimize(r.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.a->disc().num_elements()));
}

void assemble_tangent(benchmark::State& st, Exec exec) {
  const Fixture& f = fixture(static_cast<int>(st.range(0)));
  SparseMatrix m = f.a->pattern();
  for (auto _ : st) {
    std::fill(m.valuePtr(), m.valuePtr() + m.nonZeros(), 0.0);
    if (exec == Exec::serial) {
      reference::assemble_tangent(f.a->disc(), f.a->scatter(), f.tangent, m.valuePtr());
    } else {
      kernels::assemble_tangent(f.a->disc(), f.a->scatter(), f.tangent, m.valuePtr(), Exec::parallel);
    }
    benchmark::DoNotOptimize(m.valuePtr());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.a->disc().num_elements()));
}

}  // namespace

BENCHMARK_CAPTURE(sym_gradient, serial, Exec::serial)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();
BENCHMARK_CAPTURE(sym_gradient, parallel, Exec::parallel)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();
BENCHMARK_CAPTURE(integrate_stress, serial, Exec::serial)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();
BENCHMARK_CAPTURE(integrate_stress, parallel, Exec::parallel)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();
BENCHMARK_CAPTURE(assemble_tangent, serial, Exec::serial)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();
BENCHMARK_CAPTURE(assemble_tangent, parallel, Exec::parallel)->Arg(16)->Arg(64)->Arg(128)->UseRealTime();

BENCHMARK_MAIN();
