// Serial vs OpenMP timings for the similarity kernels and the execution pool.

#include <chrono>
#include <cstdio>
#include <random>

#include <CLI11.hpp>
#include <omp.h>

#include "suitegen/execution.hpp"
#include "suitegen/kernels.hpp"

using namespace suitegen;
using Clock = std::chrono::steady_clock;

template <class Fn>
double best_ms(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return best;
}

int main(int argc, char** argv) {
  std::size_t n = 2000, dim = 64, k = 10, solutions = 64, tests = 40;
  int reps = 3, threads = omp_get_max_threads();
  CLI::App app{"kernel benchmark"};
  app.add_option("--n", n, "embedding rows");
  app.add_option("--dim", dim, "embedding dimension");
  app.add_option("--k", k, "neighbours");
  app.add_option("--reps", reps, "repetitions (best is reported)");
  app.add_option("--threads", threads, "OpenMP threads for the parallel variants");
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  std::vector<double> data(n * dim);
  for (auto& x : data) x = g(rng);
  kernels::EmbeddingMatrix m(n, dim, data);

  std::vector<kernels::Edge> serial_edges, parallel_edges;
  const double t_edges_s = best_ms(reps, [&] { serial_edges = kernels::serial::similarity_edges(m, 0.2); });
  const double t_edges_p =
      best_ms(reps, [&] { parallel_edges = kernels::parallel::similarity_edges(m, 0.2, threads); });
  std::vector<double> ks, kp;
  const double t_knn_s = best_ms(reps, [&] { ks = kernels::serial::knn_means(m, k); });
  const double t_knn_p = best_ms(reps, [&] { kp = kernels::parallel::knn_means(m, k, threads); });

  // Execution pool over a truth table: exercises scheduling and assembly only.
  execution::TruthTableExecutor exec;
  std::vector<execution::SolutionSpec> sols;
  std::vector<std::string> programs;
  for (std::size_t s = 0; s < solutions; ++s) {
    programs.push_back("solution " + std::to_string(s));
    sols.push_back({"s" + std::to_string(s), programs.back()});
  }
  exec.add_problem("bench", programs);
  std::vector<execution::TestSpec> specs;
  for (std::size_t t = 0; t < tests; ++t) {
    std::string outcomes;
    for (std::size_t s = 0; s < solutions; ++s) outcomes += (s + t) % 3 ? 'p' : 'f';
    specs.push_back({"t" + std::to_string(t), "assert case(" + std::to_string(t) + ")"});
    exec.add_test("bench", specs.back().code, outcomes);
  }
  execution::VerdictTable a, b;
  const execution::ExecutionLimits limits;
  const double t_exec_s = best_ms(reps, [&] { a = execution::execute_suite("bench", sols, specs, limits, exec, {1}); });
  const double t_exec_p =
      best_ms(reps, [&] { b = execution::execute_suite("bench", sols, specs, limits, exec, {threads}); });

  std::printf("threads=%d n=%zu dim=%zu k=%zu\n", threads, n, dim, k);
  std::printf("%-18s %12s %12s %8s %s\n", "kernel", "serial_ms", "parallel_ms", "speedup", "agree");
  std::printf("%-18s %12.3f %12.3f %8.2f %s\n", "similarity_edges", t_edges_s, t_edges_p, t_edges_s / t_edges_p,
              serial_edges == parallel_edges ? "yes" : "NO");
  std::printf("%-18s %12.3f %12.3f %8.2f %s\n", "knn_means", t_knn_s, t_knn_p, t_knn_s / t_knn_p,
              ks == kp ? "yes" : "NO");
  std::printf("%-18s %12.3f %12.3f %8.2f %s\n", "execute_suite", t_exec_s, t_exec_p, t_exec_s / t_exec_p,
              a == b ? "yes" : "NO");
  return serial_edges == parallel_edges && ks == kp && a == b ? 0 : 1;
}
