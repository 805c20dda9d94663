// Acceptance suite: one line per criterion, nonzero exit when any fails.
// The heavy synthetic runs reproduce the 100x100x100, L=30 setting with ten
// seeds per variant; independent runs are spread over the available cores.

#include "ll1/datagen.hpp"
#include "ll1/init.hpp"
#include "ll1/io.hpp"
#include "ll1/metrics.hpp"
#include "ll1/model.hpp"
#include "ll1/projections.hpp"
#include "ll1/solver.hpp"
#include "ll1/tv.hpp"

#include "oracles.hpp"

#include <Eigen/SVD>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

using namespace ll1;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%2d] %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", value);
  return buf;
}

void run_parallel(std::vector<std::function<void()>>& tasks) {
  std::atomic<std::size_t> next{0};
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();)
        tasks[i]();
    });
  for (auto& t : pool) t.join();
}

struct SyntheticRun {
  double mse_c = 1.0;
  double sto_percent = 0.0;
  double lr_energy = 0.0;
  double mean_ap_iters = 0.0;
  double wall_s = 0.0;
  double final_min_delta = 1.0;
  double realized_snr = 0.0;
  int iterations = 0;
  bool ok = false;
  std::string error;
};

SyntheticRun synthetic_run(std::uint64_t seed, Index endmembers,
                           bool exact_rank) {
  SyntheticRun out;
  try {
    const Index n = 100, rank = 30;
    const auto truth = generate_synthetic(n, n, n, rank, endmembers, seed);
    const HsiCube noisy = add_noise(truth.cube, 25.0, 10000 + seed);
    out.realized_snr =
        10.0 * std::log10(truth.cube.matricized().squaredNorm() /
                          (noisy.matricized() - truth.cube.matricized())
                              .squaredNorm());

    SolverConfig config;
    config.mode = exact_rank
                      ? FeasibilityMode::ExactRank(rank)
                      : FeasibilityMode::NuclearBall(1.5 * n);
    config.energy_rank = rank;
    config.max_iters = 1200;

    const auto start = std::chrono::steady_clock::now();
    const Matrix c0 = spa_endmembers(noisy.matricized(), endmembers);
    const Matrix s0 =
        init_abundances(noisy.matricized(), c0, config.mode, n, n);
    const RunResult result = run(noisy, c0, s0, config);
    out.wall_s = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();

    out.mse_c = mse_factor(result.endmembers, truth.endmembers).value;
    out.sto_percent = sto_feasibility(result.abundances, 1e-5);
    out.lr_energy = lr_feasibility(result.abundances, n, n, rank);
    double ap_total = 0.0;
    for (const auto& rec : result.trace.records) ap_total += rec.ap_iters;
    out.iterations = static_cast<int>(result.trace.records.size());
    out.mean_ap_iters = ap_total / std::max(1, out.iterations);
    out.final_min_delta = result.trace.running_min_iterate_delta().back();
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct MseSummary {
  double mean = 0.0;
  double max = 0.0;
  double max_wall = 0.0;
  bool all_ok = true;
};

MseSummary summarize(const std::vector<SyntheticRun>& runs) {
  MseSummary s;
  for (const auto& r : runs) {
    if (!r.ok) {
      s.all_ok = false;
      continue;
    }
    s.mean += r.mse_c / runs.size();
    s.max = std::max(s.max, r.mse_c);
    s.max_wall = std::max(s.max_wall, r.wall_s);
  }
  return s;
}

std::vector<SyntheticRun> criterion_runs(Index endmembers, bool exact_rank,
                                         int seeds) {
  std::vector<SyntheticRun> runs(seeds);
  std::vector<std::function<void()>> tasks;
  for (int seed = 0; seed < seeds; ++seed)
    tasks.push_back([&runs, seed, endmembers, exact_rank]() {
      runs[seed] = synthetic_run(seed, endmembers, exact_rank);
    });
  run_parallel(tasks);
  return runs;
}

// ---------------------------------------------------------------- criteria

std::vector<SyntheticRun> lr_runs_r5, nn_runs_r5;

void criterion_1() {
  lr_runs_r5 = criterion_runs(5, true, 10);
  nn_runs_r5 = criterion_runs(5, false, 10);
  const MseSummary lr = summarize(lr_runs_r5);
  const MseSummary nn = summarize(nn_runs_r5);

  bool snr_ok = true;
  for (const auto& r : lr_runs_r5)
    snr_ok = snr_ok && r.ok && std::abs(r.realized_snr - 25.0) <= 0.1;

  const bool pass = lr.all_ok && nn.all_ok && lr.mean <= 1e-4 &&
                    nn.mean <= 1e-4 && snr_ok;
  report(1, pass,
         "synthetic MSE r=5, 10 seeds: lr mean " + fmt(lr.mean) + " (max " +
             fmt(lr.max) + "), nn mean " + fmt(nn.mean) + " (max " +
             fmt(nn.max) + "), threshold 1e-4; realized SNR within 0.1 dB: " +
             (snr_ok ? "yes" : "NO") + "; max wall " + fmt(lr.max_wall) +
             "s/" + fmt(nn.max_wall) + "s");
}

void criterion_2() {
  const auto lr_runs = criterion_runs(10, true, 10);
  const auto nn_runs = criterion_runs(10, false, 10);
  const MseSummary lr = summarize(lr_runs);
  const MseSummary nn = summarize(nn_runs);
  const bool pass =
      lr.all_ok && nn.all_ok && nn.mean <= 1e-4 && lr.mean <= 1e-3;
  report(2, pass,
         "synthetic MSE r=10, 10 seeds: nn mean " + fmt(nn.mean) +
             " (threshold 1e-4), lr mean " + fmt(lr.mean) +
             " (threshold 1e-3); max wall " + fmt(lr.max_wall) + "s/" +
             fmt(nn.max_wall) + "s");
}

void criterion_3() {
  bool sto_exact = true;
  double lr_energy_mean = 0.0, nn_energy_mean = 0.0;
  for (const auto& r : lr_runs_r5) {
    sto_exact = sto_exact && r.ok && r.sto_percent == 100.0;
    lr_energy_mean += r.lr_energy / lr_runs_r5.size();
  }
  for (const auto& r : nn_runs_r5) {
    sto_exact = sto_exact && r.ok && r.sto_percent == 100.0;
    nn_energy_mean += r.lr_energy / nn_runs_r5.size();
  }
  const bool pass =
      sto_exact && lr_energy_mean >= 99.0 && nn_energy_mean >= 96.0;
  report(3, pass,
         "feasibility on run-1 outputs: STO at p=1e-5 " +
             std::string(sto_exact ? "100% on all 20 runs" : "VIOLATED") +
             ", LR energy lr " + fmt(lr_energy_mean) + "% (>= 99), nn " +
             fmt(nn_energy_mean) + "% (>= 96)");
}

void criterion_4() {
  double lr_ap = 0.0, nn_ap = 0.0;
  bool ok = true;
  for (const auto& r : lr_runs_r5) {
    ok = ok && r.ok;
    lr_ap += r.mean_ap_iters / lr_runs_r5.size();
  }
  for (const auto& r : nn_runs_r5) {
    ok = ok && r.ok;
    nn_ap += r.mean_ap_iters / nn_runs_r5.size();
  }
  const bool pass = ok && lr_ap <= 8.0 && nn_ap <= 4.0;
  report(4, pass,
         "AP cost on run-1 traces: mean sweeps lr " + fmt(lr_ap) +
             " (<= 8), nn " + fmt(nn_ap) + " (<= 4)");
}

void criterion_5() {
  struct AccelCheck {
    int crossing = -1;
    double reference = 0.0;
    double min_delta = 1.0;
    bool ok = false;
    std::string label;
  };
  std::vector<AccelCheck> checks(2);
  std::vector<std::function<void()>> tasks;
  for (int m = 0; m < 2; ++m)
    tasks.push_back([m, &checks]() {
      const bool exact_rank = m == 0;
      AccelCheck check;
      check.label = exact_rank ? "lr" : "nn";
      try {
        const Index n = 100, rank = 30;
        const auto truth = generate_synthetic(n, n, n, rank, 5, 0);
        const HsiCube noisy = add_noise(truth.cube, 25.0, 10000);
        SolverConfig config;
        config.mode = exact_rank ? FeasibilityMode::ExactRank(rank)
                                 : FeasibilityMode::NuclearBall(1.5 * n);
        config.energy_rank = rank;
        config.max_iters = 800;
        config.obj_tol = 1e-18;  // force full-length runs
        const auto [c0, s0] =
            random_init({n, n, n, rank, 1.5 * n, 5}, config.mode, 2024);

        config.extrapolation = false;
        const RunResult plain = run(noisy, c0, s0, config);
        config.extrapolation = true;
        const RunResult accel = run(noisy, c0, s0, config);

        check.reference = plain.trace.records.back().objective;
        for (const auto& rec : accel.trace.records)
          if (rec.objective <= check.reference) {
            check.crossing = rec.iter;
            break;
          }
        // stationarity proxy of the long extrapolated run
        check.min_delta = accel.trace.running_min_iterate_delta().back();
        check.ok = check.crossing > 0 && check.crossing <= 400 &&
                   check.min_delta <= 1e-3;
      } catch (const std::exception& e) {
        check.label += std::string(" error: ") + e.what();
      }
      checks[m] = check;
    });
  run_parallel(tasks);

  const bool pass = checks[0].ok && checks[1].ok;
  report(5, pass,
         "acceleration: extrapolated run matches the plain 800-iteration "
         "objective at iter " +
             std::to_string(checks[0].crossing) + " (" + checks[0].label +
             "), " + std::to_string(checks[1].crossing) + " (" +
             checks[1].label + "); threshold 400; long-run min iterate "
             "delta " +
             fmt(checks[0].min_delta) + "/" + fmt(checks[1].min_delta) +
             " (<= 1e-3)");
}

void criterion_6() {
  const auto start = std::chrono::steady_clock::now();
  SeededRng rng(606);
  double worst_c = 0.0, worst_s = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index rows = 3 + static_cast<Index>(rng.uniform() * 6);
    const Index cols = 3 + static_cast<Index>(rng.uniform() * 6);
    const Index bands = 2 + static_cast<Index>(rng.uniform() * 5);
    const Index r = 2 + static_cast<Index>(rng.uniform() * 3);
    const Matrix c = rng.gaussian_matrix(bands, r).cwiseAbs();
    const Matrix s = rng.gaussian_matrix(r, rows * cols);
    const Matrix y = rng.gaussian_matrix(bands, rows * cols);
    const Vector theta =
        (rng.gaussian_matrix(r, 1).cwiseAbs() * 0.3).eval();
    const double q = 0.5, eps = 1e-3;

    const auto fc = [&](const Matrix& cc) {
      return objective(y, cc, s, rows, cols, theta, q, eps);
    };
    const Matrix gc = grad_c(y, c, s);
    worst_c = std::max(
        worst_c, (gc - oracle::finite_difference_gradient(fc, c)).norm() /
                     gc.norm());

    const auto fs = [&](const Matrix& ss) {
      return objective(y, c, ss, rows, cols, theta, q, eps);
    };
    const Matrix gs = grad_s(y, c, s, rows, cols, theta, q, eps);
    worst_s = std::max(
        worst_s, (gs - oracle::finite_difference_gradient(fs, s)).norm() /
                     gs.norm());
  }
  const double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  const bool pass = worst_c <= 1e-5 && worst_s <= 1e-5 && elapsed < 10.0;
  report(6, pass,
         "gradient oracle suite: worst rel err grad_c " + fmt(worst_c) +
             ", grad_s " + fmt(worst_s) + " (<= 1e-5) in " + fmt(elapsed) +
             "s (< 10s)");
}

void criterion_7() {
  // simplex vs exhaustive active-set oracle on the documented grid
  const std::vector<double> grid = {-1.0, 0.0, 0.3, 1.0, 3.0};
  double worst_simplex = 0.0;
  for (Index length = 1; length <= 6; ++length) {
    std::vector<std::size_t> digits(length, 0);
    while (true) {
      Vector v(length);
      for (Index i = 0; i < length; ++i) v(i) = grid[digits[i]];
      worst_simplex =
          std::max(worst_simplex, (project_simplex(v, 1.0) -
                                   oracle::simplex_projection(v, 1.0))
                                      .norm());
      Index pos = 0;
      while (pos < length) {
        if (++digits[pos] < grid.size()) break;
        digits[pos] = 0;
        ++pos;
      }
      if (pos == length) break;
    }
  }

  double worst_rank = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix m = oracle::random_matrix(9, 7, 700 + seed);
    const Vector sigma = Eigen::JacobiSVD<Matrix>(m).singularValues();
    for (Index rank : {1, 3, 6}) {
      const double err = (m - project_rank(m, rank)).squaredNorm();
      const double tail = sigma.tail(sigma.size() - rank).squaredNorm();
      worst_rank = std::max(worst_rank,
                            std::abs(err - tail) / std::max(1.0, tail));
    }
  }

  double worst_idem = 0.0, worst_expand = 0.0;
  SeededRng rng(707);
  for (int pair = 0; pair < 100; ++pair) {
    const Matrix a = rng.gaussian_matrix(6, 5);
    const Matrix b = rng.gaussian_matrix(6, 5);
    const double radius = 0.5 + 2.5 * rng.uniform();
    const Matrix pa = project_nuclear_ball(a, radius);
    const Matrix pb = project_nuclear_ball(b, radius);
    worst_idem = std::max(
        worst_idem, (project_nuclear_ball(pa, radius) - pa).norm() /
                        std::max(1.0, pa.norm()));
    worst_expand =
        std::max(worst_expand, (pa - pb).norm() - (a - b).norm());
  }

  const bool pass = worst_simplex <= 1e-10 && worst_rank <= 1e-10 &&
                    worst_idem <= 1e-10 && worst_expand <= 1e-12;
  report(7, pass,
         "projection oracle suite: simplex grid err " + fmt(worst_simplex) +
             ", rank tail err " + fmt(worst_rank) + ", nuclear idempotence " +
             fmt(worst_idem) + ", expansion slack " + fmt(worst_expand));
}

void criterion_8() {
  // The descent guarantee presumes the feasibility projection is solved
  // exactly. That holds in the nuclear-ball mode (interior ball, so the AP
  // reduces to the exact simplex projection) and is the gated check; the
  // exact-rank mode uses a nonconvex AP without that property, so its worst
  // observed rise is reported as a diagnostic only.
  std::vector<std::string> violations;
  std::vector<double> worst(2, 0.0);
  for (int m = 0; m < 2; ++m) {
    const bool exact_rank = m == 1;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto truth = generate_synthetic(20, 20, 20, 5, 3, 800 + seed);
      const HsiCube noisy = add_noise(truth.cube, 25.0, 900 + seed);
      SolverConfig config;
      config.mode = exact_rank ? FeasibilityMode::ExactRank(5)
                               : FeasibilityMode::NuclearBall(30.0);
      config.extrapolation = false;
      config.max_iters = 150;
      config.obj_tol = 1e-14;
      const auto [c0, s0] =
          random_init({20, 20, 20, 5, 30.0, 3}, config.mode, seed);
      const RunResult result = run(noisy, c0, s0, config);
      double previous = result.trace.initial_objective;
      for (const auto& rec : result.trace.records) {
        const double rise = (rec.objective - previous) / previous;
        worst[m] = std::max(worst[m], rise);
        if (!exact_rank && rise > 1e-10)
          violations.push_back("seed " + std::to_string(seed) + " iter " +
                               std::to_string(rec.iter));
        previous = rec.objective;
      }
    }
  }
  const bool pass = violations.empty();
  report(8, pass,
         "monotone descent, extrapolation off, 20 seeds at 20^3: worst "
         "relative rise nn " +
             fmt(worst[0]) + " (<= 1e-10, gated); lr " + fmt(worst[1]) +
             " (nonconvex AP, reported only)" +
             (pass ? "" : "; first violation " + violations.front()));
}

void criterion_9() {
  bool pass = true;
  try {
    const auto sat = check_identifiability({100, 100, 100, 25, 1.0, 5});
    const auto unsat = check_identifiability({100, 100, 100, 30, 1.0, 5});
    pass = sat.satisfied && sat.term_sum == 13 && sat.pixel_margin == 6875 &&
           !unsat.satisfied && unsat.term_sum == 11;
  } catch (const std::exception&) {
    pass = false;
  }
  report(9, pass,
         "identifiability arithmetic: satisfied at L=25, violated at L=30 "
         "for 100^3, R=5");
}

void criterion_10() {
  namespace fs = std::filesystem;
  bool pass = true;
  std::string detail;
  try {
    const auto truth = generate_synthetic(30, 30, 20, 6, 4, 1);
    const HsiCube noisy = add_noise(truth.cube, 25.0, 2);
    SolverConfig config;
    config.mode = FeasibilityMode::ExactRank(6);
    config.max_iters = 60;
    const auto dir = fs::temp_directory_path() / "ll1_acceptance_det";
    fs::create_directories(dir);

    auto emit = [&](const char* tag) {
      const auto [c0, s0] =
          random_init({30, 30, 20, 6, 1.0, 4}, config.mode, 77);
      const RunResult result = run(noisy, c0, s0, config);
      io::write_endmember_file(dir / (std::string("C_") + tag + ".ll1f"),
                               result.endmembers);
      io::write_abundance_file(dir / (std::string("S_") + tag + ".ll1f"),
                               result.abundances, 30, 30);
    };
    emit("a");
    emit("b");

    auto bytes = [&](const std::string& name) {
      std::ifstream in(dir / name, std::ios::binary);
      return std::vector<char>((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    };
    pass = bytes("C_a.ll1f") == bytes("C_b.ll1f") &&
           bytes("S_a.ll1f") == bytes("S_b.ll1f");
    detail = pass ? "byte-identical factor files across repeated runs"
                  : "factor files differ between identical runs";
    fs::remove_all(dir);
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  report(10, pass, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite: %u hardware threads\n",
              std::thread::hardware_concurrency());
  const auto start = std::chrono::steady_clock::now();

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();

  const double total = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  std::printf("%d criterion(s) failed; total %.1fs\n", failures, total);
  return failures == 0 ? 0 : 1;
}
