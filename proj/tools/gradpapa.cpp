// Command-line front end: synthetic data generation, decomposition, metric
// evaluation, and the identifiability check.
//
// Exit codes: 0 success, 1 informational negative (check), 2 usage or I/O
// error, 3 numerical abort.

#include "ll1/datagen.hpp"
#include "ll1/init.hpp"
#include "ll1/io.hpp"
#include "ll1/metrics.hpp"
#include "ll1/model.hpp"
#include "ll1/rng.hpp"
#include "ll1/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ll1;

namespace {

constexpr std::uint64_t kNoiseSeedOffset = 0x9E3779B97F4A7C15ULL;

fs::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("GRADPAPA_OUT_DIR")) return env;
  return ".";
}

void write_text_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

json matching_to_json(const std::vector<Index>& matching) {
  json out = json::array();
  for (Index m : matching) out.push_back(m);
  return out;
}

int cmd_synth(Index i, Index j, Index k, Index l, Index r,
              std::optional<double> snr, std::uint64_t seed,
              const std::string& out_flag) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);

  const SyntheticData data = generate_synthetic(i, j, k, l, r, seed);
  io::write_endmember_file(out_dir / "C.ll1f", data.endmembers);
  io::write_abundance_file(out_dir / "S.ll1f", data.abundances, i, j);
  io::write_cube(out_dir / "clean.ll1c", data.cube);

  const std::uint64_t noise_seed = seed ^ kNoiseSeedOffset;
  if (snr) {
    const HsiCube noisy = add_noise(data.cube, *snr, noise_seed);
    io::write_cube(out_dir / "noisy.ll1c", noisy);
  }

  json manifest;
  manifest["i"] = i;
  manifest["j"] = j;
  manifest["k"] = k;
  manifest["l"] = l;
  manifest["r"] = r;
  manifest["snr"] = snr ? json(*snr) : json(nullptr);
  manifest["seed"] = seed;
  manifest["noise_seed"] = noise_seed;
  manifest["rng"] = SeededRng::kAlgorithmId;
  manifest["files"] = {{"endmembers", "C.ll1f"},
                       {"abundances", "S.ll1f"},
                       {"clean", "clean.ll1c"}};
  if (snr) manifest["files"]["noisy"] = "noisy.ll1c";
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int cmd_decompose(const std::string& input, Index r,
                  const io::RunConfig& config, const std::string& trace_flag,
                  const std::string& out_flag, const std::string& init_c_path,
                  const std::string& init_s_path) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);

  const HsiCube cube = io::read_cube(input);
  const Index image_rows = cube.image_rows();
  const Index image_cols = cube.image_cols();

  const SolverConfig solver_config = io::make_solver_config(
      config, image_rows, image_cols, cube.bands(), r);

  // the sufficient condition is informational only
  if (solver_config.mode.is_exact_rank()) {
    const auto report = check_identifiability(
        {image_rows, image_cols, cube.bands(), solver_config.mode.rank, 1.0,
         r});
    if (!report.satisfied)
      std::cerr << "warning: identifiability condition not satisfied "
                << "(pixel margin " << report.pixel_margin << ", term margin "
                << report.term_margin << ")\n";
  }

  Matrix c0, s0;
  if (!init_c_path.empty() || !init_s_path.empty()) {
    if (init_c_path.empty() || init_s_path.empty())
      throw IoError("--init-c and --init-s must be given together");
    c0 = io::read_endmember_file(init_c_path).cwiseMax(0.0);
    const auto s_file = io::read_abundance_file(init_s_path);
    if (s_file.image_rows != image_rows || s_file.image_cols != image_cols)
      throw IoError("--init-s image dimensions do not match the cube");
    s0 = s_file.values;
    s0 = project_feasible_set(s0, solver_config.mode, image_rows, image_cols,
                              solver_config.ap_max_iters,
                              solver_config.ap_tol)
             .projected;
  } else {
    const InitSpec init = io::make_init_spec(config);
    if (init.kind == InitSpec::Kind::spa) {
      c0 = spa_endmembers(cube.matricized(), r);
      s0 = init_abundances(cube.matricized(), c0, solver_config.mode,
                           image_rows, image_cols,
                           solver_config.ap_max_iters, solver_config.ap_tol);
    } else {
      const ModelDims dims{image_rows,
                           image_cols,
                           cube.bands(),
                           solver_config.energy_rank,
                           solver_config.mode.is_exact_rank()
                               ? 1.0
                               : solver_config.mode.radius,
                           r};
      std::tie(c0, s0) = random_init(dims, solver_config.mode, init.seed);
    }
  }

  const RunResult result = run(cube, c0, s0, solver_config);

  io::write_endmember_file(out_dir / "C_hat.ll1f", result.endmembers);
  io::write_abundance_file(out_dir / "S_hat.ll1f", result.abundances,
                           image_rows, image_cols);
  const fs::path trace_path =
      trace_flag.empty() ? out_dir / "trace.csv" : fs::path(trace_flag);
  io::write_trace_csv(trace_path, result.trace);

  json manifest;
  manifest["input"] = input;
  manifest["r"] = r;
  manifest["mode"] = config.mode;
  manifest["iterations"] = result.trace.records.size();
  manifest["termination"] = to_string(result.trace.reason);
  manifest["initial_objective"] = result.trace.initial_objective;
  manifest["final_objective"] = result.trace.records.empty()
                                    ? result.trace.initial_objective
                                    : result.trace.records.back().objective;
  manifest["final_rel_fit"] = result.trace.records.empty()
                                  ? 0.0
                                  : result.trace.records.back().rel_fit;
  manifest["seed"] = config.seed;
  manifest["init"] = init_c_path.empty() ? config.init : "files";
  manifest["extrapolation"] = config.extrapolation;
  manifest["rng"] = SeededRng::kAlgorithmId;
  manifest["files"] = {{"endmembers", "C_hat.ll1f"},
                       {"abundances", "S_hat.ll1f"},
                       {"trace", trace_path.string()}};
  write_text_file(out_dir / "result.json", manifest.dump(2) + "\n");

  return result.trace.reason == TerminationReason::numerical_abort ? 3 : 0;
}

fs::path find_factor(const fs::path& dir, const char* preferred,
                     const char* fallback) {
  if (fs::exists(dir / preferred)) return dir / preferred;
  if (fs::exists(dir / fallback)) return dir / fallback;
  throw IoError("no " + std::string(preferred) + " or " + fallback + " in " +
                dir.string());
}

int cmd_eval(const std::string& est_dir, const std::string& truth_dir,
             double p, std::optional<Index> l_flag) {
  const fs::path est(est_dir), truth(truth_dir);
  const Matrix c_est =
      io::read_endmember_file(find_factor(est, "C_hat.ll1f", "C.ll1f"));
  const auto s_est =
      io::read_abundance_file(find_factor(est, "S_hat.ll1f", "S.ll1f"));
  const Matrix c_truth =
      io::read_endmember_file(find_factor(truth, "C.ll1f", "C_hat.ll1f"));
  const auto s_truth =
      io::read_abundance_file(find_factor(truth, "S.ll1f", "S_hat.ll1f"));

  if (c_est.rows() != c_truth.rows() || c_est.cols() != c_truth.cols() ||
      s_est.values.rows() != s_truth.values.rows() ||
      s_est.image_rows != s_truth.image_rows ||
      s_est.image_cols != s_truth.image_cols)
    throw IoError("estimate and truth dimensions do not match");

  Index l = 0;
  if (l_flag) {
    l = *l_flag;
  } else {
    const fs::path manifest_path = truth / "manifest.json";
    if (!fs::exists(manifest_path))
      throw IoError("--l not given and no manifest.json in " +
                    truth.string());
    std::ifstream in(manifest_path);
    json manifest;
    in >> manifest;
    if (!manifest.contains("l"))
      throw IoError("truth manifest has no \"l\" entry; pass --l");
    l = manifest["l"].get<Index>();
  }

  const auto mse_c = mse_factor(c_est, c_truth);
  const auto mse_s =
      mse_factor(s_est.values.transpose(), s_truth.values.transpose());

  const FeasibilityReport feasibility =
      feasibility_report(s_est.values, s_est.image_rows, s_est.image_cols,
                         l, p);
  json out;
  out["mse_c"] = mse_c.value;
  out["mse_s"] = mse_s.value;
  out["matching"] = matching_to_json(mse_c.matching);
  out["matching_s"] = matching_to_json(mse_s.matching);
  out["sto_percent"] = feasibility.sto_percent;
  out["lr_energy_percent"] = feasibility.lr_energy_percent;
  out["p"] = p;
  out["l"] = l;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_check(Index i, Index j, Index k, Index l, Index r) {
  const auto report = check_identifiability({i, j, k, l, 1.0, r});
  json out;
  out["satisfied"] = report.satisfied;
  out["pixel_margin"] = report.pixel_margin;
  out["term_sum"] = report.term_sum;
  out["term_margin"] = report.term_margin;
  std::cout << out.dump(2) << "\n";
  return report.satisfied ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured rank-(L,L,1) decomposition for linear-mixture "
               "hyperspectral unmixing"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cube");
  Index si = 0, sj = 0, sk = 0, sl = 0, sr = 0;
  std::uint64_t sseed = 0;
  double ssnr = 0.0;
  std::string sout;
  synth->add_option("--i", si, "Image rows I")->required();
  synth->add_option("--j", sj, "Image cols J")->required();
  synth->add_option("--k", sk, "Bands K")->required();
  synth->add_option("--l", sl, "Map rank L")->required();
  synth->add_option("--r", sr, "Endmembers R")->required();
  auto* snr_opt =
      synth->add_option("--snr", ssnr, "SNR in dB (omit for a clean cube)");
  synth->add_option("--seed", sseed, "RNG seed (default 0)");
  synth->add_option("--out", sout,
                    "Output directory (default $GRADPAPA_OUT_DIR or .)");

  // decompose
  auto* dec = app.add_subcommand("decompose", "Run the solver on a cube");
  std::string dinput, dconfig, dtrace, dout, dinit_c, dinit_s;
  Index dr = 0;
  std::string dmode;
  Index dl = 0;
  double dl_tilde = 0.0, dq = 0.0, deps = 0.0, dobj_tol = 0.0, dap_tol = 0.0;
  std::vector<double> dtheta;
  std::string dinit;
  std::uint64_t dseed = 0;
  int dmax_iters = 0, dap_max_iters = 0;
  bool dextrap = true;
  dec->add_option("--input", dinput, "Cube file")->required();
  dec->add_option("--r", dr, "Endmembers R")->required();
  dec->add_option("--config", dconfig, "JSON run configuration");
  dec->add_option("--trace", dtrace, "Trace CSV path (default OUT/trace.csv)");
  dec->add_option("--out", dout,
                  "Output directory (default $GRADPAPA_OUT_DIR or .)");
  dec->add_option("--mode", dmode, "Feasibility mode: lr or nn");
  auto* l_opt = dec->add_option("--l", dl, "Map rank L");
  auto* lt_opt = dec->add_option("--l-tilde", dl_tilde,
                                 "Nuclear radius (nn mode)");
  auto* theta_opt = dec->add_option(
      "--theta", dtheta, "TV weight, scalar or R values (default 0)");
  auto* q_opt = dec->add_option("--q", dq, "TV exponent in (0,1] (default 0.5)");
  auto* eps_opt =
      dec->add_option("--eps", deps, "TV smoothing > 0 (default 1e-3)");
  dec->add_option("--init", dinit,
                  "Initialization: spa or random (default spa)");
  auto* seed_opt = dec->add_option("--seed", dseed, "RNG seed (default 0)");
  auto* mi_opt = dec->add_option("--max-iters", dmax_iters,
                                 "Iteration cap (default 1200)");
  auto* ot_opt = dec->add_option(
      "--obj-tol", dobj_tol,
      "Relative objective-change tolerance (default 1e-5)");
  auto* ami_opt = dec->add_option("--ap-max-iters", dap_max_iters,
                                  "AP sweep cap (default 50)");
  auto* at_opt = dec->add_option("--ap-tol", dap_tol,
                                 "AP relative tolerance (default 1e-3)");
  auto* extrap_opt =
      dec->add_flag("--extrapolation,!--no-extrapolation", dextrap,
                    "Nesterov extrapolation (default on)");
  dec->add_option("--init-c", dinit_c, "Warm-start endmember factor file");
  dec->add_option("--init-s", dinit_s, "Warm-start abundance factor file");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare factors against a truth");
  std::string eest, etruth;
  double ep = 1e-5;
  Index el = 0;
  eval->add_option("--est", eest, "Directory with estimated factors")
      ->required();
  eval->add_option("--truth", etruth, "Directory with reference factors")
      ->required();
  eval->add_option("--p", ep, "Sum-to-one tolerance (default 1e-5)");
  auto* el_opt =
      eval->add_option("--l", el, "Rank for the energy metric "
                                  "(default: truth manifest)");

  // check
  auto* check = app.add_subcommand("check", "Identifiability condition");
  Index ci = 0, cj = 0, ck = 0, cl = 0, cr = 0;
  check->add_option("--i", ci, "Image rows I")->required();
  check->add_option("--j", cj, "Image cols J")->required();
  check->add_option("--k", ck, "Bands K")->required();
  check->add_option("--l", cl, "Map rank L")->required();
  check->add_option("--r", cr, "Endmembers R")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      std::optional<double> snr;
      if (snr_opt->count() > 0) snr = ssnr;
      return cmd_synth(si, sj, sk, sl, sr, snr, sseed, sout);
    }
    if (dec->parsed()) {
      io::RunConfig config;
      if (!dconfig.empty()) config = io::read_run_config(dconfig);
      if (!dmode.empty()) {
        if (dmode != "lr" && dmode != "nn")
          throw IoError("--mode must be lr or nn");
        config.mode = dmode;
      }
      if (l_opt->count() > 0) config.l = dl;
      if (lt_opt->count() > 0) config.l_tilde = dl_tilde;
      if (theta_opt->count() > 0) config.theta = dtheta;
      if (q_opt->count() > 0) config.q = dq;
      if (eps_opt->count() > 0) config.eps = deps;
      if (!dinit.empty()) {
        if (dinit != "spa" && dinit != "random")
          throw IoError("--init must be spa or random");
        config.init = dinit;
      }
      if (seed_opt->count() > 0) config.seed = dseed;
      if (mi_opt->count() > 0) config.max_iters = dmax_iters;
      if (ot_opt->count() > 0) config.obj_tol = dobj_tol;
      if (ami_opt->count() > 0) config.ap_max_iters = dap_max_iters;
      if (at_opt->count() > 0) config.ap_tol = dap_tol;
      if (extrap_opt->count() > 0) config.extrapolation = dextrap;
      return cmd_decompose(dinput, dr, config, dtrace, dout, dinit_c,
                           dinit_s);
    }
    if (eval->parsed()) {
      std::optional<Index> l;
      if (el_opt->count() > 0) l = el;
      return cmd_eval(eest, etruth, ep, l);
    }
    if (check->parsed()) return cmd_check(ci, cj, ck, cl, cr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
