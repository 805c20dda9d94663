#pragma once

#include "ll1/init.hpp"
#include "ll1/solver.hpp"
#include "ll1/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ll1::io {

// Binary containers, little-endian regardless of host.
//
// Cube file ("LL1C"):
//   bytes 0..3   magic "LL1C"
//   u32          format version (1)
//   u64 u64 u64  I, J, K
//   f64 * IJK    payload, index = k*(I*J) + l with l = i + j*I
//
// Factor file ("LL1F"):
//   bytes 0..3   magic "LL1F"
//   u32          format version (1)
//   u32          kind: 1 endmembers (K x R), 2 abundances (R x IJ)
//   kind 1: u64 K, u64 R,       payload row-major K x R
//   kind 2: u64 R, u64 I, u64 J, payload row-major R x IJ
//
// All writes go to a temporary file renamed into place.

inline constexpr std::uint32_t kFormatVersion = 1;

void write_cube(const std::filesystem::path& path, const HsiCube& cube);
HsiCube read_cube(const std::filesystem::path& path);

void write_endmember_file(const std::filesystem::path& path, const Matrix& c);
Matrix read_endmember_file(const std::filesystem::path& path);

struct AbundanceData {
  Matrix values;  // R x IJ
  Index image_rows = 0;
  Index image_cols = 0;
};

void write_abundance_file(const std::filesystem::path& path, const Matrix& s,
                          Index image_rows, Index image_cols);
AbundanceData read_abundance_file(const std::filesystem::path& path);

// Mirrors the JSON run-configuration document. Unknown keys are rejected.
struct RunConfig {
  std::string mode = "lr";          // "lr" | "nn"
  std::optional<Index> l;
  std::optional<double> l_tilde;
  std::vector<double> theta = {0.0};  // scalar or one value per endmember
  double q = 0.5;
  double eps = 1e-3;
  std::string init = "spa";         // "spa" | "random"
  std::uint64_t seed = 0;
  int max_iters = 1200;
  double obj_tol = 1e-5;
  int ap_max_iters = 50;
  double ap_tol = 1e-3;
  bool extrapolation = true;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig read_run_config(const std::filesystem::path& path);

// Resolves the textual config against concrete dimensions: picks the
// feasibility mode (l_tilde defaults to 1.5*max(I,J,K) for "nn"), broadcasts
// theta to R entries, and fills the trace energy rank.
SolverConfig make_solver_config(const RunConfig& config, Index image_rows,
                                Index image_cols, Index bands,
                                Index endmembers);

InitSpec make_init_spec(const RunConfig& config);

// CSV with header iter,time_s,objective,rel_fit,alpha,beta,ap_iters,
// sto_violation_max,lr_energy_avg,delta_c,delta_s; locale-independent
// shortest round-trip number formatting.
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);

}  // namespace ll1::io
