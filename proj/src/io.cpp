#include "ll1/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <system_error>

namespace ll1::io {

namespace {

using nlohmann::json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int b = 0; b < 4; ++b)
    out.push_back(static_cast<std::uint8_t>((value >> (8 * b)) & 0xFF));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
  for (int b = 0; b < 8; ++b)
    out.push_back(static_cast<std::uint8_t>((value >> (8 * b)) & 0xFF));
}

void put_f64(std::vector<std::uint8_t>& out, double value) {
  put_u64(out, std::bit_cast<std::uint64_t>(value));
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  void expect_magic(const char* magic) {
    if (bytes_.size() < pos_ + 4 ||
        std::memcmp(bytes_.data() + pos_, magic, 4) != 0)
      throw IoError(name_ + ": bad magic");
    pos_ += 4;
  }

  std::uint32_t u32() {
    require(4);
    std::uint32_t value = 0;
    for (int b = 0; b < 4; ++b)
      value |= static_cast<std::uint32_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return value;
  }

  std::uint64_t u64() {
    require(8);
    std::uint64_t value = 0;
    for (int b = 0; b < 8; ++b)
      value |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 8;
    return value;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  void expect_payload(std::size_t doubles) {
    if (bytes_.size() - pos_ != doubles * 8)
      throw IoError(name_ + ": payload size mismatch");
  }

 private:
  void require(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw IoError(name_ + ": truncated file");
  }

  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

// write-temp-then-rename so partially written files never shadow good ones
void write_all(const std::filesystem::path& path,
               const std::vector<std::uint8_t>& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed for " + path.string());
}

Index checked_index(std::uint64_t value, const std::string& what) {
  if (value == 0 || value > (1ULL << 31))
    throw IoError(what + " out of range");
  return static_cast<Index>(value);
}

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_cube(const std::filesystem::path& path, const HsiCube& cube) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(32 + 8 * static_cast<std::size_t>(cube.matricized().size()));
  bytes.insert(bytes.end(), {'L', 'L', '1', 'C'});
  put_u32(bytes, kFormatVersion);
  put_u64(bytes, static_cast<std::uint64_t>(cube.image_rows()));
  put_u64(bytes, static_cast<std::uint64_t>(cube.image_cols()));
  put_u64(bytes, static_cast<std::uint64_t>(cube.bands()));
  const Matrix& y = cube.matricized();
  for (Index k = 0; k < y.rows(); ++k)
    for (Index l = 0; l < y.cols(); ++l) put_f64(bytes, y(k, l));
  write_all(path, bytes);
}

HsiCube read_cube(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  Reader reader(bytes, path.string());
  reader.expect_magic("LL1C");
  if (reader.u32() != kFormatVersion)
    throw IoError(path.string() + ": unsupported format version");
  const Index image_rows = checked_index(reader.u64(), "cube I");
  const Index image_cols = checked_index(reader.u64(), "cube J");
  const Index bands = checked_index(reader.u64(), "cube K");
  const std::size_t count = static_cast<std::size_t>(image_rows) *
                            static_cast<std::size_t>(image_cols) *
                            static_cast<std::size_t>(bands);
  reader.expect_payload(count);
  Matrix y(bands, image_rows * image_cols);
  for (Index k = 0; k < bands; ++k)
    for (Index l = 0; l < y.cols(); ++l) y(k, l) = reader.f64();
  try {
    return HsiCube(image_rows, image_cols, std::move(y));
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

namespace {

void write_factor(const std::filesystem::path& path, std::uint32_t kind,
                  const std::vector<std::uint64_t>& dims, const Matrix& m) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(64 + 8 * static_cast<std::size_t>(m.size()));
  bytes.insert(bytes.end(), {'L', 'L', '1', 'F'});
  put_u32(bytes, kFormatVersion);
  put_u32(bytes, kind);
  for (std::uint64_t d : dims) put_u64(bytes, d);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) put_f64(bytes, m(i, j));
  write_all(path, bytes);
}

}  // namespace

void write_endmember_file(const std::filesystem::path& path, const Matrix& c) {
  write_factor(path, 1,
               {static_cast<std::uint64_t>(c.rows()),
                static_cast<std::uint64_t>(c.cols())},
               c);
}

Matrix read_endmember_file(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  Reader reader(bytes, path.string());
  reader.expect_magic("LL1F");
  if (reader.u32() != kFormatVersion)
    throw IoError(path.string() + ": unsupported format version");
  if (reader.u32() != 1)
    throw IoError(path.string() + ": not an endmember factor file");
  const Index bands = checked_index(reader.u64(), "factor K");
  const Index endmembers = checked_index(reader.u64(), "factor R");
  reader.expect_payload(static_cast<std::size_t>(bands) *
                        static_cast<std::size_t>(endmembers));
  Matrix c(bands, endmembers);
  for (Index i = 0; i < bands; ++i)
    for (Index j = 0; j < endmembers; ++j) c(i, j) = reader.f64();
  return c;
}

void write_abundance_file(const std::filesystem::path& path, const Matrix& s,
                          Index image_rows, Index image_cols) {
  if (s.cols() != image_rows * image_cols)
    throw ShapeError("write_abundance_file: matrix must have I*J columns");
  write_factor(path, 2,
               {static_cast<std::uint64_t>(s.rows()),
                static_cast<std::uint64_t>(image_rows),
                static_cast<std::uint64_t>(image_cols)},
               s);
}

AbundanceData read_abundance_file(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  Reader reader(bytes, path.string());
  reader.expect_magic("LL1F");
  if (reader.u32() != kFormatVersion)
    throw IoError(path.string() + ": unsupported format version");
  if (reader.u32() != 2)
    throw IoError(path.string() + ": not an abundance factor file");
  AbundanceData data;
  const Index endmembers = checked_index(reader.u64(), "factor R");
  data.image_rows = checked_index(reader.u64(), "factor I");
  data.image_cols = checked_index(reader.u64(), "factor J");
  const Index pixels = data.image_rows * data.image_cols;
  reader.expect_payload(static_cast<std::size_t>(endmembers) *
                        static_cast<std::size_t>(pixels));
  data.values.resize(endmembers, pixels);
  for (Index i = 0; i < endmembers; ++i)
    for (Index j = 0; j < pixels; ++j) data.values(i, j) = reader.f64();
  return data;
}

RunConfig parse_run_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("config: expected a JSON object");

  static const std::set<std::string> known = {
      "mode",     "l",        "l_tilde",      "theta",
      "q",        "eps",      "init",         "seed",
      "max_iters", "obj_tol", "ap_max_iters", "ap_tol",
      "extrapolation"};
  for (const auto& item : doc.items())
    if (!known.contains(item.key()))
      throw IoError("config: unknown key '" + item.key() + "'");

  RunConfig config;
  try {
    if (doc.contains("mode")) config.mode = doc["mode"].get<std::string>();
    if (config.mode != "lr" && config.mode != "nn")
      throw IoError("config: mode must be \"lr\" or \"nn\"");
    if (doc.contains("l")) {
      const auto l = doc["l"].get<std::int64_t>();
      if (l < 1) throw IoError("config: l must be >= 1");
      config.l = static_cast<Index>(l);
    }
    if (doc.contains("l_tilde")) {
      config.l_tilde = doc["l_tilde"].get<double>();
      if (*config.l_tilde <= 0.0)
        throw IoError("config: l_tilde must be positive");
    }
    if (doc.contains("theta")) {
      const auto& theta = doc["theta"];
      config.theta.clear();
      if (theta.is_array())
        for (const auto& t : theta) config.theta.push_back(t.get<double>());
      else
        config.theta.push_back(theta.get<double>());
      for (double t : config.theta)
        if (t < 0.0) throw IoError("config: theta must be nonnegative");
    }
    if (doc.contains("q")) config.q = doc["q"].get<double>();
    if (doc.contains("eps")) config.eps = doc["eps"].get<double>();
    if (doc.contains("init")) config.init = doc["init"].get<std::string>();
    if (config.init != "spa" && config.init != "random")
      throw IoError("config: init must be \"spa\" or \"random\"");
    if (doc.contains("seed"))
      config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("max_iters"))
      config.max_iters = doc["max_iters"].get<int>();
    if (doc.contains("obj_tol")) config.obj_tol = doc["obj_tol"].get<double>();
    if (doc.contains("ap_max_iters"))
      config.ap_max_iters = doc["ap_max_iters"].get<int>();
    if (doc.contains("ap_tol")) config.ap_tol = doc["ap_tol"].get<double>();
    if (doc.contains("extrapolation"))
      config.extrapolation = doc["extrapolation"].get<bool>();
  } catch (const json::exception& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  return config;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_run_config_text(text);
}

SolverConfig make_solver_config(const RunConfig& config, Index image_rows,
                                Index image_cols, Index bands,
                                Index endmembers) {
  SolverConfig solver;
  const Index min_ij = std::min(image_rows, image_cols);
  if (config.mode == "lr") {
    if (!config.l) throw IoError("config: mode \"lr\" requires l");
    if (*config.l > min_ij) throw IoError("config: l exceeds min(I, J)");
    solver.mode = FeasibilityMode::ExactRank(*config.l);
    solver.energy_rank = *config.l;
  } else {
    const double radius = config.l_tilde.value_or(
        1.5 * static_cast<double>(std::max({image_rows, image_cols, bands})));
    solver.mode = FeasibilityMode::NuclearBall(radius);
    solver.energy_rank = config.l.value_or(min_ij);
    if (solver.energy_rank > min_ij)
      throw IoError("config: l exceeds min(I, J)");
  }
  if (config.theta.size() == 1) {
    solver.theta = Vector::Constant(endmembers, config.theta[0]);
  } else {
    if (static_cast<Index>(config.theta.size()) != endmembers)
      throw IoError("config: theta must be scalar or have R entries");
    solver.theta =
        Eigen::Map<const Vector>(config.theta.data(), endmembers);
  }
  solver.q = config.q;
  solver.eps = config.eps;
  solver.max_iters = config.max_iters;
  solver.obj_tol = config.obj_tol;
  solver.ap_max_iters = config.ap_max_iters;
  solver.ap_tol = config.ap_tol;
  solver.extrapolation = config.extrapolation;
  solver.seed = config.seed;
  return solver;
}

InitSpec make_init_spec(const RunConfig& config) {
  InitSpec spec;
  spec.kind =
      config.init == "spa" ? InitSpec::Kind::spa : InitSpec::Kind::random;
  spec.seed = config.seed;
  return spec;
}

void write_trace_csv(const std::filesystem::path& path,
                     const RunTrace& trace) {
  std::string text =
      "iter,time_s,objective,rel_fit,alpha,beta,ap_iters,"
      "sto_violation_max,lr_energy_avg,delta_c,delta_s\n";
  for (const auto& rec : trace.records) {
    text += std::to_string(rec.iter);
    text += ',';
    text += format_double(rec.time_s);
    text += ',';
    text += format_double(rec.objective);
    text += ',';
    text += format_double(rec.rel_fit);
    text += ',';
    text += format_double(rec.alpha);
    text += ',';
    text += format_double(rec.beta);
    text += ',';
    text += std::to_string(rec.ap_iters);
    text += ',';
    text += format_double(rec.sto_violation_max);
    text += ',';
    text += format_double(rec.lr_energy_avg);
    text += ',';
    text += format_double(rec.delta_c);
    text += ',';
    text += format_double(rec.delta_s);
    text += '\n';
  }
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  write_all(path, bytes);
}

}  // namespace ll1::io
