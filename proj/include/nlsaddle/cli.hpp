#pragma once

#include "nlsaddle/evaluate.hpp"
#include "nlsaddle/problems.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsaddle {

/// Configuration parse or validation failure; the message names the line when known.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

enum class SolverKind
{
  NlExact,
  NlLinearised,
  NlInterpolated,
  GaussNewton,
};

std::string to_string(SolverKind s);
SolverKind parse_solver(std::string const &s);

/// Flat run configuration: the experiment specs plus solver selection.
/// Text form: one "key = value" per line, '#' starts a comment.
struct RunConfig
{
  ExperimentSpec experiment;
  DtiSpec dti;
  SolverKind solver = SolverKind::NlExact;
  double tau0 = 0.5;
  double sigma0 = 1.9;
  double omega = 1.0;
  double rho = 1e-4;
  double rho2 = 1e-3;
  int max_iters = 100000;
  int max_outer = 100;
  int max_inner = 100000;
  int telemetry_every = 50;
  std::string out_dir = "run";
  std::string data;  // optional k-space file (NLSD); generated when empty
  std::string mask;  // optional PBM mask; generated when empty
  std::string bvectors; // optional DTI gradient file; spiral directions when empty

  /// Sets one key from its text value; throws ConfigError for unknown keys or bad values.
  void set(std::string const &key, std::string const &value);
  std::string get(std::string const &key) const;
  static std::vector<std::string> const &keys();

  /// Parses "key = value" lines on top of the defaults.
  static RunConfig parse(std::string const &text, std::string const &source = "<config>");
  static RunConfig load(std::filesystem::path const &path);
  /// Applies "key=value" overrides.
  void apply_overrides(std::vector<std::string> const &overrides);
  std::string serialise() const;

  SolverConfig solver_config() const;
  GNConfig gn_config() const;
  void validate() const;
};

/// Ground truth, mask and data of one velocity experiment.
struct VelocityData
{
  SamplingMask mask;
  Field f;
  VelocityPhantom truth;
  std::string hash;
};

/// Mask seeded by spec.seed, noise by spec.seed + 1; `mask_path`/`data_path`
/// load those parts from files instead.
VelocityData make_velocity_data(ExperimentSpec const &spec, std::string const &mask_path = {},
                                std::string const &data_path = {});

struct RunReport
{
  Status status = Status::IterCap;
  StackedVector x;
  StackedVector y;
  int iterations = 0;     // NL-PDHGM iterations or cumulative GN inner iterations
  int gn_outer = -1;      // −1 for NL-PDHGM
  double wall_s = 0.0;
  double psnr_r = 0.0;
  double psnr_phi = 0.0;
  double residual = 0.0;  // ‖f − T(x)‖
  ResidualReport optimality;
  std::vector<IterationRecord> records;
  std::vector<GNRecord> gn_records;
  Summary summary;
};

/// Builds the velocity problem, runs the configured solver from the
/// backprojection and evaluates the result; writes artefacts when out_dir is set.
RunReport solve_velocity(RunConfig const &cfg, VelocityData const &data,
                         std::optional<std::filesystem::path> const &out_dir = std::nullopt);

/// Backprojection PSNRs (r, φ ring) of the data.
std::pair<double, double> backprojection_psnr(RunConfig const &cfg, VelocityData const &data);

/// Regularisation weights for sweep value α: α_r = α, α_φ and β_φ scaled by α/α_r.
ExperimentSpec with_alpha(ExperimentSpec spec, double alpha);

struct DtiReport
{
  Status status = Status::IterCap;
  int iterations = 0;
  double wall_s = 0.0;
  double psnr_input = 0.0;
  double psnr_output = 0.0;
  double data_norm = 0.0; // ‖signals‖
  ResidualReport optimality;
  Summary summary;
  std::vector<IterationRecord> records;
};

DtiReport run_dti_demo(RunConfig const &cfg, std::optional<std::filesystem::path> const &out_dir = std::nullopt);

/// 0 converged, 2 iteration cap, 3 diverged.
int exit_code(Status s);

/// Sweep concurrency from NLSADDLE_THREADS (default 1).
int thread_budget();

// Subcommands; each returns the process exit code.
int cmd_phantom(int n, std::filesystem::path const &out);
int cmd_mask(RunConfig const &cfg);
int cmd_simulate(RunConfig const &cfg);
int cmd_solve(RunConfig const &cfg);
int cmd_sweep(RunConfig const &cfg, std::vector<double> alphas);
int cmd_compare(RunConfig const &cfg);
int cmd_dti_demo(RunConfig const &cfg);

} // namespace nlsaddle
