#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stable_inv/ancf.hpp"
#include "stable_inv/bvp.hpp"
#include "stable_inv/forward_sim.hpp"
#include "stable_inv/trajectory.hpp"
#include "stable_inv/two_link.hpp"

namespace stable_inv::experiments {

struct TrajectoryConfig {
  double z0_deg = 0.0;
  double zf_deg = 30.0;
  double t0 = 0.0;
  double tf = 1.0;

  SmoothTransition make() const;
};

struct TwoLinkConfig {
  two_link::TwoLinkParams params;
  TrajectoryConfig trajectory;
  double h = 0.005;
  double dT = 0.5;
  /// Approximated-BC selectors on eta = (beta, beta_dot).
  std::vector<int> approx_T0{0};
  std::vector<int> approx_Tf{0};
  /// Approximated-BC selectors of the servo DAE, x = [alpha beta alpha_dot beta_dot u].
  std::vector<int> dae_T0{1, 2};
  std::vector<int> dae_Tf{1, 4};
  std::vector<double> sweep{0.0, 0.1, 0.25, 0.5};
  double h_sim = 1e-3;
};

struct AncfConfig {
  ancf::AncfMaterial material;
  ancf::AncfGeometry geometry;  // inversion model, 4 elements by default
  int validation_elements = 10;
  TrajectoryConfig trajectory;
  double h = 0.01;
  double dT = 0.5;
  double h_sim = 1e-3;
  double stiff_E = 1.2e9;
  /// Component indices of [y v lambda u]; empty means the default split.
  std::optional<std::vector<int>> at_T0;
  std::optional<std::vector<int>> at_Tf;
  int shape_frames = 9;
};

enum class Kind { two_link, ancf, convergence };

struct ExperimentConfig {
  Kind kind = Kind::two_link;
  TwoLinkConfig two_link;
  AncfConfig ancf;
};

/// Parses a JSON document; absent keys keep the defaults. Throws ConfigError
/// for malformed JSON, unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const std::string& json_text, Kind kind);
ExperimentConfig load_config(const std::string& path, Kind kind);

/// Worker cap: STABLE_INV_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. The
/// first exception thrown by any task is rethrown after all workers finish.
void parallel_for(int count, const std::function<void(int)>& body);

// ---------------------------------------------------------------- two-link

struct InputTrace {
  std::vector<double> t;
  std::vector<double> u;
};

/// Preactuation measures of an input over [T0, t0).
struct Preactuation {
  double integral = 0.0;   // trapezoidal integral of |u| over [T0, t0]
  double max_before = 0.0;
  double max_overall = 0.0;
  double ratio() const { return max_overall > 0.0 ? max_before / max_overall : 0.0; }
};

Preactuation measure_preactuation(const InputTrace& in, double t0);

struct TwoLinkStudy {
  double dT = 0.0;
  Mesh mesh;
  BvpSolution original;
  BvpSolution approximated;
  InputTrace u_original;
  InputTrace u_approximated;
  double max_input_deviation = 0.0;
  SolutionComparison comparison;  // on eta, approximated vs original
  double seconds = 0.0;
};

/// Original and approximated internal-dynamics BVPs for one window width.
TwoLinkStudy solve_two_link_study(const TwoLinkConfig& config, double dT);

/// Torque recovered at the nodes of an internal-dynamics solution.
InputTrace two_link_input(const TwoLinkConfig& config, const BvpSolution& sol);

struct ConvergenceRun {
  two_link::ZeroDynamicsEigen eigen;
  std::vector<TwoLinkStudy> sweep;  // in the order of config.sweep
  double seconds = 0.0;
};

struct TwoLinkRun {
  two_link::ZeroDynamicsEigen eigen;
  TwoLinkStudy study;
  BvpSolution dae;                 // servo DAE with approximated BCs
  InputTrace u_dae;
  double dae_input_deviation = 0.0;
  SimulationResult closure;        // plant driven by the approximated input
  double closure_error = 0.0;      // max |z - z_d| (rad)
  double unstable_alignment_deg = 0.0;
  Preactuation preactuation;
  ConvergenceRun convergence;
  double seconds = 0.0;
};

/// Full study at config.dT plus the Delta-T sweep.
TwoLinkRun run_two_link(const TwoLinkConfig& config);

/// Delta-T sweep; members run on the worker pool.
ConvergenceRun run_convergence(const TwoLinkConfig& config);

// -------------------------------------------------------------------- ANCF

/// 27 positions (all but e1, e2 and the tip y coordinate) at both ends, plus
/// {v1, v2, u} at T0 and {lambda1, lambda2, lambda3} at Tf.
void default_ancf_selection(int elements, std::vector<int>& at_T0, std::vector<int>& at_Tf);

/// Coordinates neither pinned nor actuated: n - n_c.
int unactuated_coordinates(const ancf::AncfGeometry& geometry);

struct AncfRun {
  BvpSolution inversion;
  InputTrace u_ffw;
  InputTrace u_rigid;
  SimulationResult sim_ffw;    // validation model
  SimulationResult sim_rigid;
  double max_error_ffw = 0.0;  // max |z - z_d| (rad) over the window
  double max_error_rigid = 0.0;
  double post_error_rigid = 0.0;  // t > tf
  double post_error_ffw = 0.0;
  double servo_residual = 0.0;       // max |h(y_k) - z_d(t_k)|
  double constraint_residual = 0.0;  // max |c| at the nodes
  int unactuated = 0;
  Preactuation preactuation;
  double seconds_inversion = 0.0;
  double seconds = 0.0;
};

AncfRun run_ancf(const AncfConfig& config);

// --------------------------------------------------------------- artifacts

struct ArtifactSet {
  std::string kind;  // "two-link", "ancf", "convergence" or empty
  std::string directory;
  std::vector<std::string> files;  // CSV files relative to the directory
};

/// Fixed 17-significant-digit CSV with a header row.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

ArtifactSet write_two_link_artifacts(const TwoLinkConfig& config, const TwoLinkRun& run,
                                     const std::string& directory);
ArtifactSet write_convergence_artifacts(const TwoLinkConfig& config, const ConvergenceRun& run,
                                        const std::string& directory);
ArtifactSet write_ancf_artifacts(const AncfConfig& config, const AncfRun& run,
                                 const std::string& directory);

/// Gnuplot scripts reading the CSV files of the set; returns the script paths.
std::vector<std::string> emit_plot_scripts(const ArtifactSet& artifacts);

}  // namespace stable_inv::experiments
