#include "stable_inv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stable_inv/errors.hpp"
#include "stable_inv/inverse_dae.hpp"

namespace stable_inv::experiments {

namespace {

using json = nlohmann::json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

// Reads keys of one JSON object into typed fields and rejects unknown keys.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      target = node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  void read_optional(const std::string& key, std::optional<std::vector<int>>& target) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) return;
    std::vector<int> v;
    read(key, v);
    target = v;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_.contains(key) ? node_.at(key) : empty(), path_ + "." + key);
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_trajectory(Section s, TrajectoryConfig& t) {
  s.read("z0_deg", t.z0_deg);
  s.read("zf_deg", t.zf_deg);
  s.read("t0", t.t0);
  s.read("tf", t.tf);
  s.finish();
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::two_link: return "two-link";
    case Kind::ancf: return "ancf";
    case Kind::convergence: return "convergence";
  }
  return "";
}

void require_config(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool on_grid(double span, double h) {
  const double k = span / h;
  return std::abs(k - std::round(k)) < 1e-9 * std::max(1.0, k);
}

void validate_two_link(const TwoLinkConfig& c) {
  try {
    c.params.validate();
    (void)c.trajectory.make();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  require_config(c.h > 0 && c.dT >= 0, "two-link: h must be positive and dT non-negative");
  require_config(c.h_sim > 0, "two-link: h_sim must be positive");
  require_config(on_grid(c.trajectory.tf - c.trajectory.t0 + 2 * c.dT, c.h),
                 "two-link: window is not a multiple of h");
  require_config(!c.sweep.empty(), "two-link: sweep is empty");
  for (double d : c.sweep) {
    require_config(d >= 0 && on_grid(c.trajectory.tf - c.trajectory.t0 + 2 * d, c.h),
                   "two-link: sweep entry is negative or off the mesh");
  }
  auto check = [](const std::vector<int>& sel, int dim, const char* what) {
    for (int i : sel) require_config(i >= 0 && i < dim, std::string(what) + ": index out of range");
  };
  check(c.approx_T0, 2, "two-link.bc.approx_T0");
  check(c.approx_Tf, 2, "two-link.bc.approx_Tf");
  check(c.dae_T0, 5, "two-link.bc.dae_T0");
  check(c.dae_Tf, 5, "two-link.bc.dae_Tf");
  require_config(c.approx_T0.size() + c.approx_Tf.size() == 2,
                 "two-link: approximated ODE selection needs 2 rows in total");
  require_config(c.dae_T0.size() + c.dae_Tf.size() == 4,
                 "two-link: approximated DAE selection needs 4 rows in total");
}

void validate_ancf(const AncfConfig& c) {
  try {
    c.material.validate();
    c.geometry.validate();
    (void)c.trajectory.make();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  require_config(c.validation_elements >= 1, "ancf: validation_elements must be positive");
  require_config(c.h > 0 && c.dT >= 0 && c.h_sim > 0, "ancf: step sizes must be positive");
  require_config(on_grid(c.trajectory.tf - c.trajectory.t0 + 2 * c.dT, c.h),
                 "ancf: window is not a multiple of h");
  require_config(on_grid(c.h / 2, c.h_sim), "ancf: h_sim must divide h/2");
  require_config(c.stiff_E > 0, "ancf: stiff_E must be positive");
  require_config(c.shape_frames >= 0, "ancf: shape_frames must be non-negative");
  require_config(c.at_T0.has_value() == c.at_Tf.has_value(),
                 "ancf: give both at_T0 and at_Tf or neither");
  if (c.at_T0) {
    const int size = 2 * c.geometry.coordinates() + 4;
    for (int i : *c.at_T0) require_config(i >= 0 && i < size, "ancf.bc.at_T0: index out of range");
    for (int i : *c.at_Tf) require_config(i >= 0 && i < size, "ancf.bc.at_Tf: index out of range");
    require_config(static_cast<int>(c.at_T0->size() + c.at_Tf->size()) ==
                       2 * c.geometry.coordinates(),
                   "ancf: boundary selection must have 2n rows in total");
  }
}

}  // namespace

SmoothTransition TrajectoryConfig::make() const {
  return SmoothTransition(deg_to_rad(z0_deg), deg_to_rad(zf_deg), t0, tf);
}

ExperimentConfig parse_config(const std::string& json_text, Kind kind) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.kind = kind;
  Section root(doc, "config");
  if (root.has("experiment")) {
    std::string name;
    root.read("experiment", name);
    require_config(name == kind_name(kind),
                   "config.experiment is '" + name + "' but the command is '" + kind_name(kind) + "'");
  }
  {
    Section s = root.child("two_link");
    TwoLinkConfig& c = cfg.two_link;
    s.read("L1", c.params.L1);
    s.read("L2", c.params.L2);
    s.read("m1", c.params.m1);
    s.read("m2", c.params.m2);
    s.read("k", c.params.k);
    s.read("d", c.params.d);
    s.read("h", c.h);
    s.read("dT", c.dT);
    s.read("h_sim", c.h_sim);
    s.read("sweep", c.sweep);
    read_trajectory(s.child("trajectory"), c.trajectory);
    Section bc = s.child("bc");
    bc.read("approx_T0", c.approx_T0);
    bc.read("approx_Tf", c.approx_Tf);
    bc.read("dae_T0", c.dae_T0);
    bc.read("dae_Tf", c.dae_Tf);
    bc.finish();
    s.finish();
  }
  {
    Section s = root.child("ancf");
    AncfConfig& c = cfg.ancf;
    s.read("rho", c.material.rho);
    s.read("E", c.material.E);
    s.read("nu", c.material.nu);
    s.read("length", c.geometry.length);
    s.read("area", c.geometry.area);
    s.read("elements", c.geometry.elements);
    s.read("validation_elements", c.validation_elements);
    s.read("h", c.h);
    s.read("dT", c.dT);
    s.read("h_sim", c.h_sim);
    s.read("stiff_E", c.stiff_E);
    s.read("shape_frames", c.shape_frames);
    read_trajectory(s.child("trajectory"), c.trajectory);
    Section bc = s.child("bc");
    bc.read_optional("at_T0", c.at_T0);
    bc.read_optional("at_Tf", c.at_Tf);
    bc.finish();
    s.finish();
  }
  root.finish();
  if (kind == Kind::ancf) {
    validate_ancf(cfg.ancf);
  } else {
    validate_two_link(cfg.two_link);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, Kind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind);
}

int worker_count() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("STABLE_INV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<int>(v);
  }
  return cap;
}

void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

Preactuation measure_preactuation(const InputTrace& in, double t0) {
  Preactuation p;
  for (std::size_t k = 0; k < in.t.size(); ++k) {
    p.max_overall = std::max(p.max_overall, std::abs(in.u[k]));
    if (in.t[k] < t0) p.max_before = std::max(p.max_before, std::abs(in.u[k]));
    if (k + 1 < in.t.size() && in.t[k + 1] <= t0 + 1e-12) {
      p.integral += 0.5 * (in.t[k + 1] - in.t[k]) * (std::abs(in.u[k]) + std::abs(in.u[k + 1]));
    }
  }
  return p;
}

// ---------------------------------------------------------------- two-link

InputTrace two_link_input(const TwoLinkConfig& config, const BvpSolution& sol) {
  const SmoothTransition traj = config.trajectory.make();
  InputTrace out;
  out.t = sol.t;
  out.u.resize(sol.t.size());
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    const double t = sol.t[k];
    const two_link::InternalState eta(sol.nodes(static_cast<int>(k), 0),
                                      sol.nodes(static_cast<int>(k), 1));
    out.u[k] = two_link::reconstruct_input(config.params, traj.eval(t, 0), traj.eval(t, 1),
                                           traj.eval(t, 2), eta)
                   .u;
  }
  return out;
}

TwoLinkStudy solve_two_link_study(const TwoLinkConfig& config, double dT) {
  const auto start = clock_type::now();
  const SmoothTransition traj = config.trajectory.make();
  const two_link::InternalDynamicsOde ode(config.params, traj);
  const two_link::ZeroDynamicsEigen eig = two_link::zero_dynamics_eigen(config.params);
  TwoLinkStudy s;
  s.dT = dT;
  s.mesh = Mesh::symmetric(traj.t0(), traj.tf(), dT, config.h);
  const Vector zero = Vector::Zero(2);
  const HermiteSimpson orig(ode, s.mesh, assemble_bc_original(eig.B_s_ode, eig.B_u_ode, zero, zero));
  const HermiteSimpson approx(
      ode, s.mesh, assemble_bc_approx(config.approx_T0, config.approx_Tf, zero, zero));
  const auto guess = [](double) { return Vector(Vector::Zero(2)); };
  s.original = solve_bvp(orig, guess_from(orig, guess));
  s.approximated = solve_bvp(approx, guess_from(approx, guess));
  s.u_original = two_link_input(config, s.original);
  s.u_approximated = two_link_input(config, s.approximated);
  for (std::size_t k = 0; k < s.u_original.u.size(); ++k) {
    s.max_input_deviation =
        std::max(s.max_input_deviation, std::abs(s.u_original.u[k] - s.u_approximated.u[k]));
  }
  s.comparison = compare_solutions(s.approximated, s.original, 2, {0, 1});
  s.seconds = seconds_since(start);
  return s;
}

ConvergenceRun run_convergence(const TwoLinkConfig& config) {
  const auto start = clock_type::now();
  ConvergenceRun run;
  run.eigen = two_link::zero_dynamics_eigen(config.params);
  run.sweep.resize(config.sweep.size());
  parallel_for(static_cast<int>(config.sweep.size()), [&](int i) {
    run.sweep[i] = solve_two_link_study(config, config.sweep[i]);
  });
  run.seconds = seconds_since(start);
  return run;
}

namespace {

// Servo DAE of the arm with approximated BCs, guessed from the
// internal-dynamics solution on the same mesh.
BvpSolution solve_two_link_dae(const TwoLinkConfig& config, const TwoLinkStudy& study,
                               const InputTrace& u_guess) {
  const SmoothTransition traj = config.trajectory.make();
  const ServoSystem servo(two_link::build_two_link_model(config.params), {traj});
  Vector ref0 = Vector::Zero(5), reff = Vector::Zero(5);
  ref0[0] = traj.z0();
  reff[0] = traj.zf();
  const HermiteSimpson sys(servo, study.mesh,
                           assemble_bc_approx(config.dae_T0, config.dae_Tf, ref0, reff));
  const CubicSpline u_spline(u_guess.t, u_guess.u);
  const auto guess = [&](double t) {
    const Vector eta = sample(study.approximated, 2, t).head(2);
    const auto rec = two_link::reconstruct_input(config.params, traj.eval(t, 0), traj.eval(t, 1),
                                                 traj.eval(t, 2), eta);
    Vector x(5);
    x << rec.alpha, eta[0], rec.alpha_dot, eta[1], u_spline(t);
    return x;
  };
  return solve_bvp(sys, guess_from(sys, guess));
}

double angle_to_line_deg(const Eigen::Vector2d& a, const Eigen::Vector2d& dir) {
  const double c = std::abs(a.dot(dir)) / (a.norm() * dir.norm());
  return rad_to_deg(std::acos(std::min(1.0, c)));
}

}  // namespace

TwoLinkRun run_two_link(const TwoLinkConfig& config) {
  const auto start = clock_type::now();
  TwoLinkRun run;
  run.eigen = two_link::zero_dynamics_eigen(config.params);
  run.convergence = run_convergence(config);
  bool found = false;
  for (std::size_t i = 0; i < config.sweep.size(); ++i) {
    if (std::abs(config.sweep[i] - config.dT) < 1e-12) {
      run.study = run.convergence.sweep[i];
      found = true;
    }
  }
  if (!found) run.study = solve_two_link_study(config, config.dT);

  const SmoothTransition traj = config.trajectory.make();
  run.dae = solve_two_link_dae(config, run.study, run.study.u_approximated);
  const Feedforward ff = extract_feedforward_simpson(run.dae, 4, 0);
  run.u_dae = {ff.t, ff.u};
  const CubicSpline u_orig(run.study.u_original.t, run.study.u_original.u);
  for (std::size_t k = 0; k < ff.t.size(); ++k) {
    run.dae_input_deviation = std::max(run.dae_input_deviation, std::abs(ff.u[k] - u_orig(ff.t[k])));
  }

  // Plant driven by the approximated input from the state the BVP starts in.
  const SystemModel plant = two_link::build_two_link_model(config.params);
  const BvpSolution& a = run.study.approximated;
  const double T0 = run.study.mesh.T0;
  const two_link::InternalState eta0(a.nodes(0, 0), a.nodes(0, 1));
  const auto rec = two_link::reconstruct_input(config.params, traj.eval(T0, 0), traj.eval(T0, 1),
                                               traj.eval(T0, 2), eta0);
  MbsState x0;
  x0.y = Vector(2);
  x0.y << rec.alpha, eta0[0];
  x0.v = Vector(2);
  x0.v << rec.alpha_dot, eta0[1];
  x0.t = T0;
  SimulationOptions opt;
  opt.h = config.h_sim;
  run.closure = simulate_forward(
      plant, InputSignal::from_samples(run.study.u_approximated.t, run.study.u_approximated.u), x0,
      run.study.mesh.Tf, opt);
  for (std::size_t i = 0; i < run.closure.t.size(); ++i) {
    run.closure_error = std::max(
        run.closure_error, std::abs(run.closure.z(static_cast<int>(i), 0) - traj.eval(run.closure.t[i])));
  }

  // Direction in which the approximated phase trace leaves the equilibrium:
  // first node whose deviation reaches 1% of its largest value before t0.
  double peak = 0.0;
  for (int k = 0; k < a.nodes.rows() && a.t[k] < traj.t0(); ++k) {
    peak = std::max(peak, a.nodes.row(k).head(2).norm());
  }
  Eigen::Vector2d first = a.nodes.row(0).head(2).transpose();
  for (int k = 0; k < a.nodes.rows() && a.t[k] < traj.t0(); ++k) {
    if (a.nodes.row(k).head(2).norm() >= 0.01 * peak) {
      first = a.nodes.row(k).head(2).transpose();
      break;
    }
  }
  run.unstable_alignment_deg = first.norm() > 0 ? angle_to_line_deg(first, run.eigen.v_u) : 90.0;
  run.preactuation = measure_preactuation(run.study.u_approximated, traj.t0());
  run.seconds = seconds_since(start);
  return run;
}

// -------------------------------------------------------------------- ANCF

void default_ancf_selection(int elements, std::vector<int>& at_T0, std::vector<int>& at_Tf) {
  const int n = 6 * (elements + 1);
  at_T0.clear();
  at_Tf.clear();
  for (int i = 2; i < n; ++i) {
    if (i == 6 * elements + 1) continue;
    at_T0.push_back(i);
    at_Tf.push_back(i);
  }
  at_T0.insert(at_T0.end(), {n, n + 1, 2 * n + 3});
  at_Tf.insert(at_Tf.end(), {2 * n, 2 * n + 1, 2 * n + 2});
}

int unactuated_coordinates(const ancf::AncfGeometry& geometry) {
  const ancf::AncfAssembly assembly(ancf::AncfMaterial{}, geometry);
  const SystemModel model = ancf::assemble_system(std::make_shared<const ancf::AncfAssembly>(assembly));
  return model.dims.n - model.dims.n_c;
}

AncfRun run_ancf(const AncfConfig& config) {
  const auto start = clock_type::now();
  AncfRun run;
  const SmoothTransition traj = config.trajectory.make();
  const int N = config.geometry.elements;
  auto assembly = std::make_shared<const ancf::AncfAssembly>(config.material, config.geometry);
  const SystemModel model = ancf::assemble_system(assembly);
  const int n = model.dims.n;
  run.unactuated = n - model.dims.n_c;
  const ServoSystem servo(model, {traj});
  const Mesh mesh = Mesh::symmetric(traj.t0(), traj.tf(), config.dT, config.h);

  std::vector<int> at_T0, at_Tf;
  if (config.at_T0) {
    at_T0 = *config.at_T0;
    at_Tf = *config.at_Tf;
  } else {
    default_ancf_selection(N, at_T0, at_Tf);
  }
  const int size = servo.layout().size();
  Vector ref0 = Vector::Zero(size), reff = Vector::Zero(size);
  ref0.head(n) = ancf::rotate_rigidly(assembly->undeformed(), traj.z0());
  reff.head(n) = ancf::rotate_rigidly(assembly->undeformed(), traj.zf());
  const HermiteSimpson sys(servo, mesh, assemble_bc_approx(at_T0, at_Tf, ref0, reff));
  const Vector guess =
      initial_guess_stiff(config.material, config.geometry, traj, sys, config.stiff_E, config.h_sim);
  run.inversion = solve_bvp(sys, guess);
  run.seconds_inversion = seconds_since(start);

  const BvpSolution& sol = run.inversion;
  for (int k = 0; k < sol.nodes.rows(); ++k) {
    const Vector node = sol.nodes.row(k).transpose();
    const Vector y = node.head(n), v = node.segment(n, n), u = node.tail(1);
    run.servo_residual =
        std::max(run.servo_residual, std::abs(ancf::output_angle(y, N) - traj.eval(sol.t[k])));
    run.constraint_residual =
        std::max(run.constraint_residual, model.c(y, v, u, sol.t[k]).cwiseAbs().maxCoeff());
  }
  // u = d gamma/dt from the collocated positions; the nodal u carries the
  // node/midpoint mode and starts inconsistent with the rest state.
  const Feedforward ff = extract_feedforward_rate(
      sol, [n](const Vector& node) { return ancf::cross_section_angle(node.head(n)); });
  run.u_ffw = {ff.t, ff.u};
  run.u_rigid.t = ff.t;
  for (double t : ff.t) run.u_rigid.u.push_back(traj.eval(t, 1));
  run.preactuation = measure_preactuation(run.u_ffw, traj.t0());

  ancf::AncfGeometry validation = config.geometry;
  validation.elements = config.validation_elements;
  auto assembly10 = std::make_shared<const ancf::AncfAssembly>(config.material, validation);
  const SystemModel model10 = ancf::assemble_system(assembly10);
  const MbsState x0 = beam_at_rest(*assembly10, traj.z0(), mesh.T0);
  SimulationOptions opt;
  opt.h = config.h_sim;
  const InputSignal inputs[2] = {InputSignal::from_samples(run.u_ffw.t, run.u_ffw.u),
                                 rigid_equivalent_input(traj)};
  SimulationResult sims[2];
  parallel_for(2, [&](int i) { sims[i] = simulate_forward(model10, inputs[i], x0, mesh.Tf, opt); });
  run.sim_ffw = std::move(sims[0]);
  run.sim_rigid = std::move(sims[1]);
  auto errors = [&](const SimulationResult& s, double& overall, double& post) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const double e = std::abs(s.z(static_cast<int>(i), 0) - traj.eval(s.t[i]));
      overall = std::max(overall, e);
      if (s.t[i] > traj.tf()) post = std::max(post, e);
    }
  };
  errors(run.sim_ffw, run.max_error_ffw, run.post_error_ffw);
  errors(run.sim_rigid, run.max_error_rigid, run.post_error_rigid);
  run.seconds = seconds_since(start);
  return run;
}

// --------------------------------------------------------------- artifacts

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw ContractViolation("write_csv: header/column mismatch");
  std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw ContractViolation("write_csv: ragged columns in " + path);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.16e", columns[j][i]);
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

namespace {

std::vector<double> column(const Matrix& m, int j) {
  std::vector<double> c(m.rows());
  for (int i = 0; i < m.rows(); ++i) c[i] = m(i, j);
  return c;
}

std::string dt_tag(double dT) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", dT);
  return buf;
}

// One row per node: t, y..., v..., lambda..., u.
void write_solution(const std::string& path, const BvpSolution& sol, int n, int n_c, int m) {
  std::vector<std::string> header{"t"};
  std::vector<std::vector<double>> cols{sol.t};
  for (int i = 0; i < n; ++i) header.push_back("y" + std::to_string(i));
  for (int i = 0; i < n; ++i) header.push_back("v" + std::to_string(i));
  for (int i = 0; i < n_c; ++i) header.push_back("lambda" + std::to_string(i));
  for (int i = 0; i < m; ++i) header.push_back("u" + std::to_string(i));
  for (int j = 0; j < 2 * n + n_c + m; ++j) cols.push_back(column(sol.nodes, j));
  write_csv(path, header, cols);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

json newton_log(const BvpSolution& sol) {
  json log = json::array();
  for (const auto& r : sol.log) log.push_back({{"iteration", r.iteration}, {"residual", r.residual}, {"step", r.step}});
  return log;
}

json study_summary(const TwoLinkStudy& s) {
  return {{"dT", s.dT},
          {"max_input_deviation", s.max_input_deviation},
          {"max_error", s.comparison.max_error},
          {"early_rate", s.comparison.early_rate},
          {"late_rate", s.comparison.late_rate},
          {"iterations_original", s.original.iterations},
          {"iterations_approximated", s.approximated.iterations},
          {"residual_original", s.original.residual},
          {"residual_approximated", s.approximated.residual},
          {"seconds", s.seconds}};
}

void write_sweep(const std::filesystem::path& dir, const ConvergenceRun& run, ArtifactSet& set) {
  for (const auto& s : run.sweep) {
    const std::string e_name = "error_dT" + dt_tag(s.dT) + ".csv";
    write_csv((dir / e_name).string(), {"t", "e"}, {s.comparison.t, s.comparison.error});
    const std::string u_name = "input_dT" + dt_tag(s.dT) + ".csv";
    write_csv((dir / u_name).string(), {"t", "u_orig", "u_approx"},
              {s.u_original.t, s.u_original.u, s.u_approximated.u});
    set.files.push_back(e_name);
    set.files.push_back(u_name);
  }
}

json convergence_summary(const ConvergenceRun& run) {
  json sweep = json::array();
  for (const auto& s : run.sweep) sweep.push_back(study_summary(s));
  return {{"lambda_s", run.eigen.lambda_s},
          {"lambda_u", run.eigen.lambda_u},
          {"sweep", sweep},
          {"seconds", run.seconds}};
}

}  // namespace

ArtifactSet write_convergence_artifacts(const TwoLinkConfig&, const ConvergenceRun& run,
                                        const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  fs::create_directories(dir);
  ArtifactSet set{"convergence", directory, {}};
  write_sweep(dir, run, set);
  write_json((dir / "summary.json").string(), {{"experiment", "convergence"}, {"convergence", convergence_summary(run)}});
  return set;
}

ArtifactSet write_two_link_artifacts(const TwoLinkConfig& config, const TwoLinkRun& run,
                                     const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  fs::create_directories(dir);
  ArtifactSet set{"two-link", directory, {}};
  const SmoothTransition traj = config.trajectory.make();
  const TwoLinkStudy& s = run.study;

  std::vector<double> zd;
  for (double t : run.closure.t) zd.push_back(traj.eval(t));
  write_csv((dir / "output.csv").string(), {"t", "z_d", "z_sim"}, {run.closure.t, zd, column(run.closure.z, 0)});
  write_csv((dir / "input.csv").string(), {"t", "u_orig", "u_approx"},
            {s.u_original.t, s.u_original.u, s.u_approximated.u});
  write_csv((dir / "dae_input.csv").string(), {"t", "u_dae"}, {run.u_dae.t, run.u_dae.u});
  write_csv((dir / "phase.csv").string(), {"t", "beta_orig", "beta_dot_orig", "beta_approx", "beta_dot_approx"},
            {s.original.t, column(s.original.nodes, 0), column(s.original.nodes, 1),
             column(s.approximated.nodes, 0), column(s.approximated.nodes, 1)});
  // Eigenlines through the equilibrium scaled to the phase-trace extent.
  double extent = 0.0;
  for (int k = 0; k < s.original.nodes.rows(); ++k) extent = std::max(extent, s.original.nodes.row(k).head(2).norm());
  std::vector<double> sc, ub, ubd, sb, sbd;
  for (int i = -10; i <= 10; ++i) {
    const double a = extent * i / 10.0;
    sc.push_back(a);
    ub.push_back(a * run.eigen.v_u[0]);
    ubd.push_back(a * run.eigen.v_u[1]);
    sb.push_back(a * run.eigen.v_s[0]);
    sbd.push_back(a * run.eigen.v_s[1]);
  }
  write_csv((dir / "eigenlines.csv").string(),
            {"s", "unstable_beta", "unstable_beta_dot", "stable_beta", "stable_beta_dot"}, {sc, ub, ubd, sb, sbd});
  write_solution((dir / "dae_solution.csv").string(), run.dae, 2, 0, 1);
  set.files = {"output.csv", "input.csv", "dae_input.csv", "phase.csv", "eigenlines.csv",
               "dae_solution.csv"};
  write_sweep(dir, run.convergence, set);

  json summary = {{"experiment", "two-link"},
                  {"dT", s.dT},
                  {"h", config.h},
                  {"lambda_s", run.eigen.lambda_s},
                  {"lambda_u", run.eigen.lambda_u},
                  {"max_input_deviation", s.max_input_deviation},
                  {"dae_input_deviation", run.dae_input_deviation},
                  {"closure_max_tracking_error", run.closure_error},
                  {"closure_max_drift", run.closure.max_drift},
                  {"unstable_alignment_deg", run.unstable_alignment_deg},
                  {"preactuation_integral", run.preactuation.integral},
                  {"preactuation_ratio", run.preactuation.ratio()},
                  {"newton_original", newton_log(s.original)},
                  {"newton_approximated", newton_log(s.approximated)},
                  {"newton_dae", newton_log(run.dae)},
                  {"convergence", convergence_summary(run.convergence)},
                  {"seconds", run.seconds}};
  write_json((dir / "summary.json").string(), summary);
  return set;
}

ArtifactSet write_ancf_artifacts(const AncfConfig& config, const AncfRun& run,
                                 const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  fs::create_directories(dir);
  ArtifactSet set{"ancf", directory, {}};
  const SmoothTransition traj = config.trajectory.make();

  write_csv((dir / "input.csv").string(), {"t", "u_ffw", "u_rigid"}, {run.u_ffw.t, run.u_ffw.u, run.u_rigid.u});
  std::vector<double> zd, e_ffw, e_rigid;
  for (std::size_t i = 0; i < run.sim_ffw.t.size(); ++i) {
    zd.push_back(traj.eval(run.sim_ffw.t[i]));
    e_ffw.push_back(run.sim_ffw.z(static_cast<int>(i), 0) - zd.back());
    e_rigid.push_back(run.sim_rigid.z(static_cast<int>(i), 0) - zd.back());
  }
  write_csv((dir / "output.csv").string(), {"t", "z_d", "z_ffw", "z_rigid", "e_ffw", "e_rigid"},
            {run.sim_ffw.t, zd, column(run.sim_ffw.z, 0), column(run.sim_rigid.z, 0), e_ffw, e_rigid});
  set.files = {"input.csv", "output.csv"};

  json frames = json::array();
  const int steps = static_cast<int>(run.sim_ffw.t.size()) - 1;
  for (int f = 0; f < config.shape_frames; ++f) {
    const int i = config.shape_frames == 1 ? 0 : static_cast<int>(std::lround(1.0 * steps * f / (config.shape_frames - 1)));
    const auto pf = ancf::node_positions(run.sim_ffw.y.row(i).transpose());
    const auto pr = ancf::node_positions(run.sim_rigid.y.row(i).transpose());
    std::vector<double> xf, yf, xr, yr;
    for (std::size_t k = 0; k < pf.size(); ++k) {
      xf.push_back(pf[k].x());
      yf.push_back(pf[k].y());
      xr.push_back(pr[k].x());
      yr.push_back(pr[k].y());
    }
    const std::string name = "shape_" + std::to_string(f) + ".csv";
    write_csv((dir / name).string(), {"x_ffw", "y_ffw", "x_rigid", "y_rigid"}, {xf, yf, xr, yr});
    set.files.push_back(name);
    frames.push_back(run.sim_ffw.t[i]);
  }
  const int n = config.geometry.coordinates();
  write_solution((dir / "solution.csv").string(), run.inversion, n, 3, 1);
  set.files.push_back("solution.csv");

  json summary = {{"experiment", "ancf"},
                  {"elements", config.geometry.elements},
                  {"validation_elements", config.validation_elements},
                  {"unactuated_coordinates", run.unactuated},
                  {"max_tracking_error_deg", rad_to_deg(run.max_error_ffw)},
                  {"post_tracking_error_deg", rad_to_deg(run.post_error_ffw)},
                  {"rigid_max_error_deg", rad_to_deg(run.max_error_rigid)},
                  {"rigid_post_error_deg", rad_to_deg(run.post_error_rigid)},
                  {"servo_residual", run.servo_residual},
                  {"constraint_residual", run.constraint_residual},
                  {"forward_drift_ffw", run.sim_ffw.max_drift},
                  {"forward_drift_rigid", run.sim_rigid.max_drift},
                  {"newton_iterations", run.inversion.iterations},
                  {"newton", newton_log(run.inversion)},
                  {"bvp_residual", run.inversion.residual},
                  {"preactuation_integral", run.preactuation.integral},
                  {"preactuation_ratio", run.preactuation.ratio()},
                  {"shape_times", frames},
                  {"seconds_inversion", run.seconds_inversion},
                  {"seconds", run.seconds}};
  write_json((dir / "summary.json").string(), summary);
  return set;
}

namespace {

void write_script(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "set datafile separator ','\nset key autotitle columnhead\nset grid\n" << body;
}

}  // namespace

std::vector<std::string> emit_plot_scripts(const ArtifactSet& artifacts) {
  namespace fs = std::filesystem;
  std::vector<std::string> scripts;
  if (artifacts.kind.empty() || artifacts.files.empty()) return scripts;
  const fs::path dir(artifacts.directory);
  auto emit = [&](const std::string& name, const std::string& body) {
    write_script(dir / name, body);
    scripts.push_back((dir / name).string());
  };
  std::vector<std::string> errors, inputs;
  for (const auto& f : artifacts.files) {
    if (f.rfind("error_dT", 0) == 0) errors.push_back(f);
    if (f.rfind("input_dT", 0) == 0) inputs.push_back(f);
  }
  auto overlay = [](const std::vector<std::string>& files, const std::string& cols) {
    std::string s = "plot ";
    for (std::size_t i = 0; i < files.size(); ++i) {
      s += (i ? ", " : "") + ("'" + files[i] + "' using " + cols + " with lines title '" + files[i] + "'");
    }
    return s + "\n";
  };
  if (artifacts.kind == "two-link") {
    emit("output.gp", "set xlabel 't [s]'\nset ylabel 'z [rad]'\nplot 'output.csv' using 1:2 with lines, '' using 1:3 with lines\n");
    emit("input.gp", "set xlabel 't [s]'\nset ylabel 'u [N m]'\nplot 'input.csv' using 1:2 with lines, '' using 1:3 with lines, 'dae_input.csv' using 1:2 with lines\n");
    emit("phase.gp", "set xlabel 'beta [rad]'\nset ylabel 'beta_dot [rad/s]'\n"
                     "plot 'phase.csv' using 2:3 with lines, '' using 4:5 with lines, "
                     "'eigenlines.csv' using 2:3 with lines, '' using 4:5 with lines\n");
    emit("convergence.gp", "set logscale y\nset xlabel 't [s]'\nset ylabel 'e'\n" + overlay(errors, "1:2"));
  } else if (artifacts.kind == "convergence") {
    emit("convergence.gp", "set logscale y\nset xlabel 't [s]'\nset ylabel 'e'\n" + overlay(errors, "1:2"));
    emit("inputs.gp", "set xlabel 't [s]'\nset ylabel 'u [N m]'\n" + overlay(inputs, "1:3"));
  } else if (artifacts.kind == "ancf") {
    emit("input.gp", "set xlabel 't [s]'\nset ylabel 'u [rad/s]'\nplot 'input.csv' using 1:2 with lines, '' using 1:3 with lines\n");
    emit("output.gp", "set xlabel 't [s]'\nset ylabel 'z [rad]'\nplot 'output.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n");
    emit("error.gp", "set xlabel 't [s]'\nset ylabel 'e [rad]'\nplot 'output.csv' using 1:5 with lines, '' using 1:6 with lines\n");
    for (const auto& f : artifacts.files) {
      if (f.rfind("shape_", 0) != 0) continue;
      const std::string stem = f.substr(0, f.size() - 4);
      emit(stem + ".gp", "set size ratio -1\nset xlabel 'x [m]'\nset ylabel 'y [m]'\nplot '" + f +
                             "' using 1:2 with linespoints, '' using 3:4 with linespoints\n");
    }
  }
  return scripts;
}

}  // namespace stable_inv::experiments
