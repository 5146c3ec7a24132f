// ldp: command-line front end for the mean-field large-deviation toolkit.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mfldp/mfldp.hpp>

using namespace mfldp;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::map<const CLI::App*, std::string> default_out;  // per subcommand
};

// Output files record everything that determines their content; the thread
// count and file names are deliberately left out so reruns compare equal.
struct Run {
  std::string command;
  ojson resolved;
  std::vector<std::string> outputs;

  std::string config_line() const { return resolved.dump(); }
  std::string hash() const { return hex64(fnv1a(config_line())); }

  void write(const std::string& path, const std::string& content) {
    write_atomic(path, content);
    outputs.push_back(path);
  }
};

void add_common(CLI::App* sub, Common& c, bool needs_config = true, const std::string& default_out = "") {
  auto* opt = sub->add_option("--config", c.config, "Model configuration (JSON)");
  if (needs_config) opt->required();
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (default: LDP_THREADS or all cores)");
  auto* out = sub->add_option("--out", c.out, "Output file");
  if (!default_out.empty()) {
    c.default_out[sub] = default_out;
    out->default_str(default_out);
  }
}

bool same_file(const std::string& a, const std::string& b) {
  namespace fs = std::filesystem;
  std::error_code ec;
  return fs::exists(a, ec) && fs::exists(b, ec) && fs::equivalent(a, b, ec);
}

void guard_inputs(const std::vector<std::string>& outputs, const std::vector<std::string>& inputs) {
  for (const auto& o : outputs)
    for (const auto& i : inputs)
      if (!i.empty() && !o.empty() && (o == i || same_file(o, i)))
        throw InvalidArgument("output " + o + " would overwrite input " + i);
}

std::string with_extension(const std::string& path, const std::string& ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

ojson resolved_base(const std::string& command, const ModelConfig& mc) {
  ojson j;
  j["command"] = command;
  j["model"] = ojson::parse(mc.to_json().dump());
  return j;
}

InitialRate make_initial_rate(const std::string& kind, const Model& model, ConstSpan start) {
  if (kind == "point") return InitialRate::point_mass(Vector(start.begin(), start.end()));
  if (kind == "gibbs") return gibbs_initial_rate(model);
  if (kind == "zero") return InitialRate::zero();
  throw InvalidArgument("--i0 must be point, gibbs or zero");
}

std::string lagrangian_cell(const LagrangianValue& L) {
  return L.is_infinite() ? "inf" : format_double(L.value.value());
}

}  // namespace

int main(int argc, char** argv) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"Large-deviation toolkit for mean-field Ehrenfest and Glauber jump processes"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(mfldp::version));

  Common c;
  Run run;
  std::function<void()> action;

  // simulate
  long sim_n = 0;
  std::vector<double> start;
  double horizon = 1.0;
  auto* simulate = app.add_subcommand("simulate", "Gillespie simulation of the n-particle empirical process");
  add_common(simulate, c, true, "trajectory.csv");
  simulate->add_option("--n", sim_n, "Number of particles")->required();
  simulate->add_option("--start", start, "Initial state, comma separated (default: lattice point nearest the centre)")
      ->delimiter(',');
  simulate->add_option("--horizon", horizon, "Time horizon")->capture_default_str();

  // flow
  FlowConfig flow_cfg;
  std::string method = "rk4";
  bool no_projection = false;
  auto* flow = app.add_subcommand("flow", "Integrate the McKean-Vlasov equation");
  add_common(flow, c, true, "flow.csv");
  flow->add_option("--start", start, "Initial state, comma separated")->delimiter(',')->required();
  flow->add_option("--horizon", flow_cfg.horizon, "Time horizon")->capture_default_str();
  flow->add_option("--dt", flow_cfg.dt, "Step size")->capture_default_str();
  flow->add_option("--method", method, "rk4 or euler")->check(CLI::IsMember({"rk4", "euler"}))->capture_default_str();
  flow->add_flag("--no-projection", no_projection, "Do not project steps back onto the state space");

  // action
  std::string traj_path, i0_kind = "point";
  auto* act = app.add_subcommand("action", "Evaluate the rate functional of a trajectory");
  add_common(act, c, true, "action.json");
  act->add_option("--trajectory", traj_path, "Trajectory CSV")->required();
  act->add_option("--i0", i0_kind, "Initial rate: point, gibbs or zero")->capture_default_str();

  // rate-estimate
  std::vector<double> from, to;
  std::vector<long> n_values;
  double delta = 0.05, ref_horizon = 1.0;
  std::uint64_t replicas = 10000;
  std::size_t knots = 200;
  std::string csv_out;
  auto* rate = app.add_subcommand("rate-estimate", "Monte-Carlo tube probabilities and decay rates");
  add_common(rate, c, true, "rate.json");
  rate->add_option("--trajectory", traj_path, "Reference trajectory CSV (instead of --from/--to)");
  rate->add_option("--from", from, "Reference start")->delimiter(',');
  rate->add_option("--to", to, "Reference end")->delimiter(',');
  rate->add_option("--horizon", ref_horizon, "Reference duration for --from/--to")->capture_default_str();
  rate->add_option("--knots", knots, "Segments of the straight reference")->capture_default_str();
  rate->add_option("--delta", delta, "Tube radius (sup-norm)")->capture_default_str();
  rate->add_option("--n", n_values, "Particle numbers, comma separated")->delimiter(',')->required();
  rate->add_option("--replicas", replicas, "Replicas per n")->capture_default_str();
  rate->add_option("--i0", i0_kind, "Initial rate: point, gibbs or zero")->capture_default_str();
  rate->add_option("--csv", csv_out, "Summary CSV (default: --out with .csv)");

  // resolvent / comparison / nisio share grid and scheme options
  int m = 65;
  double lambda = 1.0, p_max = 8.0, omega = 1.0, tol = 1e-10, t_final = 0.25, tol_factor = 1e-6;
  long max_iter = 100000;
  std::string h_spec = "constant:0", init_spec, scheme = "upwind", f0_spec, report;
  std::vector<std::string> init_specs;
  std::vector<int> resolutions;
  int time_steps = 50, velocity_samples = 41, resolvent_steps = 0;

  auto add_scheme = [&](CLI::App* sub) {
    sub->add_option("--scheme", scheme, "upwind or lax_friedrichs")
        ->check(CLI::IsMember({"upwind", "lax_friedrichs"}))
        ->capture_default_str();
    sub->add_option("--p-max", p_max, "Momentum cap")->capture_default_str();
    sub->add_option("--omega", omega, "Relaxation in (0,1]")->capture_default_str();
    sub->add_option("--max-iter", max_iter, "Maximum sweeps")->capture_default_str();
  };

  auto* resolvent = app.add_subcommand("resolvent", "Solve f - lambda H(x, grad f) = h on a grid");
  add_common(resolvent, c, true, "resolvent.csv");
  resolvent->add_option("--m", m, "Grid resolution")->capture_default_str();
  resolvent->add_option("--lambda", lambda, "lambda > 0")->capture_default_str();
  resolvent->add_option("--h", h_spec, "Right-hand side, e.g. cosine:0.5,2")->capture_default_str();
  resolvent->add_option("--init", init_spec, "Initial iterate (default: h)");
  resolvent->add_option("--tol", tol, "Error-bound tolerance")->capture_default_str();
  resolvent->add_option("--report", report, "Solver report JSON (default: --out with .json)");
  add_scheme(resolvent);

  auto* comparison = app.add_subcommand("comparison", "Solve from several initial iterates on refined grids");
  add_common(comparison, c, true, "comparison.json");
  comparison->add_option("--lambda", lambda, "lambda > 0")->capture_default_str();
  comparison->add_option("--h", h_spec, "Right-hand side")->capture_default_str();
  comparison->add_option("--m", resolutions, "Resolutions, comma separated")->delimiter(',')->required();
  comparison->add_option("--init", init_specs, "Initial iterate (repeat, at least 2)")->required();
  comparison->add_option("--tol-factor", tol_factor, "Tolerance = factor * h^2")->capture_default_str();
  add_scheme(comparison);

  auto* nisio = app.add_subcommand("nisio", "Variational semigroup by dynamic programming");
  add_common(nisio, c, true, "nisio.csv");
  nisio->add_option("--m", m, "Grid resolution")->capture_default_str();
  nisio->add_option("--f0", f0_spec, "Terminal function")->required();
  nisio->add_option("--t", t_final, "Time")->capture_default_str();
  nisio->add_option("--time-steps", time_steps, "DP time steps")->capture_default_str();
  nisio->add_option("--velocity-samples", velocity_samples, "Momentum samples per axis")->capture_default_str();
  nisio->add_option("--p-max", p_max, "Momentum cap")->capture_default_str();
  nisio->add_option("--resolvent-steps", resolvent_steps,
                    "Also iterate the resolvent this many times and report the sup difference");
  nisio->add_option("--report", report, "Report JSON (default: --out with .json)");

  // lyapunov
  std::optional<double> lyap_tol;
  auto* lyap = app.add_subcommand("lyapunov", "Check that I0 = S + V decreases along the flow");
  add_common(lyap, c, true, "lyapunov.csv");
  lyap->add_option("--start", start, "Initial state")->delimiter(',')->required();
  lyap->add_option("--horizon", flow_cfg.horizon, "Time horizon")->capture_default_str();
  lyap->add_option("--dt", flow_cfg.dt, "Step size")->capture_default_str();
  lyap->add_option("--method", method, "rk4 or euler")->check(CLI::IsMember({"rk4", "euler"}))->capture_default_str();
  lyap->add_option("--tolerance", lyap_tol, "Allowed increase (default: 10x integrator error bound)");
  lyap->add_option("--report", report, "Verdict JSON (default: --out with .json)");

  // hamiltonian eval / lagrangian eval
  std::vector<double> xs, ps;
  auto* ham = app.add_subcommand("hamiltonian", "Hamiltonian utilities");
  ham->require_subcommand(1);
  auto* ham_eval = ham->add_subcommand("eval", "H(x,p) and H_p(x,p) as one CSV row");
  add_common(ham_eval, c);
  ham_eval->add_option("--x", xs, "State")->delimiter(',')->required();
  ham_eval->add_option("--p", ps, "Momentum")->delimiter(',')->required();
  auto* lag = app.add_subcommand("lagrangian", "Lagrangian utilities");
  lag->require_subcommand(1);
  auto* lag_eval = lag->add_subcommand("eval", "L(x,v) and its maximiser as one CSV row");
  add_common(lag_eval, c);
  lag_eval->add_option("--x", xs, "State")->delimiter(',')->required();
  lag_eval->add_option("--v", ps, "Velocity")->delimiter(',')->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  for (const auto& [sub, path] : c.default_out)
    if (sub->parsed() && c.out.empty()) c.out = path;

  try {
    const int threads = c.threads > 0 ? c.threads : default_thread_count();
    const ModelConfig mc = load_model_config(c.config);
    const Model model = build_model(mc);
    const int d = mc.d;
    const std::vector<std::string> inputs = {c.config, traj_path};

    if (simulate->parsed()) {
      if (start.empty()) {
        const Domain dom = domain_of(model);
        const Vector centre(static_cast<std::size_t>(d), dom == Domain::cube ? 0.0 : 1.0 / d);
        start = lattice_point(dom, sim_n, nearest_lattice_counts(dom, sim_n, centre));
      }
      run.resolved = resolved_base("simulate", mc);
      run.resolved["n"] = sim_n;
      run.resolved["start"] = json_array(start);
      run.resolved["horizon"] = horizon;
      run.resolved["seed"] = c.seed;
      run.resolved["rng"] = SplitMix64::algorithm;
      guard_inputs({c.out}, inputs);
      const Trajectory tr = simulate_path(model, sim_n, start, horizon, c.seed);
      run.write(c.out, trajectory_csv(tr, run.config_line()));
    } else if (flow->parsed()) {
      flow_cfg.method = method == "rk4" ? FlowMethod::rk4 : FlowMethod::euler;
      flow_cfg.boundary_projection = !no_projection;
      run.resolved = resolved_base("flow", mc);
      run.resolved["start"] = json_array(start);
      run.resolved["horizon"] = flow_cfg.horizon;
      run.resolved["dt"] = flow_cfg.dt;
      run.resolved["method"] = method;
      run.resolved["boundary_projection"] = flow_cfg.boundary_projection;
      guard_inputs({c.out}, inputs);
      const Trajectory tr = integrate_mkv(model, start, flow_cfg);
      run.write(c.out, trajectory_csv(tr, run.config_line()));
    } else if (act->parsed()) {
      Trajectory tr = parse_trajectory_csv(read_file(traj_path), traj_path);
      const bool was_constant = tr.kind == PathKind::piecewise_constant;
      tr.kind = PathKind::piecewise_linear;
      run.resolved = resolved_base("action", mc);
      run.resolved["trajectory_hash"] = hex64(fnv1a(read_file(traj_path)));
      run.resolved["i0"] = i0_kind;
      guard_inputs({c.out}, inputs);
      const InitialRate I0 = make_initial_rate(i0_kind, model, tr.states.front());
      const ActionResult res = evaluate_action(model, tr, I0, threads);
      ojson j;
      j["config"] = run.resolved;
      j["total"] = json_number(res.total);
      j["initial_part"] = json_number(res.initial_part);
      j["infinite_interval"] = res.infinite_interval ? ojson(*res.infinite_interval) : ojson(nullptr);
      j["infinite_velocity"] = res.infinite_velocity ? json_array(*res.infinite_velocity) : ojson(nullptr);
      if (was_constant) j["note"] = "piecewise-constant input treated as piecewise linear";
      ojson intervals = ojson::array();
      for (std::size_t k = 0; k < res.running_part.size(); ++k)
        intervals.push_back({{"t0", tr.times[k]}, {"t1", tr.times[k + 1]}, {"cost", json_number(res.running_part[k])}});
      j["intervals"] = intervals;
      run.write(c.out, dump_json(j));
    } else if (rate->parsed()) {
      Trajectory ref;
      run.resolved = resolved_base("rate-estimate", mc);
      if (!traj_path.empty()) {
        ref = parse_trajectory_csv(read_file(traj_path), traj_path);
        require(ref.kind == PathKind::piecewise_linear, "rate-estimate: reference must be piecewise linear");
        run.resolved["trajectory_hash"] = hex64(fnv1a(read_file(traj_path)));
      } else {
        require(!from.empty() && !to.empty(), "rate-estimate: give --trajectory or both --from and --to");
        require(knots >= 1, "rate-estimate: --knots must be >= 1");
        ref = polyline({0.0, ref_horizon}, {Vector(from), Vector(to)}, knots);
        run.resolved["from"] = json_array(from);
        run.resolved["to"] = json_array(to);
        run.resolved["horizon"] = ref_horizon;
        run.resolved["knots"] = knots;
      }
      run.resolved["delta"] = delta;
      run.resolved["n"] = n_values;
      run.resolved["replicas"] = replicas;
      run.resolved["i0"] = i0_kind;
      run.resolved["seed"] = c.seed;
      run.resolved["rng"] = SplitMix64::algorithm;
      if (csv_out.empty()) csv_out = with_extension(c.out, ".csv");
      guard_inputs({c.out, csv_out}, inputs);
      const InitialRate I0 = make_initial_rate(i0_kind, model, ref.states.front());
      const RateReport rep = ldp_rate_estimate(model, ref, delta, n_values, replicas, c.seed, I0, threads);
      ojson j;
      j["config"] = run.resolved;
      j["n_values"] = rep.n_values;
      j["hits"] = rep.hits;
      j["tube_probabilities"] = json_array(rep.tube_probabilities);
      ojson decay = ojson::array();
      for (const auto& e : rep.decay_estimates) decay.push_back(e ? json_number(*e) : ojson(nullptr));
      j["decay_estimates"] = decay;
      j["reference_action"] = json_number(rep.reference_action);
      j["delta"] = rep.delta;
      j["replicas"] = rep.replicas;
      j["seed"] = rep.seed;
      j["rng"] = rep.rng;
      std::string csv = csv_preamble("rate.v1", run.config_line()) + "n,p_hat,decay_estimate,reference_action\n";
      for (std::size_t k = 0; k < rep.n_values.size(); ++k)
        csv += std::to_string(rep.n_values[k]) + "," + format_double(rep.tube_probabilities[k]) + "," +
               (rep.decay_estimates[k] ? format_double(*rep.decay_estimates[k]) : std::string()) + "," +
               (rep.reference_action.is_infinite() ? "inf" : format_double(rep.reference_action.value())) + "\n";
      run.write(c.out, dump_json(j));
      run.write(csv_out, csv);
    } else if (resolvent->parsed() || comparison->parsed()) {
      ResolventOptions ro;
      ro.scheme.scheme = scheme == "upwind" ? Scheme::upwind : Scheme::lax_friedrichs;
      ro.scheme.p_max = p_max;
      ro.omega = omega;
      ro.tolerance = tol;
      ro.max_iterations = max_iter;
      ro.threads = threads;
      const auto h = parse_function_spec(h_spec, d);
      const bool is_resolvent = resolvent->parsed();
      run.resolved = resolved_base(is_resolvent ? "resolvent" : "comparison", mc);
      run.resolved["lambda"] = lambda;
      run.resolved["h"] = h_spec;
      run.resolved["scheme"] = scheme;
      run.resolved["p_max"] = p_max;
      run.resolved["omega"] = omega;
      run.resolved["max_iterations"] = max_iter;
      if (is_resolvent) {
        run.resolved["m"] = m;
        run.resolved["tolerance"] = tol;
        run.resolved["init"] = init_spec.empty() ? h_spec : init_spec;
        if (report.empty()) report = with_extension(c.out, ".json");
        guard_inputs({c.out, report}, inputs);
        auto grid = std::make_shared<const Grid>(mc.model == "ehrenfest" ? Grid::cube(d, m) : Grid::simplex(d, m));
        if (!init_spec.empty()) ro.initial = grid->sample(parse_function_spec(init_spec, d));
        const ResolventResult res = solve_resolvent(model, grid, lambda, GridFunction::sample(grid, h), ro);
        ojson j;
        j["config"] = run.resolved;
        j["iterations"] = res.iterations;
        j["last_update"] = res.last_update;
        j["error_bound"] = res.error_bound;
        j["residual"] = res.residual;
        run.write(c.out, grid_function_csv(res.f, run.config_line()));
        run.write(report, dump_json(j));
      } else {
        run.resolved["m"] = resolutions;
        run.resolved["init"] = init_specs;
        run.resolved["tolerance_factor"] = tol_factor;
        guard_inputs({c.out}, inputs);
        std::vector<ScalarFunction> inits;
        for (const auto& s : init_specs) inits.push_back(parse_function_spec(s, d));
        ComparisonOptions co;
        co.solver = ro;
        co.tolerance_factor = tol_factor;
        const ComparisonReport rep = comparison_experiment(model, lambda, h, resolutions, inits, co);
        ojson j;
        j["config"] = run.resolved;
        ojson levels = ojson::array();
        for (const auto& l : rep.levels)
          levels.push_back({{"m", l.resolution},
                            {"spacing", l.spacing},
                            {"solver_tolerance", l.solver_tolerance},
                            {"max_pairwise_difference", l.max_pairwise_difference},
                            {"iterations", l.iterations},
                            {"error_bounds", l.error_bounds}});
        j["levels"] = levels;
        j["differences_decrease"] = rep.differences_decrease;
        run.write(c.out, dump_json(j));
      }
    } else if (nisio->parsed()) {
      run.resolved = resolved_base("nisio", mc);
      run.resolved["m"] = m;
      run.resolved["f0"] = f0_spec;
      run.resolved["t"] = t_final;
      run.resolved["time_steps"] = time_steps;
      run.resolved["velocity_samples"] = velocity_samples;
      run.resolved["p_max"] = p_max;
      run.resolved["resolvent_steps"] = resolvent_steps;
      if (report.empty()) report = with_extension(c.out, ".json");
      guard_inputs({c.out, report}, inputs);
      auto grid = std::make_shared<const Grid>(mc.model == "ehrenfest" ? Grid::cube(d, m) : Grid::simplex(d, m));
      const GridFunction f0 = GridFunction::sample(grid, parse_function_spec(f0_spec, d));
      NisioOptions no;
      no.p_max = p_max;
      no.threads = threads;
      const GridFunction v = nisio_value_dp(model, f0, t_final, time_steps, velocity_samples, no);
      run.write(c.out, grid_function_csv(v, run.config_line()));
      if (resolvent_steps > 0) {
        ResolventOptions ro;
        ro.threads = threads;
        const GridFunction r = semigroup_via_resolvent(model, grid, f0, t_final, resolvent_steps, ro);
        ojson j;
        j["config"] = run.resolved;
        j["spacing"] = grid->spacing();
        j["sup_difference_to_resolvent"] = sup_difference(v, r);
        run.write(report, dump_json(j));
      }
    } else if (lyap->parsed()) {
      flow_cfg.method = method == "rk4" ? FlowMethod::rk4 : FlowMethod::euler;
      run.resolved = resolved_base("lyapunov", mc);
      run.resolved["start"] = json_array(start);
      run.resolved["horizon"] = flow_cfg.horizon;
      run.resolved["dt"] = flow_cfg.dt;
      run.resolved["method"] = method;
      run.resolved["tolerance"] = lyap_tol ? ojson(*lyap_tol) : ojson("auto");
      if (report.empty()) report = with_extension(c.out, ".json");
      guard_inputs({c.out, report}, inputs);
      const LyapunovReport rep = lyapunov_check(model, start, flow_cfg, lyap_tol);
      std::string csv = csv_preamble("lyapunov.v1", run.config_line()) + "t,I0\n";
      for (std::size_t k = 0; k < rep.times.size(); ++k)
        csv += format_double(rep.times[k]) + "," + format_double(rep.values[k]) + "\n";
      ojson j;
      j["config"] = run.resolved;
      j["max_increase"] = rep.max_increase;
      j["tolerance"] = rep.tolerance;
      j["error_bound"] = rep.error_bound;
      j["monotone"] = rep.monotone;
      j["final_value"] = rep.values.back();
      run.write(c.out, csv);
      run.write(report, dump_json(j));
    } else if (ham_eval->parsed() || lag_eval->parsed()) {
      const bool is_h = ham_eval->parsed();
      run.resolved = resolved_base(is_h ? "hamiltonian eval" : "lagrangian eval", mc);
      run.resolved["x"] = json_array(xs);
      run.resolved[is_h ? "p" : "v"] = json_array(ps);
      require(static_cast<int>(ps.size()) == d, "second argument must have d entries");
      check_state(model, xs, is_h ? "hamiltonian eval" : "lagrangian eval");
      std::string row, header;
      for (int i = 1; i <= d; ++i) header += "x_" + std::to_string(i) + ",";
      for (int i = 1; i <= d; ++i) header += (is_h ? "p_" : "v_") + std::to_string(i) + ",";
      for (double v : xs) row += format_double(v) + ",";
      for (double v : ps) row += format_double(v) + ",";
      if (is_h) {
        header += "H";
        row += format_double(eval_H(model, xs, ps));
        for (double g : grad_H_p(model, xs, ps)) row += "," + format_double(g);
        for (int i = 1; i <= d; ++i) header += ",Hp_" + std::to_string(i);
      } else {
        const LagrangianValue L = legendre(model, xs, ps);
        header += "L";
        row += lagrangian_cell(L);
        for (int i = 1; i <= d; ++i) {
          header += ",pstar_" + std::to_string(i);
          row += "," + (L.maximizer ? format_double((*L.maximizer)[static_cast<std::size_t>(i - 1)]) : std::string());
        }
      }
      const std::string csv = csv_preamble("row.v1", run.config_line()) + header + "\n" + row + "\n";
      if (c.out.empty()) {
        std::cout << csv;
      } else {
        guard_inputs({c.out}, inputs);
        run.write(c.out, csv);
      }
    }

    ojson manifest;
    manifest["command"] = run.resolved["command"];
    manifest["config_hash"] = run.hash();
    manifest["seed"] = c.seed;
    manifest["version"] = mfldp::version;
    manifest["threads"] = threads;
    manifest["outputs"] = run.outputs;
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << manifest.dump() << "\n";
    return 0;
  } catch (const NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
