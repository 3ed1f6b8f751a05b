#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "repulse/analytics.hpp"
#include "repulse/deathmodel.hpp"
#include "repulse/fkpp.hpp"
#include "repulse/fullbbm.hpp"
#include "repulse/io.hpp"
#include "repulse/numeric.hpp"
#include "repulse/parallel.hpp"
#include "repulse/qmgw.hpp"
#include "repulse/rng.hpp"
#include "repulse/validate.hpp"

namespace {

using repulse::io::KvList;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num_str(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Header comment carrying the configuration fingerprint. Worker count and
// output paths are deliberately excluded: they must not influence content.
std::string stamp(const KvList& config, std::uint64_t seed) {
  KvList head;
  head.emplace_back("config_hash", repulse::io::config_hash(config));
  head.emplace_back("seed", std::to_string(seed));
  return repulse::io::stamp_header(head);
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-")
    std::cout << contents;
  else
    repulse::io::write_file_atomic(path, contents);
}

// Resolves the "exactly one of sigma | (lambda, epsilon)" contract.
double resolve_sigma(double sigma, double lambda, double epsilon) {
  const bool have_sigma = !std::isnan(sigma);
  const bool have_rates = !std::isnan(lambda) || !std::isnan(epsilon);
  if (have_sigma && have_rates)
    throw std::domain_error("give either --sigma or --lambda/--epsilon");
  if (have_sigma) return sigma;
  if (std::isnan(lambda) || std::isnan(epsilon))
    throw std::domain_error("need --sigma, or both --lambda and --epsilon");
  return repulse::analytics::sigma_of(lambda, epsilon);
}

double need(double v, const char* flag) {
  if (std::isnan(v)) throw std::domain_error(std::string("missing ") + flag);
  return v;
}

struct AnalyticArgs {
  std::string formula;
  double lambda = kNaN, epsilon = kNaN, sigma = kNaN;
  double t = kNaN, s = kNaN, r = kNaN, rho = kNaN, gamma = kNaN;
  double x = kNaN, T = kNaN, delta = kNaN, Delta = kNaN, c = 2.0;
};

double analytic_eval(const AnalyticArgs& a) {
  namespace an = repulse::analytics;
  namespace fb = repulse::fullbbm;
  namespace fk = repulse::fkpp;
  auto sig = [&] { return resolve_sigma(a.sigma, a.lambda, a.epsilon); };
  const std::string& f = a.formula;
  if (f == "sigma") return an::sigma_of(need(a.lambda, "--lambda"), need(a.epsilon, "--epsilon"));
  if (f == "one_minus_sigma") return an::one_minus_sigma_of(need(a.lambda, "--lambda"), need(a.epsilon, "--epsilon"));
  if (f == "no_branch_mass") return an::no_branch_mass(sig(), need(a.t, "--t"));
  if (f == "partition_v") return an::partition_v(sig(), need(a.t, "--t"));
  if (f == "log_partition_v") return an::log_partition_v(sig(), need(a.t, "--t"));
  if (f == "mean_n") return an::mean_particles(sig(), need(a.t, "--t"));
  if (f == "laplace_n") return an::laplace_n(sig(), need(a.t, "--t"), need(a.s, "--s"), need(a.gamma, "--gamma"));
  if (f == "geom_terminal") return an::geom_param_terminal(sig(), need(a.t, "--t"));
  if (f == "geom_window") return an::geom_param_window(sig(), need(a.rho, "--rho"));
  if (f == "first_branch_cdf") return an::first_branch_cdf(sig(), need(a.t, "--t"), need(a.r, "--r"));
  if (f == "limit_first_cdf") return an::limit_first_cdf(need(a.x, "--x"));
  if (f == "limit_kernel_cdf") return an::limit_kernel_cdf(need(a.T, "--T"), need(a.x, "--x"));
  if (f == "kernel_mean_wait") return an::limit_kernel_mean_wait(need(a.T, "--T"));
  if (f == "rescaled_limit") return an::partition_rescaled_limit(need(a.lambda, "--lambda"), need(a.epsilon, "--epsilon"), need(a.t, "--t"));
  if (f == "tau_delta") return fk::tau_delta(sig(), need(a.delta, "--delta"));
  if (f == "T_Delta") return fk::T_Delta(sig(), need(a.Delta, "--Delta"));
  if (f == "bramson_front") return fk::bramson_front(need(a.t, "--t"));
  if (f == "g") return fk::g_decay(sig(), need(a.t, "--t"));
  if (f == "G") return fk::G_decay(sig(), need(a.t, "--t"));
  if (f == "basic_bound") return fb::first_branch_bound_basic(sig(), need(a.t, "--t"), need(a.r, "--r"));
  if (f == "improved_bound") return fb::first_branch_bound_improved(need(a.lambda, "--lambda"), need(a.epsilon, "--epsilon"), need(a.t, "--t"), need(a.r, "--r"), a.c);
  if (f == "denominator_lower_bound") return fb::denominator_lower_bound(need(a.lambda, "--lambda"), need(a.t, "--t"), a.c);
  throw std::domain_error("unknown formula: " + f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching diffusion with proximity penalty: samplers, closed "
               "forms, PDE solver, validation suite"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file; flags override");
  int config_version = 1;
  app.add_option("--config-version", config_version)
      ->description("config schema version (must be 1)")
      ->capture_default_str();
  int workers = 0;
  app.add_option("--workers", workers,
                 "worker threads (0 = hardware; REPULSE_BBM_THREADS wins)");
  std::uint64_t seed = repulse::validate::kSuiteSeed;
  app.add_option("--seed", seed, "64-bit master seed")->capture_default_str();
  std::string write_config;
  app.add_option("--write-config", write_config,
                 "write the effective configuration to this file and exit")
      ->configurable(false);  // must not round-trip into the file it writes

  std::function<int()> action;

  // ---- analytic eval ----
  auto* analytic = app.add_subcommand("analytic", "closed-form evaluations");
  analytic->require_subcommand(1);
  auto* eval = analytic->add_subcommand("eval", "print one formula value");
  auto ar = std::make_shared<AnalyticArgs>();
  eval->add_option("--formula", ar->formula)->required();
  eval->add_option("--lambda", ar->lambda);
  eval->add_option("--epsilon", ar->epsilon);
  eval->add_option("--sigma", ar->sigma);
  eval->add_option("--t", ar->t);
  eval->add_option("--s", ar->s);
  eval->add_option("--r", ar->r);
  eval->add_option("--rho", ar->rho);
  eval->add_option("--gamma", ar->gamma);
  eval->add_option("--x", ar->x);
  eval->add_option("--T", ar->T);
  eval->add_option("--delta", ar->delta);
  eval->add_option("--Delta", ar->Delta);
  eval->add_option("--c", ar->c)->capture_default_str();
  eval->callback([&action, ar] {
    action = [ar] {
      std::cout << num_str(analytic_eval(*ar)) << '\n';
      return 0;
    };
  });

  // ---- sample-tree ----
  auto* st = app.add_subcommand("sample-tree", "tilted tree sampler (JSONL)");
  auto stv = std::make_shared<AnalyticArgs>();
  std::size_t st_n = 1;
  std::string st_out;
  st->add_option("--lambda", stv->lambda);
  st->add_option("--epsilon", stv->epsilon);
  st->add_option("--sigma", stv->sigma);
  st->add_option("--t", stv->t)->required();
  st->add_option("--n", st_n)->capture_default_str();
  st->add_option("--out", st_out, "output path (default stdout)");
  st->callback([&, stv] {
    action = [&, stv] {
      const double sigma = resolve_sigma(stv->sigma, stv->lambda, stv->epsilon);
      const auto params =
          repulse::analytics::ModelParams::from_sigma(sigma, 0.0, stv->t);
      const KvList config = {{"subcommand", "sample-tree"},
                             {"sigma", num_str(sigma)},
                             {"t", num_str(stv->t)},
                             {"n", std::to_string(st_n)},
                             {"seed", std::to_string(seed)}};
      std::vector<std::string> lines(st_n);
      repulse::par::for_each_index(
          st_n, workers,
          [&](std::size_t i) {
            const auto stream = repulse::rng::derive(seed, "tree", i);
            const auto tree = repulse::qmgw::sample_simplified_tree(params, stream);
            lines[i] = repulse::qmgw::tree_to_jsonl(tree, stream.key(), params);
          },
          16);
      std::string out = stamp(config, seed);
      for (const auto& l : lines) {
        out += l;
        out += '\n';
      }
      emit(st_out, out);
      return 0;
    };
  });

  // ---- sample-limit ----
  auto* sl = app.add_subcommand("sample-limit", "limiting tree sampler (JSONL)");
  double sl_horizon = 0.0;
  std::size_t sl_n = 1;
  std::string sl_out;
  sl->add_option("--delta-horizon", sl_horizon)->capture_default_str();
  sl->add_option("--n", sl_n)->capture_default_str();
  sl->add_option("--out", sl_out);
  sl->callback([&] {
    action = [&] {
      const KvList config = {{"subcommand", "sample-limit"},
                             {"delta_horizon", num_str(sl_horizon)},
                             {"n", std::to_string(sl_n)},
                             {"seed", std::to_string(seed)}};
      repulse::analytics::ModelParams params;
      params.horizon = sl_horizon;
      std::vector<std::string> lines(sl_n);
      repulse::par::for_each_index(
          sl_n, workers,
          [&](std::size_t i) {
            const auto stream = repulse::rng::derive(seed, "limit", i);
            const auto tree = repulse::qmgw::sample_limiting_tree(sl_horizon, stream);
            lines[i] = repulse::qmgw::tree_to_jsonl(tree, stream.key(), params);
          },
          16);
      std::string out = stamp(config, seed);
      for (const auto& l : lines) {
        out += l;
        out += '\n';
      }
      emit(sl_out, out);
      return 0;
    };
  });

  // ---- simulate-full ----
  auto* sf = app.add_subcommand("simulate-full",
                                "spatial simulation with proximity penalty (CSV)");
  repulse::fullbbm::FullParams fp;
  fp.horizon = kNaN;
  std::size_t sf_n = 1;
  std::string sf_out;
  sf->add_option("--lambda", fp.lambda)->capture_default_str();
  sf->add_option("--epsilon", fp.epsilon)->capture_default_str();
  sf->add_option("--p0", fp.p0)->capture_default_str();
  sf->add_option("--t", fp.horizon)->required();
  sf->add_option("--dt", fp.dt)->capture_default_str();
  sf->add_option("--cap", fp.particle_cap)->capture_default_str();
  sf->add_option("--n", sf_n)->capture_default_str();
  sf->add_option("--out", sf_out);
  sf->callback([&] {
    action = [&] {
      const KvList config = {{"subcommand", "simulate-full"},
                             {"lambda", num_str(fp.lambda)},
                             {"epsilon", num_str(fp.epsilon)},
                             {"p0", num_str(fp.p0)},
                             {"t", num_str(fp.horizon)},
                             {"dt", num_str(fp.dt)},
                             {"cap", std::to_string(fp.particle_cap)},
                             {"n", std::to_string(sf_n)},
                             {"seed", std::to_string(seed)}};
      std::vector<std::string> rows(sf_n);
      repulse::par::for_each_index(
          sf_n, workers,
          [&](std::size_t i) {
            const auto stream = repulse::rng::derive(seed, "bbm", i);
            const auto real = repulse::fullbbm::simulate_bbm(fp, stream);
            rows[i] = repulse::fullbbm::realization_csv_row(real, stream.key(), fp);
          },
          4);
      std::string out = stamp(config, seed);
      out += repulse::fullbbm::realization_csv_header();
      out += '\n';
      for (const auto& r : rows) {
        out += r;
        out += '\n';
      }
      emit(sf_out, out);
      return 0;
    };
  });

  // ---- fkpp ----
  auto* fkc = app.add_subcommand("fkpp", "reaction-diffusion front solver");
  fkc->require_subcommand(1);

  auto* solve = fkc->add_subcommand("solve", "solve and export snapshots");
  double fs_sigma = kNaN, fs_tend = kNaN;
  std::vector<double> fs_snaps;
  repulse::fkpp::SolverOptions fs_opt;
  std::string fs_reaction = "decaying";
  std::string fs_outdir = ".";
  bool fs_regime = false;
  double fs_delta = 0.5, fs_Delta = 0.1, fs_wave_tol = 0.02, fs_bracket_tol = 0.02;
  solve->add_option("--sigma", fs_sigma);
  solve->add_option("--t-end", fs_tend)->required();
  solve->add_option("--snapshots", fs_snaps)->delimiter(',');
  solve->add_option("--reaction", fs_reaction, "decaying | one")->capture_default_str();
  solve->add_option("--x-min", fs_opt.grid.x_min)->capture_default_str();
  solve->add_option("--x-max", fs_opt.grid.x_max)->capture_default_str();
  solve->add_option("--dx", fs_opt.grid.dx)->capture_default_str();
  solve->add_option("--dt", fs_opt.grid.dt)->capture_default_str();
  solve->add_flag("--moving-window", fs_opt.moving_window);
  solve->add_flag("--regime", fs_regime, "append regime snapshot times and write a bracket report");
  solve->add_option("--delta", fs_delta)->capture_default_str();
  solve->add_option("--Delta", fs_Delta)->capture_default_str();
  solve->add_option("--wave-tol", fs_wave_tol)->capture_default_str();
  solve->add_option("--bracket-tol", fs_bracket_tol)->capture_default_str();
  solve->add_option("--out-dir", fs_outdir)->capture_default_str();
  solve->callback([&] {
    action = [&] {
      namespace fk = repulse::fkpp;
      const bool decaying = fs_reaction == "decaying";
      if (!decaying && fs_reaction != "one")
        throw std::domain_error("--reaction must be decaying or one");
      if (decaying) need(fs_sigma, "--sigma");
      const auto reaction = decaying ? fk::ReactionProfile::decaying(fs_sigma)
                                     : fk::ReactionProfile::constant_one();
      std::vector<double> times = fs_snaps;
      if (fs_regime) {
        if (!decaying) throw std::domain_error("--regime needs the decaying reaction");
        const double tau = fk::tau_delta(fs_sigma, fs_delta);
        const double T = fk::T_Delta(fs_sigma, fs_Delta);
        if (!(fs_tend > T))
          throw std::domain_error("--t-end must exceed T_Delta for --regime");
        times.insert(times.end(), {tau, 0.5 * (tau + T), T, fs_tend});
      }
      if (times.empty()) times.push_back(fs_tend);
      KvList config = {{"subcommand", "fkpp-solve"},
                       {"reaction", fs_reaction},
                       {"t_end", num_str(fs_tend)},
                       {"x_min", num_str(fs_opt.grid.x_min)},
                       {"x_max", num_str(fs_opt.grid.x_max)},
                       {"dx", num_str(fs_opt.grid.dx)},
                       {"dt", num_str(fs_opt.grid.dt)},
                       {"seed", std::to_string(seed)}};
      if (decaying) config.emplace_back("sigma", num_str(fs_sigma));

      const auto snaps = fk::solve_tdfkpp(reaction, fs_tend, times, fs_opt);
      std::filesystem::create_directories(fs_outdir);
      for (const auto& f : snaps) {
        std::ostringstream name;
        name << fs_outdir << "/snapshot_t" << std::setprecision(6) << f.time
             << ".csv";
        emit(name.str(), stamp(config, seed) + fk::snapshot_csv(f));
      }
      if (fs_regime) {
        fk::SolverOptions wopt;
        wopt.grid = {-45.0, 45.0, 0.05, 5e-3};
        wopt.moving_window = true;
        const auto wave_run = fk::solve_tdfkpp(fk::ReactionProfile::constant_one(),
                                               400.0, {400.0}, wopt);
        const auto wave = fk::extract_wave(wave_run, 400.0);
        const auto report = fk::regime_report(fs_sigma, fs_delta, fs_Delta,
                                              snaps, wave, fs_wave_tol,
                                              fs_bracket_tol);
        std::ostringstream body;
        body << "{\"config_hash\":\"" << repulse::io::config_hash(config)
             << "\",\"seed\":" << seed << ",\"report\":" << report.to_json()
             << "}\n";
        emit(fs_outdir + "/regime_report.json", body.str());
        std::cout << "regime report: "
                  << (report.all_pass() ? "all brackets hold" : "violations found")
                  << " (" << fs_outdir << "/regime_report.json)\n";
      }
      return 0;
    };
  });

  auto* wavec = fkc->add_subcommand("wave", "long constant-g run; export the centered profile");
  double fw_at = 400.0;
  std::string fw_out;
  wavec->add_option("--at", fw_at, "extraction time")->capture_default_str();
  wavec->add_option("--out", fw_out);
  wavec->callback([&] {
    action = [&] {
      namespace fk = repulse::fkpp;
      fk::SolverOptions wopt;
      wopt.grid = {-45.0, 45.0, 0.05, 5e-3};
      wopt.moving_window = true;
      const KvList config = {{"subcommand", "fkpp-wave"},
                             {"at", num_str(fw_at)},
                             {"seed", std::to_string(seed)}};
      const auto run = fk::solve_tdfkpp(fk::ReactionProfile::constant_one(),
                                        fw_at, {fw_at}, wopt);
      const auto wave = fk::extract_wave(run, fw_at);
      std::ostringstream csv;
      csv << stamp(config, seed) << "x,v\n" << std::setprecision(17);
      for (std::size_t j = 0; j < wave.profile.values.size(); ++j)
        csv << wave.profile.x_at(j) << ',' << wave.profile.values[j] << '\n';
      emit(fw_out, csv.str());
      std::cout << std::setprecision(10) << "residual " << wave.residual
                << ", right slope " << wave.right_tail.slope << " (shift "
                << wave.right_tail.shift << ", C=" << wave.right_tail.c_factor
                << "), left slope " << wave.left_tail.slope << " (C="
                << wave.left_tail.c_factor << ")\n";
      return 0;
    };
  });

  // ---- death ----
  auto* death = app.add_subcommand("death", "branching/death closed forms");
  death->require_subcommand(1);
  auto* deval = death->add_subcommand("eval", "print one formula value");
  std::string d_formula;
  double d_sigma = kNaN, d_p0 = kNaN, d_t = kNaN, d_gamma = kNaN;
  deval->add_option("--formula", d_formula)->required();
  deval->add_option("--sigma", d_sigma);
  deval->add_option("--p0", d_p0);
  deval->add_option("--t", d_t);
  deval->add_option("--gamma", d_gamma);
  deval->callback([&] {
    action = [&] {
      namespace dm = repulse::deathmodel;
      const double s = need(d_sigma, "--sigma");
      const double p = need(d_p0, "--p0");
      double value = kNaN;
      if (d_formula == "partition_v")
        value = dm::partition_v_death(s, p, need(d_t, "--t"));
      else if (d_formula == "generating_w")
        value = dm::generating_w(s, p, need(d_t, "--t"), need(d_gamma, "--gamma"));
      else if (d_formula == "mean_n")
        value = dm::mean_n_death(s, p, need(d_t, "--t"));
      else if (d_formula == "u_direct")
        value = dm::u_sigma_direct(s, p, need(d_t, "--t"));
      else if (d_formula == "decay_rate")
        value = dm::decay_rate(s, p);
      else if (d_formula == "v_plus")
        value = dm::fixpoints(s, p).v_plus;
      else if (d_formula == "v_minus")
        value = dm::fixpoints(s, p).v_minus;
      else if (d_formula == "discriminant")
        value = dm::fixpoints(s, p).discriminant;
      else
        throw std::domain_error("unknown formula: " + d_formula);
      std::cout << num_str(value) << '\n';
      return 0;
    };
  });

  // ---- validate ----
  auto* val = app.add_subcommand("validate", "run the acceptance suite");
  bool v_quick = false;
  val->add_flag("--quick", v_quick, "reduced sample sizes (smoke run)");
  val->callback([&] {
    action = [&] {
      const auto results = repulse::validate::run_all(v_quick, workers, seed);
      repulse::validate::print_table(results, std::cout);
      return repulse::validate::all_pass(results) ? 0 : 1;
    };
  });

  // Global options (--seed, --workers, --config) may follow the subcommand.
  std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* a) {
    a->fallthrough();
    for (auto* s : a->get_subcommands([](const CLI::App*) { return true; }))
      enable_fallthrough(s);
  };
  enable_fallthrough(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (config_version != 1) {
    std::cerr << "unsupported config version " << config_version << '\n';
    return 2;
  }
  if (!write_config.empty()) {
    // only explicitly-set options: unset ones would serialize as "" and no
    // longer parse back, breaking the reload round trip
    repulse::io::write_file_atomic(write_config,
                                   app.config_to_str(false, false));
    return 0;
  }

  try {
    return action ? action() : 2;
  } catch (const repulse::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 3;
  } catch (const repulse::NotConvergedError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return 3;
  } catch (const repulse::DomainTooSmallError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
