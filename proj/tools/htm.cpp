// htm: command line front end for the heavy-tailed maxima toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "htm/bounds.hpp"
#include "htm/error.hpp"
#include "htm/experiments.hpp"
#include "htm/selftest.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::string out;
  std::optional<int> workers;
};

struct FamilyFlags {
  std::string family = "pareto";
  double alpha = 2.0;
  double xm = 1.0;
  double mu = 0.0;
  double sigma = 1.0;
  double shape = 0.5;
  double scale = 1.0;
  double rate = 1.0;
  double shift = 0.0;

  htm::TailModel model() const {
    if (family == "pareto") return htm::TailModel::pareto(alpha, xm, shift);
    if (family == "lognormal") return htm::TailModel::lognormal(mu, sigma, shift);
    if (family == "weibull") return htm::TailModel::weibull(shape, scale, shift);
    if (family == "exponential") return htm::TailModel::exponential(rate, shift);
    htm::fail(htm::ErrorCode::ConfigError, "unknown --family '" + family + "'");
  }
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool config_required = true) {
  auto* c = cmd->add_option("--config", f.config, "experiment JSON");
  if (config_required) c->required();
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--reps", f.reps, "replicates (overrides the config)");
  cmd->add_option("--out", f.out, "output path (overrides the config)");
  cmd->add_option("--workers", f.workers, "worker threads; results do not depend on it");
}

void add_family_flags(CLI::App* cmd, FamilyFlags& f) {
  cmd->add_option("--family", f.family, "pareto | lognormal | weibull | exponential");
  cmd->add_option("--alpha", f.alpha);
  cmd->add_option("--xm", f.xm);
  cmd->add_option("--mu", f.mu);
  cmd->add_option("--sigma", f.sigma);
  cmd->add_option("--shape", f.shape);
  cmd->add_option("--scale", f.scale);
  cmd->add_option("--rate", f.rate);
  cmd->add_option("--shift", f.shift);
}

htm::ExperimentConfig load(const RunFlags& f) {
  htm::ExperimentConfig c = htm::load_config(f.config);
  if (f.seed) c.master_seed = *f.seed;
  if (f.reps) c.n_reps = *f.reps;
  if (!f.out.empty()) c.output = f.out;
  c.validate();
  return c;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  htm::require(static_cast<bool>(out), htm::ErrorCode::ConfigError, "cannot write " + path);
  out << content;
  htm::require(static_cast<bool>(out), htm::ErrorCode::ConfigError, "failed writing " + path);
}

int report(const htm::ValidationReport& r, const std::string& out) {
  if (!out.empty()) emit(out, r.to_csv());
  std::cout << r.verdict_json() << "\n";
  return r.pass ? 0 : 1;
}

void error_line(const std::string& code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail probabilities of maxima of heavy-tailed processes over random times"};
  app.require_subcommand(1);

  RunFlags sim_f, approx_f, compare_f, wald_f, lemma_f, stop_f;
  auto* sim = app.add_subcommand("sim", "Monte Carlo estimate of P{M_tau > x}, CSV");
  add_run_flags(sim, sim_f);
  auto* approx = app.add_subcommand("approx", "asymptotic forms from simulated horizons, CSV");
  add_run_flags(approx, approx_f);
  auto* cmp = app.add_subcommand("compare", "empirical tail against the asymptotic forms");
  add_run_flags(cmp, compare_f);

  auto* validate = app.add_subcommand("validate", "numerical checks of the identities and bounds");
  validate->require_subcommand(1);

  FamilyFlags sstar_fam;
  std::vector<double> sstar_grid = htm::default_sstar_grid();
  std::string sstar_out;
  auto* sstar = validate->add_subcommand("sstar", "strong subexponential ratio over a grid");
  add_family_flags(sstar, sstar_fam);
  sstar->add_option("--grid", sstar_grid, "increasing x grid")->delimiter(',');
  sstar->add_option("--out", sstar_out, "report CSV");

  FamilyFlags kesten_fam;
  std::string horizon = "exponential";
  double horizon_param = 1.0;
  double delta = 0.5;
  int n_max = 8;
  htm::KestenValidationOptions kopt;
  std::string kesten_out;
  auto* kesten = validate->add_subcommand("kesten", "n-fold convolution bound on a grid");
  add_family_flags(kesten, kesten_fam);
  kesten->add_option("--horizon", horizon, "exponential | deterministic");
  kesten->add_option("--horizon-param", horizon_param, "rate or period of the horizon law");
  kesten->add_option("--delta", delta);
  kesten->add_option("--n-max", n_max);
  kesten->add_option("--step", kopt.step, "grid step (default 0.01 a+)");
  kesten->add_option("--cutoff", kopt.cutoff);
  kesten->add_option("--draws", kopt.horizon_draws, "horizon draws");
  kesten->add_option("--c", kopt.c);
  kesten->add_option("--seed", kopt.seed);
  kesten->add_option("--ceiling", kopt.ceiling);
  kesten->add_option("--out", kesten_out, "report CSV");

  auto* wald = validate->add_subcommand("wald", "Wald-type identities for the config's rule");
  add_run_flags(wald, wald_f);

  double epsilon = 0.1;
  double sup_horizon = 0.0;
  auto* lemma = validate->add_subcommand("lemma-sup", "uniform bound on E(X_tau - (E X_1 + eps) tau)");
  add_run_flags(lemma, lemma_f);
  lemma->add_option("--epsilon", epsilon);
  lemma->add_option("--sup-horizon", sup_horizon, "length of the long paths (default 200/eps)");

  double T = 10.0;
  auto* stop = validate->add_subcommand("stopping-T", "bounded-horizon equivalence of the forms");
  add_run_flags(stop, stop_f);
  stop->add_option("--T", T, "horizon bound");

  auto* self = app.add_subcommand("selftest", "fixture suite of worked examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("ConfigError", e.what());
    return 2;
  }

  try {
    if (sim->parsed()) {
      const auto c = load(sim_f);
      const auto run = htm::mc_tail_estimate(c, htm::resolve_workers(sim_f.workers));
      emit(c.output, htm::tail_csv(run.rows, {}));
      return 0;
    }
    if (approx->parsed()) {
      const auto c = load(approx_f);
      emit(c.output, htm::approx_csv(c, htm::resolve_workers(approx_f.workers)));
      return 0;
    }
    if (cmp->parsed()) {
      const auto c = load(compare_f);
      const auto res = htm::compare(c, htm::resolve_workers(compare_f.workers));
      emit(c.output, htm::tail_csv(res.run.rows, res.forms));
      std::ostream& summary = c.output.empty() ? std::cerr : std::cout;
      for (const auto& s : res.summary) {
        summary << htm::summary_json(s) << "\n";
        if (s.rows_outside_regime > 0) {
          std::cerr << "note: " << s.rows_outside_regime << " x value(s) fall outside the regime "
                    << "guard for " << htm::to_string(s.form) << "\n";
        }
      }
      return 0;
    }
    if (sstar->parsed()) return report(htm::validate_sstar(sstar_fam.model(), sstar_grid), sstar_out);
    if (kesten->parsed()) {
      htm::HorizonLaw law = htm::SpacingModel::exponential(horizon_param);
      if (horizon == "deterministic") {
        law = htm::SpacingModel::deterministic(horizon_param);
      } else if (horizon != "exponential") {
        htm::fail(htm::ErrorCode::ConfigError, "unknown --horizon '" + horizon + "'");
      }
      return report(htm::validate_kesten(kesten_fam.model(), law, delta, n_max, kopt), kesten_out);
    }
    if (wald->parsed()) {
      const auto c = load(wald_f);
      return report(htm::validate_wald(c.process, c.rule, c.n_reps, c.master_seed, c.caps), c.output);
    }
    if (lemma->parsed()) {
      const auto c = load(lemma_f);
      htm::LemmaSupOptions o;
      o.n_reps = c.n_reps;
      o.seed = c.master_seed;
      o.sup_horizon = sup_horizon;
      o.caps = c.caps;
      return report(htm::validate_lemma_sup(c.process, epsilon, {c.rule}, o), c.output);
    }
    if (stop->parsed()) {
      const auto c = load(stop_f);
      htm::StoppingTOptions o;
      o.n_reps = c.n_reps;
      o.seed = c.master_seed;
      o.caps = c.caps;
      return report(htm::validate_stopping_T(c.process, {c.rule}, T, c.x_grid, o), c.output);
    }
    if (self->parsed()) {
      int failed = 0;
      for (const auto& r : htm::run_selftest()) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name;
        if (!r.pass) std::cout << ": " << r.detail;
        std::cout << "\n";
        failed += r.pass ? 0 : 1;
      }
      std::cout << (failed == 0 ? "selftest: all checks passed" : "selftest: failures") << "\n";
      return failed == 0 ? 0 : 1;
    }
  } catch (const htm::Error& e) {
    error_line(std::string(htm::to_string(e.code())), e.what());
    return 2;
  } catch (const std::exception& e) {
    error_line("Internal", e.what());
    return 2;
  }
  return 2;
}
