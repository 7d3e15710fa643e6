#include "htm/selftest.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "htm/asymptotics.hpp"
#include "htm/bounds.hpp"
#include "htm/error.hpp"
#include "htm/experiments.hpp"
#include "htm/process.hpp"
#include "htm/random_times.hpp"

namespace htm {
namespace {

class Suite {
 public:
  void check(const std::string& name, const std::function<std::string()>& body) {
    SelfCheck c;
    c.name = name;
    try {
      c.detail = body();
      c.pass = c.detail.empty();
      if (c.pass) c.detail = "ok";
    } catch (const std::exception& e) {
      c.detail = std::string("threw: ") + e.what();
    }
    out.push_back(c);
  }

  std::vector<SelfCheck> out;
};

std::string near(double got, double want, double tol) {
  if (std::abs(got - want) <= tol) return "";
  std::ostringstream os;
  os.precision(17);
  os << "got " << got << ", want " << want << " (tol " << tol << ")";
  return os.str();
}

template <typename F>
std::string throws(ErrorCode code, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == code) return "";
    return "threw " + std::string(to_string(e.code())) + ", want " + std::string(to_string(code));
  }
  return "did not throw " + std::string(to_string(code));
}

std::string all(std::initializer_list<std::string> parts) {
  for (const auto& p : parts) {
    if (!p.empty()) return p;
  }
  return "";
}

std::string same_event(const PathEvent& e, std::int64_t n, double t, double pre, double post,
                       double mx) {
  return all({near(static_cast<double>(e.n), static_cast<double>(n), 0), near(e.t_n, t, 1e-15),
              near(e.x_pre, pre, 1e-15), near(e.x_post, post, 1e-15), near(e.seg_max, mx, 1e-15)});
}

}  // namespace

std::vector<SelfCheck> run_selftest() {
  Suite s;
  const TailModel p2 = TailModel::pareto(2.0, 1.0);

  // distributions
  s.check("tail_bar pareto(2,1) at 2", [&] { return near(p2.tail_bar(2.0), 0.25, 1e-15); });
  s.check("tail_bar below support", [&] { return near(p2.tail_bar(0.5), 1.0, 0.0); });
  s.check("tail_bar degenerate(-1) at 0",
          [] { return near(TailModel::degenerate(-1.0).tail_bar(0.0), 0.0, 0.0); });
  s.check("integrated_tail pareto(2,1) at 4", [&] { return near(p2.integrated_tail(4.0), 0.25, 1e-15); });
  s.check("integrated_tail pareto(2,1) at 0", [&] {
    return all({near(p2.integrated_tail(0.0), 2.0, 1e-15), near(p2.a_plus(), 2.0, 1e-15)});
  });
  s.check("integrated_tail degenerate(-1) at 0",
          [] { return near(TailModel::degenerate(-1.0).integrated_tail(0.0), 0.0, 0.0); });
  s.check("sample pareto(2,1) at u=0.25",
          [&] { return near(p2.sample_from_uniform(0.25), 2.0 / std::sqrt(3.0), 1e-14); });
  s.check("sample exponential(2) at u=0.5", [] {
    return near(TailModel::exponential(2.0).sample_from_uniform(0.5), std::log(2.0) / 2.0, 1e-15);
  });
  s.check("sample degenerate", [] {
    RngStream rng(1);
    const TailModel d = TailModel::degenerate(3.5);
    for (int i = 0; i < 100; ++i) {
      if (d.sample(rng) != 3.5) return std::string("non-constant sample");
    }
    return std::string();
  });
  s.check("sstar exponential(1) at 10",
          [] { return near(sstar_ratio(TailModel::exponential(1.0), 10.0), 5.0, 1e-8); });
  s.check("sstar pareto(2,1) at 1e4", [&] {
    const double r = sstar_ratio(p2, 1e4);
    return r > 0.99 && r < 1.1 ? "" : "ratio " + format_double(r);
  });
  s.check("kesten n=1", [&] {
    const GridTail g = discretize_tail([&](double x) { return p2.tail_bar(x); }, 0.5, 1e-6);
    const KestenReport k = kesten_check(g, 0.5, 1);
    return all({near(k.per_n[0], 1.0 / 1.5, 1e-12), k.c_hat <= 1.0 ? "" : "C_hat above 1"});
  });
  s.check("kesten degenerate(1), n=2", [] {
    const TailModel d = TailModel::degenerate(1.0);
    const GridTail g = discretize_tail([&](double x) { return d.tail_bar(x); }, 0.5, 1e-10);
    const KestenReport k = kesten_check(g, 0.5, 2);
    return near(k.per_n[1], 1.0 / 2.25, 1e-12);
  });

  // processes
  const TailModel down = TailModel::degenerate(-1.0);
  const ProcessSpec walk = ProcessSpec::random_walk(down);
  s.check("next_event random walk", [&] {
    SimState st;
    RngStream rng(1);
    return same_event(next_event(walk, st, rng), 1, 1.0, 0.0, -1.0, 0.0);
  });
  const ProcessSpec crp =
      ProcessSpec::compound_renewal(-1.0, SpacingModel::deterministic(1.0), TailModel::degenerate(0.5));
  s.check("next_event compound renewal", [&] {
    SimState st;
    RngStream rng(1);
    return same_event(next_event(crp, st, rng), 1, 1.0, -1.0, -0.5, 0.0);
  });
  s.check("compound poisson reproducible", [] {
    const ProcessSpec cp = ProcessSpec::compound_poisson(0.0, 1.0, TailModel::pareto(2.0, 1.0, 3.0));
    SimState a, b;
    RngStream ra(42), rb(42);
    for (int i = 0; i < 1000; ++i) {
      const PathEvent ea = next_event(cp, a, ra);
      const PathEvent eb = next_event(cp, b, rb);
      if (ea.t_n != eb.t_n || ea.x_post != eb.x_post || ea.seg_max != eb.seg_max) {
        return std::string("streams diverged");
      }
    }
    return std::string();
  });
  s.check("run_until walk FixedJumpCount(5)", [&] {
    const MaxSample m = run_until(walk, TimeRule::fixed_jump_count(5), 1, 0);
    return all({near(m.tau, 5, 0), near(static_cast<double>(m.n_tau), 5, 0), near(m.m_tau, 0, 0),
                near(m.x_tau, -5, 0)});
  });
  s.check("run_until compound renewal FixedTime(2.5)", [&] {
    const MaxSample m = run_until(crp, TimeRule::fixed_time(2.5), 1, 0);
    return all({near(m.m_tau, 0, 0), near(m.x_tau, -1.5, 1e-15)});
  });

  // random_times
  s.check("FixedTime(2.5) fires in segment 3", [&] {
    RngStream rng(1);
    ProcessSimulator sim(walk, rng);
    RuleState st(TimeRule::fixed_time(2.5), {});
    PathEvent last;
    const PathEvent* lp = nullptr;
    for (int n = 1; n <= 5; ++n) {
      const Segment& seg = sim.open_segment();
      if (auto d = st.decide({seg, lp})) {
        return all({near(static_cast<double>(seg.index), 3, 0), near(d->tau, 2.5, 0)});
      }
      last = sim.close_segment();
      lp = &last;
      st.observe(last);
    }
    return std::string("never fired");
  });
  s.check("FirstPassageBelow(-5) on a descending walk", [&] {
    const MaxSample m = run_until(walk, TimeRule::first_passage_below(-5.0), 1, 0);
    return all({near(m.tau, 5, 0), near(static_cast<double>(m.n_tau), 5, 0)});
  });
  s.check("MinOf with a far independent horizon", [] {
    const ProcessSpec w = ProcessSpec::random_walk(TailModel::pareto(2.0, 1.0, 3.0));
    const TimeRule r = TimeRule::min_of(TimeRule::fixed_jump_count(3),
                                        TimeRule::independent_time(SpacingModel::deterministic(1e9)));
    for (std::uint64_t i = 0; i < 200; ++i) {
      const MaxSample a = run_until(w, r, 9, i);
      const MaxSample b = run_until(w, TimeRule::fixed_jump_count(3), 9, i);
      if (a.tau != b.tau || a.m_tau != b.m_tau || a.n_tau != 3) return std::string("differs");
    }
    return std::string();
  });
  s.check("wald walk FirstPassageBelow(-5)", [&] {
    const WaldReport w = wald_check(walk, TimeRule::first_passage_below(-5.0), 100, 1);
    return all({near(w.first.lhs, -5, 1e-12), near(w.first.rhs, -5, 1e-12)});
  });
  s.check("wald compound poisson FixedTime(3)", [&] {
    const ProcessSpec cp = ProcessSpec::compound_poisson(0.0, 2.0, down);
    const WaldReport w = wald_check(cp, TimeRule::fixed_time(3.0), 20000, 11);
    return std::abs(w.first.z) <= 3.0 ? "" : "z = " + format_double(w.first.z);
  });

  // asymptotics
  s.check("approx_crp zero horizons", [&] {
    const std::vector<std::int64_t> z(10, 0);
    return near(approx_crp(4.0, z, 1.0, p2).value, 0.0, 0.0);
  });
  s.check("approx_crp {1,3}", [&] {
    const std::vector<std::int64_t> v{1, 3};
    return near(approx_crp(4.0, v, 1.0, p2).value, 0.5 * ((0.25 - 0.2) + (0.25 - 1.0 / 7.0)), 1e-15);
  });
  s.check("approx_crp large horizon", [&] {
    const std::vector<std::int64_t> v{1'000'000'000};
    return near(approx_crp(4.0, v, 1.0, p2).value, 0.25, 1e-8);
  });
  s.check("approx_fixed_time", [&] {
    return all({near(approx_fixed_time(4.0, 0.0, 1.0, p2).value, 0.0, 0.0),
                near(approx_fixed_time(4.0, 4.0, 1.0, p2).value, 0.125, 1e-15)});
  });
  s.check("approx_rw {1, 1e6}", [&] {
    const std::vector<std::int64_t> v{1, 1'000'000};
    const double want = 0.5 * ((0.1 - 1.0 / 11.0) + (0.1 - 1.0 / (10.0 + 1e6)));
    return near(approx_rw(10.0, v, 1.0, p2).value, want, 1e-15);
  });
  s.check("approx_rw rejects tau = 0", [&] {
    const std::vector<std::int64_t> v{0, 2};
    return throws(ErrorCode::SampleBelowOne, [&] { approx_rw(10.0, v, 1.0, p2); });
  });
  s.check("approx_poisson zero horizons", [&] {
    const std::vector<double> t(5, 0.0);
    const std::vector<std::int64_t> n(5, 0);
    return all({near(approx_poisson(50, HorizonSamples::jump_counts(n), 1, 1, p2, Form::Poisson_NTau).value, 0, 0),
                near(approx_poisson(50, HorizonSamples::times(t), 1, 1, p2, Form::Poisson_LambdaTau).value, 0, 0),
                near(approx_poisson(50, HorizonSamples::times(t), 1, 1, p2, Form::Poisson_X1Tail).value, 0, 0)});
  });
  s.check("approx_poisson light tail rejected", [] {
    const std::vector<double> t{1.0};
    return throws(ErrorCode::InvalidModel, [&] {
      approx_poisson(5, HorizonSamples::times(t), 1, 1, TailModel::degenerate(-1), Form::Poisson_X1Tail);
    });
  });
  s.check("approx_poisson form mismatch", [&] {
    const std::vector<double> t{1.0};
    return throws(ErrorCode::FormMismatch, [&] {
      approx_poisson(5, HorizonSamples::times(t), 1, 1, p2, Form::Poisson_NTau);
    });
  });
  s.check("approx_levy closed form", [&] {
    const ProcessSpec lv = ProcessSpec::levy(-3.0, 0.0, 1.0, p2);
    const std::vector<double> t(4, 10.0);
    const double m = lv.m();
    const double want = (1.0 / m) * (p2.integrated_tail(100) - p2.integrated_tail(100 + 10 * m));
    return all({near(approx_levy(100, t, m, 1.0, p2).value, want, 1e-15),
                near(approx_levy(100, t, m, [&](double y) { return p2.tail_bar(y); }).value, want,
                     1e-10 * want)});
  });

  // bounds
  s.check("validate_sstar pareto passes", [&] {
    return validate_sstar(p2, default_sstar_grid()).pass ? "" : "failed";
  });
  s.check("validate_sstar exponential fails", [] {
    return validate_sstar(TailModel::exponential(1.0), {10, 20, 40, 80, 160}).pass ? "passed" : "";
  });
  s.check("validate_sstar degenerate rejected", [] {
    return throws(ErrorCode::InvalidModel,
                  [] { validate_sstar(TailModel::degenerate(1.0), default_sstar_grid()); });
  });
  s.check("validate_kesten n_max=1", [&] {
    KestenValidationOptions o;
    o.step = 0.5;
    o.cutoff = 1e-6;
    o.horizon_draws = 50;
    const auto r = validate_kesten(p2, SpacingModel::exponential(1.0), 0.5, 1, o);
    return r.pass && r.rows[0].ratio <= 1.0 ? "" : r.reason;
  });
  s.check("lemma-sup degenerate compound poisson", [] {
    const ProcessSpec cp = ProcessSpec::compound_poisson(0.0, 1.0, TailModel::degenerate(-1.0));
    LemmaSupOptions o;
    o.n_reps = 200;
    o.sup_horizon = 50;
    const auto r = validate_lemma_sup(cp, 0.1, {TimeRule::fixed_time(0.0), TimeRule::fixed_time(4.0)}, o);
    return all({near(r.rows[1].lhs, 0.0, 0.0), near(r.rows[2].lhs, -0.4, 4.0 * r.rows[2].stat),
                r.pass ? "" : "failed"});
  });

  // experiments
  s.check("mc degenerate walk", [&] {
    ExperimentConfig c{walk, TimeRule::fixed_jump_count(5), {0.5}, 1000, 1};
    const McResult r = mc_tail_estimate(c);
    return near(r.rows[0].p_hat, 0.0, 0.0);
  });
  s.check("mc two-point walk", [] {
    const ProcessSpec w =
        ProcessSpec::random_walk(TailModel::two_point(0.5, 1.0, -1.0), {.require_negative_drift = false});
    ExperimentConfig c{w, TimeRule::fixed_jump_count(2), {0.5}, 100'000, 3};
    const McResult r = mc_tail_estimate(c);
    return r.rows[0].ci_lo <= 0.5 && 0.5 <= r.rows[0].ci_hi ? "" : "0.5 outside the Wilson interval";
  });
  s.check("mc reproducible", [] {
    const ProcessSpec cp = ProcessSpec::compound_poisson(0.0, 1.0, TailModel::pareto(2.0, 1.0, 3.0));
    ExperimentConfig c{cp, TimeRule::independent_time(SpacingModel::exponential(1.0)), {1, 5, 25}, 5000, 7};
    const auto a = compare(c, 1);
    const auto b = compare(c, 3);
    return tail_csv(a.run.rows, a.forms) == tail_csv(b.run.rows, b.forms) ? "" : "outputs differ";
  });
  return s.out;
}

}  // namespace htm
