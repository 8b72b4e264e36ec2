#include "deeplin/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>

#include "deeplin/errors.hpp"
#include "deeplin/factor.hpp"
#include "deeplin/project.hpp"
#include "deeplin/scenario.hpp"

namespace deeplin {

namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Mat uniform_matrix(Rng& rng, int d, double lo = -1.0, double hi = 1.0) {
  Mat m(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = uniform(rng, lo, hi);
  return m;
}

// Random matrix with operator norm exactly `norm`.
Mat scaled_direction(Rng& rng, int d, double norm) {
  Mat m = uniform_matrix(rng, d);
  const double s = op_norm(m);
  return s > 0.0 ? Mat(m * (norm / s)) : Mat::Zero(d, d);
}

Mat random_gamma_positive(Rng& rng, int d, double gamma) {
  Vec lam(d);
  for (int k = 0; k < d; ++k) lam(k) = gamma + uniform(rng, 0.0, 2.0);
  const Mat q = random_orthogonal(d, rng());
  return sym(q * lam.asDiagonal() * q.transpose()) + uniform(rng, 0.0, 2.0) * skew(uniform_matrix(rng, d));
}

std::string counts(const CheckReport& r) {
  return std::to_string(r.violations) + "/" + std::to_string(r.instances) + " violations";
}

int relation_violations(const CheckReport& r, const std::string& rel) {
  const auto it = r.breakdown.find(rel);
  return it == r.breakdown.end() ? 0 : it->second;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- scenarios

ScenarioConfig near_identity_config(const fs::path& out) {
  ScenarioConfig c;
  c.id = "near_identity_gd";
  c.target.kind = TargetKind::near_identity;
  c.target.d = 3;
  c.target.excess = 1e-3;
  c.target.seed = 11;
  c.trainer.algorithm = Algorithm::gd;
  c.trainer.L = 10;
  c.trainer.schedule = StepSchedule::of(StepMode::admissible);
  c.trainer.epsilon = 1e-10;
  c.trainer.max_iters = 200000;
  c.checks = {"trace_recurrence"};
  c.trace_csv = (out / (c.id + ".csv")).string();
  c.report_json = (out / (c.id + ".json")).string();
  return c;
}

ScenarioConfig symmetric_config(const fs::path& out) {
  ScenarioConfig c;
  c.id = "symmetric_gd";
  c.target.kind = TargetKind::spd;
  c.target.d = 3;
  c.target.eigenvalues = {0.5, 1.0, 2.0};
  c.target.seed = 5;
  c.trainer.algorithm = Algorithm::gd;
  c.trainer.L = 8;
  c.trainer.gamma = 0.5;
  c.trainer.schedule = StepSchedule::of(StepMode::spectral);
  c.trainer.epsilon = 1e-8;
  c.trainer.max_iters = 100000;
  c.checks = {"commuting_normal", "eigen_recurrence"};
  c.trace_csv = (out / (c.id + ".csv")).string();
  c.report_json = (out / (c.id + ".json")).string();
  return c;
}

ScenarioConfig power_projection_config(const fs::path& out, int max_iters = 1000000) {
  ScenarioConfig c;
  c.id = "power_projection";
  c.target.kind = TargetKind::rotation;
  c.target.d = 3;
  c.target.angles = {M_PI / 6.0};
  c.target.scales = {0.9};
  c.trainer.algorithm = Algorithm::power_projection;
  c.trainer.L = 4;
  c.trainer.gamma = 0.5;
  c.trainer.schedule = StepSchedule::of(StepMode::frobenius, 3.0);
  c.trainer.epsilon = 1e-8;
  c.trainer.max_iters = max_iters;
  c.checks = {"trace_recurrence"};
  c.trace_csv = (out / (c.id + ".csv")).string();
  c.report_json = (out / (c.id + ".json")).string();
  return c;
}

ScenarioConfig floor_config(const fs::path& out, Algorithm alg, double eta, double kappa) {
  ScenarioConfig c;
  c.target.kind = TargetKind::neg_eig_diag;
  c.target.d = 3;
  c.target.lambda = 0.8;
  c.trainer.algorithm = alg;
  c.trainer.L = alg == Algorithm::step_and_project ? 3 : 4;
  c.trainer.psi = 0.9;
  c.trainer.kappa = kappa;
  c.trainer.schedule = StepSchedule::constant(eta);
  c.trainer.max_iters = 10000;
  c.checks = {"failure_floor", "commuting_normal"};
  c.id = std::string("floor_") + to_string(alg) + "_eta" + fmt("%g", eta);
  if (alg == Algorithm::penalty_gd) c.id += "_kappa" + fmt("%g", kappa);
  c.trace_csv = (out / (c.id + ".csv")).string();
  c.report_json = (out / (c.id + ".json")).string();
  return c;
}

// ----------------------------------------------------------------- criteria

using Body = std::function<void(CriterionResult&, const fs::path&)>;

void derivatives(CriterionResult& r, const fs::path&) {
  Rng rng(101);
  CheckReport grad, hess;
  grad.name = "fd_gradient";
  hess.name = "fd_hessian";
  for (int k = 0; k < 50; ++k) {
    const int d = uniform_int(rng, 1, 4), L = uniform_int(rng, 1, 4);
    std::vector<Mat> layers;
    for (int i = 0; i < L; ++i) layers.push_back(uniform_matrix(rng, d));
    const Mat phi = uniform_matrix(rng, d);
    const DeepLinearNet net(std::move(layers));
    grad.merge(fd_gradient_check(net, phi, 1e-5, 1e-6));
    hess.merge(fd_hessian_check(net, phi, 1e-3, 1e-4));
  }
  r.passed = grad.passed() && hess.passed();
  r.detail = "gradient " + counts(grad) + " (worst rel " + sci(grad.worst_metric) + "), hessian " +
             counts(hess) + " (worst abs " + sci(hess.worst_metric) + ")";
  r.checks = {grad, hess};
}

void gradient_bound(CriterionResult& r, const fs::path&) {
  Rng rng(202);
  CheckReport literal, unhalved;
  literal.name = "gradient_lower_bound";
  unhalved.name = "gradient_lower_bound_unhalved";
  for (int k = 0; k < 500; ++k) {
    const int d = uniform_int(rng, 1, 4), L = uniform_int(rng, 1, 4);
    const double a = uniform(rng, 0.0, 0.5);
    std::vector<Mat> layers;
    for (int i = 0; i < L; ++i) {
      layers.push_back(Mat::Identity(d, d) + scaled_direction(rng, d, a * uniform(rng, 0.0, 1.0)));
    }
    const Mat phi = Mat::Identity(d, d) + uniform_matrix(rng, d);
    const DeepLinearNet net(std::move(layers));
    literal.merge(check_gradient_lower_bound(net, phi, LossConvention::halved));
    unhalved.merge(check_gradient_lower_bound(net, phi, LossConvention::unhalved));
  }
  r.passed = literal.passed() && literal.instances == 500;
  r.detail = "loss 1/2||E||^2: " + counts(literal) + ", skipped " + std::to_string(literal.skipped) +
             ", worst bound/||grad||^2 = " + fmt("%.4f", literal.worst_metric);
  r.diagnostics.push_back("same instances with the unhalved loss ||E||^2 and its gradient: " +
                          counts(unhalved) + ", worst bound/||grad||^2 = " +
                          fmt("%.4f", unhalved.worst_metric));
  {
    const DeepLinearNet id = DeepLinearNet::identity(3, 4);
    const Mat phi = Mat::Identity(3, 3) + 0.1 * Mat::Ones(3, 3);
    const LossReport lr = loss(id, phi);
    const double g2 = full_gradient(id, phi).squared_norm();
    r.diagnostics.push_back("identity layers, d=3, L=4: ||grad||^2 / (4 L l) = " +
                            fmt("%.6f", g2 / (4.0 * 4 * lr.loss)) + " with l = 1/2||E||^2");
  }
  r.checks = {literal, unhalved};
}

void hessian_bound(CriterionResult& r, const fs::path&) {
  Rng rng(303);
  CheckReport rep;
  rep.name = "hessian_upper_bound";
  for (int k = 0; k < 200; ++k) {
    const int d = uniform_int(rng, 1, 3), L = uniform_int(rng, 1, 4);
    std::vector<Mat> layers;
    double z = 0.0;
    for (int i = 0; i < L; ++i) {
      layers.push_back(Mat::Identity(d, d) + scaled_direction(rng, d, uniform(rng, 0.0, 1.5)));
      z = std::max(z, op_norm(layers.back()) - 1.0);
    }
    const Mat phi = scaled_direction(rng, d, uniform(rng, 0.0, 1.0) * std::pow(1.0 + z, L));
    rep.merge(check_hessian_upper_bound(DeepLinearNet(std::move(layers)), phi));
  }
  r.passed = rep.passed() && rep.instances == 200;
  r.detail = counts(rep) + ", skipped " + std::to_string(rep.skipped) + ", worst ||H||/bound = " +
             sci(rep.worst_metric);
  r.checks = {rep};
}

void near_identity_gd(CriterionResult& r, const fs::path& out) {
  const ScenarioRun run = run_scenario(near_identity_config(out));
  const TrainingTrace& tr = run.trace;
  const CheckReport& rec = run.report.checks.at(0);
  const int L = tr.L;

  double rho_max = 0.0;
  int halved_violations = 0;
  for (std::size_t t = 0; t + 1 < tr.records.size(); ++t) {
    const double eta = tr.step_sizes[t];
    const double decay = eta * L * std::pow(1.0 - tr.records[t].radius, 2.0 * L);
    rho_max = std::max(rho_max, 1.0 - 2.0 * decay);
    if (tr.records[t + 1].loss > (1.0 - decay) * tr.records[t].loss + kBoundSlack) ++halved_violations;
  }
  const double l0 = tr.records.front().loss;
  const int budget = static_cast<int>(std::ceil(std::log(l0 / 1e-10) / -std::log(rho_max)));
  const bool converged = tr.status == TerminalStatus::converged;
  const int radius_v = relation_violations(rec, "radius_growth");
  const int loss_v = relation_violations(rec, "loss_contraction");

  r.passed = converged && tr.iterations() <= budget && rec.passed() && rec.skipped == 0;
  r.detail = std::string(to_string(tr.status)) + " at t=" + std::to_string(tr.iterations()) +
             " (budget " + std::to_string(budget) + "), final loss " + sci(tr.last().loss) +
             ", radius recurrence " + std::to_string(radius_v) + " violations, loss factor " +
             "1-2 eta L (1-R)^{2L}: " + std::to_string(loss_v) + " violations over " +
             std::to_string(tr.iterations()) + " steps";
  if (rec.worst) {
    r.diagnostics.push_back("worst loss-factor excess at t=" +
                            std::to_string(rec.worst->inputs.value("t", -1)) + ": lhs " +
                            sci(rec.worst->lhs) + " rhs " + sci(rec.worst->rhs) + " (relative " +
                            sci(-rec.worst->slack / rec.worst->rhs) + ")");
  }
  r.diagnostics.push_back("factor 1 - eta L (1-R)^{2L} matching the 1/2||E||^2 gradient: " +
                          std::to_string(halved_violations) + " violations");
  r.checks = run.report.checks;
}

void symmetric_gd(CriterionResult& r, const fs::path& out) {
  const ScenarioRun run = run_scenario(symmetric_config(out));
  const TrainingTrace& tr = run.trace;
  const bool converged = tr.status == TerminalStatus::converged && tr.last().loss <= 1e-8;
  const auto& comm = run.report.checks.at(0);
  const auto& eig = run.report.checks.at(1);
  r.passed = converged && comm.passed() && eig.passed();
  r.detail = std::string(to_string(tr.status)) + " at t=" + std::to_string(tr.iterations()) +
             ", final loss " + sci(tr.last().loss) + ", equal/commuting " + counts(comm) +
             " (worst " + sci(comm.worst_metric) + "), scalar recurrence " + counts(eig) +
             " (worst " + sci(eig.worst_metric) + ")";
  r.checks = run.report.checks;
}

void power_projection_run(CriterionResult& r, const fs::path& out) {
  const ScenarioRun run = run_scenario(power_projection_config(out));
  const TrainingTrace& tr = run.trace;
  const CheckReport& rec = run.report.checks.at(0);

  // The U(t) bound read with sqrt(l) rather than ||E||_F = sqrt(2 l).
  CheckReport u_literal;
  u_literal.name = "u_bound_sqrt_loss";
  for (const auto& rr : tr.records) {
    ++u_literal.instances;
    const double rhs = std::pow(std::sqrt(rr.loss) + tr.phi_frob_norm, 1.0 / tr.L) + 1e-9;
    if (rr.u_bound > rhs) ++u_literal.violations;
  }

  const bool converged = tr.status == TerminalStatus::converged && tr.iterations() <= 1000000;
  r.passed = converged && rec.passed() && u_literal.passed();
  r.detail = std::string(to_string(tr.status)) + " at t=" + std::to_string(tr.iterations()) +
             ", final loss " + sci(tr.last().loss) + ", recurrences " + counts(rec) +
             " (worst l(t+1/2)/((1-eta L g^2) l(t)) = " + fmt("%.6f", rec.worst_metric) +
             "), U(t) with sqrt(l): " + counts(u_literal);
  for (const auto& w : tr.warnings) r.diagnostics.push_back("trainer warning: " + w);
  r.checks = {rec, u_literal};
}

void factorization(CriterionResult& r, const fs::path&) {
  Rng rng(707);
  const int depths[] = {2, 4, 8, 16};
  int failures = 0, errors = 0;
  double worst_rec = 0.0, worst_bal = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int d = uniform_int(rng, 1, 6), L = depths[uniform_int(rng, 0, 3)];
    const double gamma = uniform(rng, 0.05, 1.0);
    const Mat a = random_gamma_positive(rng, d, gamma);
    try {
      const auto f = balanced_factorization(a, L);
      Mat prod = Mat::Identity(d, d);
      for (const auto& m : f.factors) prod = prod * m;
      const double rec = (prod - a).norm() / a.norm();
      const Vec sa = Eigen::JacobiSVD<Mat>(a).singularValues();
      double bal = 0.0;
      for (const auto& m : f.factors) {
        const Vec si = Eigen::JacobiSVD<Mat>(m).singularValues();
        for (int j = 0; j < d; ++j) bal = std::max(bal, std::abs(si(j) - std::pow(sa(j), 1.0 / L)));
      }
      worst_rec = std::max(worst_rec, rec);
      worst_bal = std::max(worst_bal, bal);
      if (rec > 1e-8 || bal > 1e-8) ++failures;
    } catch (const Error&) {
      ++errors;
    }
  }
  r.passed = failures == 0 && errors == 0;
  r.detail = std::to_string(failures) + " tolerance failures, " + std::to_string(errors) +
             " errors over 200 inputs, worst reconstruction " + sci(worst_rec) + ", worst balance " +
             sci(worst_bal);
}

void projection(CriterionResult& r, const fs::path&) {
  Rng rng(808);
  int infeasible = 0, not_idempotent = 0, beaten = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const int d = uniform_int(rng, 1, 5);
    const double gamma = uniform(rng, 0.1, 1.0);
    const Mat a = uniform_matrix(rng, d, -2.0, 2.0);
    const Mat p = project_gamma_positive(a, gamma);
    const double scale = std::max(1.0, p.norm());
    if (min_sym_eigenvalue(p) < gamma - 1e-10 * scale) ++infeasible;
    if ((project_gamma_positive(p, gamma) - p).norm() > 1e-10 * scale) ++not_idempotent;
    const double dist = (a - p).norm();
    for (int s = 0; s < 1000; ++s) {
      Mat f;
      if (s % 2 == 0) {
        f = random_gamma_positive(rng, d, gamma);
      } else {
        // Local samples around the projection, shifted back into the set.
        f = p + uniform(rng, 1e-4, 0.5) * uniform_matrix(rng, d);
        const double shift = gamma - min_sym_eigenvalue(f);
        if (shift > 0.0) f += shift * Mat::Identity(d, d);
      }
      const double gap = (a - f).norm() - dist;
      min_gap = std::min(min_gap, gap);
      if (gap < -1e-12) ++beaten;
    }
  }
  Mat diag(2, 2);
  diag << 3.0, 0.0, 0.0, 0.5;
  Mat expect(2, 2);
  expect << 2.0, 0.0, 0.0, 0.5;
  const double clip_err = (project_identity_ball(diag, {1.0, true}) - expect).norm();

  r.passed = infeasible == 0 && not_idempotent == 0 && beaten == 0 && clip_err <= 1e-12;
  r.detail = "infeasible " + std::to_string(infeasible) + ", non-idempotent " +
             std::to_string(not_idempotent) + ", closer samples " + std::to_string(beaten) +
             "/100000 (min gap " + sci(min_gap) + "), diag(3,0.5) clip error " + sci(clip_err);
}

void floors(CriterionResult& r, const fs::path& out) {
  const double etas[] = {0.01, 0.03, 0.1};
  std::vector<ScenarioConfig> cfgs;
  for (double eta : etas) {
    cfgs.push_back(floor_config(out, Algorithm::gd, eta, 0.0));
    for (double kappa : {0.01, 0.1}) cfgs.push_back(floor_config(out, Algorithm::penalty_gd, eta, kappa));
    cfgs.push_back(floor_config(out, Algorithm::step_and_project, eta, 0.0));
  }
  int bad_runs = 0;
  double min_loss = std::numeric_limits<double>::infinity(), worst_comm = 0.0;
  for (const auto& c : cfgs) {
    const ScenarioRun run = run_scenario(c);
    const auto& rep = run.report;
    const bool ok = rep.status == "floor-confirmed" && run.trace.iterations() == 10000;
    if (!ok) {
      ++bad_runs;
      r.diagnostics.push_back(c.id + ": status " + rep.status + ", min loss " +
                              fmt("%.15g", rep.min_loss) + (rep.message.empty() ? "" : ", " + rep.message));
    }
    min_loss = std::min(min_loss, rep.min_loss);
    worst_comm = std::max(worst_comm, rep.checks.at(1).worst_metric);
    for (const auto& ch : rep.checks) r.checks.push_back(ch);
  }
  r.passed = bad_runs == 0 && min_loss >= 0.32 - 1e-12;
  r.detail = std::to_string(cfgs.size() - bad_runs) + "/" + std::to_string(cfgs.size()) +
             " runs floor-confirmed over 10^4 iterations, min loss " + fmt("%.12f", min_loss) +
             ", worst commutator/equal-layer deviation " + sci(worst_comm);
}

void determinism(CriterionResult& r, const fs::path& out) {
  int compared = 0, differing = 0;
  for (const char* pass : {"a", "b"}) {
    const fs::path dir = out / "determinism" / pass;
    run_scenario(near_identity_config(dir));
    run_scenario(symmetric_config(dir));
    run_scenario(power_projection_config(dir, 3000));
    run_scenario(floor_config(dir, Algorithm::penalty_gd, 0.1, 0.1));
  }
  for (const auto& e : fs::directory_iterator(out / "determinism" / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    const auto other = out / "determinism" / "b" / e.path().filename();
    const std::string x = file_bytes(e.path());
    if (x.empty() || x != file_bytes(other)) {
      ++differing;
      r.diagnostics.push_back("differs: " + e.path().filename().string());
    }
  }
  r.passed = compared == 4 && differing == 0;
  r.detail = std::to_string(compared) + " trace CSVs written twice, " + std::to_string(differing) +
             " differ";
}

struct Criterion {
  int id;
  const char* title;
  double limit;
  Body body;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "derivative correctness", 30.0, derivatives},
      {2, "gradient lower bound", 10.0, gradient_bound},
      {3, "hessian upper bound", 60.0, hessian_bound},
      {4, "near-identity gd convergence", 10.0, near_identity_gd},
      {5, "symmetric target gd", 10.0, symmetric_gd},
      {6, "power projection", 120.0, power_projection_run},
      {7, "balanced factorization", 30.0, factorization},
      {8, "projection optimality", 60.0, projection},
      {9, "failure floors", 60.0, floors},
      {10, "determinism", 120.0, determinism},
  };
  return list;
}

}  // namespace

nlohmann::json to_json(const CriterionResult& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"criterion", r.id},       {"title", r.title},
          {"passed", r.passed},      {"detail", r.detail},
          {"diagnostics", r.diagnostics}, {"seconds", r.seconds},
          {"time_limit", r.time_limit}, {"checks", checks}};
}

const std::vector<int>& all_criteria() {
  static const std::vector<int> ids = [] {
    std::vector<int> v;
    for (const auto& c : criteria()) v.push_back(c.id);
    return v;
  }();
  return ids;
}

std::vector<CriterionResult> verify_all(const std::vector<int>& selection,
                                        const AcceptanceOptions& opts) {
  std::vector<CriterionResult> results;
  for (int id : selection) {
    const auto& list = criteria();
    const auto it = std::find_if(list.begin(), list.end(), [id](const Criterion& c) { return c.id == id; });
    if (it == list.end()) {
      throw Error(ErrorCode::invalid_config, "unknown acceptance criterion " + std::to_string(id));
    }
    CriterionResult r;
    r.id = it->id;
    r.title = it->title;
    r.time_limit = it->limit;
    const auto start = std::chrono::steady_clock::now();
    try {
      fs::create_directories(opts.out_dir);
      it->body(r, opts.out_dir);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("aborted: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.time_limit) {
      r.passed = false;
      r.detail += "; exceeded time limit";
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << ": " << r.detail << " ("
     << fmt("%.2f", r.seconds) << " s, limit " << fmt("%g", r.time_limit) << " s)";
  for (const auto& d : r.diagnostics) os << "\n     note: " << d;
  return os.str();
}

}  // namespace deeplin
