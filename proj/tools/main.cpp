// honeycomb: command-line driver for the honeycomb Hubbard toolkit.
// Exit codes: 0 success, 1 usage, 2 verification failure, 3 capacity.

#include "honeycomb/ed.hpp"
#include "honeycomb/grassmann.hpp"
#include "honeycomb/kernels.hpp"
#include "honeycomb/relativistic.hpp"
#include "honeycomb/schwinger.hpp"
#include "honeycomb/trees.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <clocale>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace honeycomb;
using json = nlohmann::ordered_json;

namespace {

constexpr int kUsage = 1, kVerification = 2, kCapacity = 3;
constexpr const char* kSchema = "honeycomb/1";

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  int L = 12;
  double beta = 16.0;
  int M = 1024;
  double U = 0.0;
  double gamma = 2.0;
  double a0 = 0.4;
  int h_min = -6;
  std::string format = "csv";
  unsigned seed = 1;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  CutoffSpec cutoff() const { return {gamma, a0, "quintic"}; }
  LatticeSpec lattice() const { return LatticeSpec::honeycomb(L); }

  void validate() const {
    if (L < 1) throw UsageError("L >= 1 required");
    if (!(beta > 0)) throw UsageError("beta > 0 required");
    if (M < 1) throw UsageError("M >= 1 required");
    if (h_min > 0) throw UsageError("h-min <= 0 required");
    if (workers < 1) throw UsageError("workers >= 1 required");
    if (format != "csv" && format != "json") throw UsageError("format must be csv or json");
    try {
      cutoff().validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json header(const std::string& command, const RunConfig& c) {
  return json{{"schema", kSchema},
              {"command", command},
              {"config",
               {{"L", c.L}, {"beta", c.beta}, {"M", c.M}, {"U", c.U}, {"gamma", c.gamma}, {"a0", c.a0},
                {"h_min", c.h_min}, {"seed", c.seed}}}};
}

// Tabular output: CSV rows or a JSON object with named columns.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void row(std::vector<double> values) { rows_.push_back(std::move(values)); }

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
      os << '\n';
    }
  }
  json to_json() const {
    json rows = json::array();
    for (const auto& r : rows_) rows.push_back(r);
    return json{{"columns", columns_}, {"rows", rows}};
  }
  void emit(std::ostream& os, const RunConfig& c, json doc) const {
    if (c.format == "csv") return write_csv(os);
    doc["table"] = to_json();
    os << doc.dump(2) << '\n';
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks)
    a.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  return a;
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

// ---------------------------------------------------------------------------------------------

int cmd_dispersion(const RunConfig& c) {
  const auto spec = c.lattice();
  Table t({"m1", "m2", "k1", "k2", "dispersion"});
  for (int m1 = 0; m1 < c.L; ++m1)
    for (int m2 = 0; m2 < c.L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2});
      t.row({double(m1), double(m2), k(0), k(1), dispersion(k)});
    }
  t.emit(std::cout, c, header("dispersion", c));
  return 0;
}

int cmd_free_propagator(const RunConfig& c, double x0) {
  const auto spec = c.lattice();
  // closed form next to the 2M-frequency sum
  Table t({"x0", "n1", "n2", "rho", "rho_prime", "re", "im", "re_matsubara", "im_matsubara"});
  for (int n1 = 0; n1 < c.L; ++n1)
    for (int n2 = 0; n2 < c.L; ++n2) {
      const SpaceTimePoint x{x0, n1, n2};
      const Mat2c g = propagator_position(x, c.beta, spec);
      const Mat2c m = matsubara_truncated(x, c.beta, spec, c.M, TailTreatment::subtract_leading);
      for (int r = 0; r < 2; ++r)
        for (int rp = 0; rp < 2; ++rp)
          t.row({x0, double(n1), double(n2), double(r), double(rp), g(r, rp).real(), g(r, rp).imag(), m(r, rp).real(),
                 m(r, rp).imag()});
    }
  t.emit(std::cout, c, header("free-propagator", c));
  return 0;
}

int cmd_flow(const RunConfig& c, bool beta_given) {
  const auto cut = c.cutoff();
  const double beta = beta_given ? c.beta : flow_beta(c.h_min, cut);
  const auto res = second_order_flow(c.U, beta, c.lattice(), cut, c.h_min);
  Table t({"h", "zeta", "c", "z", "delta"});
  for (const auto& r : res.rows) t.row({double(r.h), r.zeta, r.c, r.z, r.delta});
  auto doc = header("flow", c);
  doc["beta"] = beta;
  t.emit(std::cout, c, doc);
  return 0;
}

int cmd_self_energy(const RunConfig& c, int frequencies, const std::string& summary_path) {
  const SecondOrderKernel K(c.U, c.beta, c.lattice(), c.cutoff());
  const auto grid = second_order_kernel(K, std::nullopt, frequencies, c.workers);
  Table t({"n0", "m1", "m2", "rho", "rho_prime", "re", "im"});
  for (int n0 = -frequencies; n0 < frequencies; ++n0)
    for (int m1 = 0; m1 < c.L; ++m1)
      for (int m2 = 0; m2 < c.L; ++m2) {
        const Mat2c& w = grid.at(m1, m2, n0);
        for (int r = 0; r < 2; ++r)
          for (int rp = 0; rp < 2; ++rp)
            t.row({double(n0), double(m1), double(m2), double(r), double(rp), w(r, rp).real(), w(r, rp).imag()});
      }
  const auto checks = symmetry_relations(grid);
  json summary = header("self-energy", c);
  summary["frequencies"] = frequencies;
  summary["symmetry"] = checks_json(checks);
  summary["pass"] = all_pass(checks);
  if (c.format == "json") {
    summary["table"] = t.to_json();
    std::cout << summary.dump(2) << '\n';
  } else {
    t.write_csv(std::cout);
    if (summary_path == "-") {
      std::cerr << summary.dump(2) << '\n';
    } else {
      std::FILE* f = std::fopen(summary_path.c_str(), "w");
      if (!f) throw std::runtime_error("cannot write " + summary_path);
      std::fputs((summary.dump(2) + "\n").c_str(), f);
      std::fclose(f);
    }
  }
  return 0;
}

int cmd_two_point(const RunConfig& c) {
  const auto cut = c.cutoff();
  const int floor = h_beta(c.beta, 1.0, cut);
  const TwoPointAssembly a(second_order_flow(c.U, c.beta, c.lattice(), cut, floor));
  json doc = header("two-point", c);
  doc["floor"] = floor;
  json fits = json::array();
  const Vec2d axes[2] = {Vec2d(1, 0), Vec2d(0, 1)};
  for (int omega : {1, -1})
    for (int i = 0; i < 2; ++i) {
      std::vector<DiracSample> s;
      for (const auto& kp : dirac_ray(c.beta, axes[i], 1e-5, 0.05, 16)) s.push_back({kp, a.quasi_particle(kp, omega)});
      const auto fit = dirac_fit(s, omega, 2 * kPi / c.beta);
      fits.push_back({{"omega", omega}, {"axis", i + 1}, {"Z", fit.Z}, {"vF", fit.vF}, {"Z_error", fit.Z_error},
                      {"vF_error", fit.vF_error}, {"theta_fit", fit.theta_fit}, {"max_residual", fit.max_residual},
                      {"poor_fit", fit.poor_fit}});
    }
  doc["dirac_fits"] = fits;
  std::vector<int> hs;
  for (int h = 0; h >= floor; --h) hs.push_back(h);
  const auto qb = q_bound(a, hs);
  doc["q_bound"] = {{"scales", qb.scales}, {"max_deviation", qb.max_deviation}, {"theta", qb.theta}, {"C", qb.C}};
  json pts = json::array();
  const auto spec = c.lattice();
  for (int m1 = 0; m1 < c.L; ++m1)
    for (int m2 = 0; m2 < c.L; ++m2) {
      const MomentumPoint k{kPi / c.beta, grid_momentum(spec, {m1, m2})};
      const Mat2c S = a.two_point(k);
      pts.push_back({{"m1", m1}, {"m2", m2}, {"k0", k.k0},
                     {"S", {S(0, 0).real(), S(0, 0).imag(), S(0, 1).real(), S(0, 1).imag(), S(1, 0).real(),
                            S(1, 0).imag(), S(1, 1).real(), S(1, 1).imag()}}});
    }
  doc["two_point_lowest_frequency"] = pts;
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_ed(const RunConfig& c) {
  const ed::ExactDiagonalization e({c.L, c.U, true, false}, c.workers);
  json doc = header("ed", c);
  doc["ground_energy"] = e.ground_energy();
  doc["ground_spin"] = e.ground_spin();
  doc["density"] = e.density(c.beta);
  doc["specific_free_energy"] = e.specific_free_energy(c.beta);
  if (c.format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else {
    Table t({"U", "beta", "ground_energy", "ground_spin", "density", "specific_free_energy"});
    t.row({c.U, c.beta, e.ground_energy(), e.ground_spin(), e.density(c.beta), e.specific_free_energy(c.beta)});
    t.write_csv(std::cout);
  }
  return 0;
}

int cmd_trees(const RunConfig& c, int h, int n_max, double theta) {
  if (n_max > trees::kMaxEndpoints)
    throw CapacityError("trees: n <= " + std::to_string(trees::kMaxEndpoints) + " endpoints supported");
  if (n_max < 1) throw UsageError("trees: n >= 1 required");
  if (h > 0) throw UsageError("trees: h <= 0 required");
  const auto cut = c.cutoff();
  Table t({"n", "skeletons", "labelled_trees", "geometric_sum", "geometric_sum_limit"});
  for (int n = 1; n <= n_max; ++n) {
    const auto ts = trees::enumerate_trees({h, n, false, 1});
    t.row({double(n), double(trees::count_skeletons(n)), double(ts.size()),
           trees::geometric_tree_sum(ts, cut.gamma, theta), trees::geometric_tree_sum_limit(n, cut.gamma, theta)});
  }
  t.emit(std::cout, c, header("trees", c));
  return 0;
}

// --- verification suites ---------------------------------------------------------------------

std::vector<Check> suite_geometry(const RunConfig& c) {
  const auto spec = c.lattice();
  std::vector<Check> out;
  auto add = [&](std::string name, double v, double tol) { out.push_back({std::move(name), v, tol, v <= tol}); };
  double v = 0;
  for (int w : {1, -1}) v = std::max(v, std::abs(complex_amplitude(fermi_point(w).p)));
  add("|v(p_F)|", v, 1e-12);
  const Vec2d a[2] = {spec.a1, spec.a2}, b[2] = {spec.b1, spec.b2};
  double d = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(b[i].dot(a[j]) - (i == j ? 2 * kPi : 0.0)));
  add("dual basis", d, 1e-12);
  double lin = 0;
  for (double ang : {0.0, 1.0, 2.5, 4.0})
    lin = std::max(lin, std::abs(dispersion_modulus(fermi_point(1).p + 1e-4 * Vec2d(std::cos(ang), std::sin(ang))) / 1e-4 - 1.5));
  add("linear slope 3/2", lin, 1e-3);
  return out;
}

std::vector<Check> suite_cutoffs(const RunConfig& c) {
  const auto cut = c.cutoff();
  const auto s = c.lattice();
  double dev = 0;
  for (int m1 = 0; m1 < c.L; ++m1)
    for (int m2 = 0; m2 < c.L; ++m2)
      for (int n0 = -4; n0 < 4; ++n0) {
        const MomentumPoint k{matsubara(c.beta, n0), grid_momentum(s, {m1, m2})};
        double total = split_uv_ir(k, cut).f_uv;
        for (int w : {1, -1})
          for (int h = 0; h >= -60; --h) total += slice_f_h(momentum_norm(k.k0, Vec2d(k.k - fermi_point(w).p)), h, cut);
        dev = std::max(dev, std::abs(total - 1));
      }
  const double gap = norm_mod_dual(fermi_point(1).p - fermi_point(-1).p) - 2 * cut.a0 * cut.gamma;
  return {{"partition of unity", dev, 1e-12, dev <= 1e-12}, {"support gap", gap, 0.0, gap > 0}};
}

std::vector<Check> suite_free(const RunConfig& c) {
  const auto spec = c.lattice();
  const Mat2c eq = propagator_position({0.0, 0, 0, TimeSide::left}, c.beta, spec);
  const double e = std::abs(eq(0, 0) + 0.5);
  double anti = 0;
  for (double x0 : {0.1, 0.37 * c.beta})
    anti = std::max(anti, (propagator_position({x0, 1, 0}, c.beta, spec) + propagator_position({x0 + c.beta, 1, 0}, c.beta, spec))
                              .cwiseAbs()
                              .maxCoeff());
  return {{"equal-time diagonal", e, 1e-15, e <= 1e-15}, {"antiperiodicity", anti, 1e-13, anti <= 1e-13}};
}

std::vector<Check> suite_grassmann(const RunConfig& c) {
  using namespace grassmann;
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> d;
  double err = 0;
  for (int trial = 0; trial < 10; ++trial) {
    GaussianSpec<cplx> spec(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) spec(i, j) = {d(rng), d(rng)};
    const std::vector<std::vector<int>> cl{{spec.minus(0), spec.plus(1)}, {spec.minus(1), spec.plus(2)},
                                           {spec.minus(2), spec.plus(0)}};
    err = std::max(err, std::abs(bbf_evaluate(cl, spec).value - cluster_truncated_expectation(cl, spec)));
  }
  return {{"BBF vs partition formula", err, 1e-12, err <= 1e-12}};
}

std::vector<Check> suite_trees(const RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  int bad = 0, seen = 0;
  for (int n = 1; n <= 4; ++n)
    for (const auto& t : trees::enumerate_trees({-3, n, false, 1})) {
      const auto fa = trees::random_field_assignment(t, rng);
      if (!trees::verify_sum_identities(t, fa).all() || !trees::power_counting_bound(t, fa, 0.5).theta_bound) ++bad;
      ++seen;
    }
  bool counts = true;
  for (int n = 1; n <= 5; ++n) counts = counts && trees::count_skeletons(n) <= static_cast<std::uint64_t>(std::pow(4, n));
  return {{"trees failing identities or theta bound (of " + std::to_string(seen) + ")", double(bad), 0.0, bad == 0},
          {"skeleton counts <= 4^n", counts ? 0.0 : 1.0, 0.0, counts}};
}

std::vector<Check> suite_ed(const RunConfig& c) {
  const int L = 2;
  std::vector<Check> out;
  for (double U : {0.0, 0.5, 1.0, 2.0}) {
    const ed::ExactDiagonalization e({L, U, true, false}, c.workers);
    const double rho = std::abs(e.density(c.beta) - 1);
    const double s = std::abs(e.ground_spin());
    out.push_back({"|rho - 1| at U = " + num(U), rho, 1e-12, rho <= 1e-12});
    out.push_back({"ground spin at U = " + num(U), s, 1e-8, s <= 1e-8});
  }
  return out;
}

std::vector<Check> suite_relativistic() {
  const auto g = euclidean_gammas();
  const double a = anticommutator_defect(g);
  const double r = max_difference(rotation_conjugation(kPi / 2, g), rotated_reference(kPi / 2, g));
  return {{"anticommutators", a, 1e-12, a <= 1e-12}, {"rotation identity", r, 1e-12, r <= 1e-12}};
}

std::vector<Check> suite_lemma2(const RunConfig& c) {
  const std::vector<double> betas{8.0, 12.0, 16.0};
  return lemma2_verify(c.U == 0.0 ? 1.0 : c.U, c.lattice(), betas, c.cutoff(), c.workers).checks;
}

int cmd_verify(const RunConfig& c, const std::string& suite) {
  json doc = header("verify", c);
  doc["suite"] = suite;
  json suites = json::object();
  bool ok = true;
  auto run = [&](const std::string& name, const std::vector<Check>& checks) {
    suites[name] = {{"pass", all_pass(checks)}, {"checks", checks_json(checks)}};
    ok = ok && all_pass(checks);
  };
  const bool all = suite == "all";
  if (all || suite == "geometry") run("geometry", suite_geometry(c));
  if (all || suite == "cutoffs") run("cutoffs", suite_cutoffs(c));
  if (all || suite == "free") run("free", suite_free(c));
  if (all || suite == "grassmann") run("grassmann", suite_grassmann(c));
  if (all || suite == "trees") run("trees", suite_trees(c));
  if (all || suite == "ed") run("ed", suite_ed(c));
  if (all || suite == "relativistic") run("relativistic", suite_relativistic());
  if (all || suite == "lemma2") run("lemma2", suite_lemma2(c));
  if (suites.empty()) throw UsageError("unknown suite '" + suite + "'");
  doc["suites"] = suites;
  doc["pass"] = ok;
  std::cout << doc.dump(2) << '\n';
  return ok ? 0 : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"Honeycomb Hubbard model: free theory, multiscale flow, kernels and exact diagonalization"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags override it");

  RunConfig cfg;
  bool beta_given = false;
  app.add_option("--L", cfg.L, "cells per side")->capture_default_str();
  app.add_option_function<double>("--beta", [&](double b) { cfg.beta = b; beta_given = true; }, "inverse temperature")
      ->default_str("16");
  app.add_option("--M", cfg.M, "Matsubara cutoff (2M frequencies)")->capture_default_str();
  app.add_option("--U", cfg.U, "coupling")->capture_default_str();
  app.add_option("--gamma", cfg.gamma, "scale ratio")->capture_default_str();
  app.add_option("--a0", cfg.a0, "infrared radius")->capture_default_str();
  app.add_option("--h-min,--h_min", cfg.h_min, "lowest scale")->capture_default_str();
  app.add_option("--format,--output-format", cfg.format, "csv or json")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--workers", cfg.workers, "worker threads")->capture_default_str();

  auto* dispersion = app.add_subcommand("dispersion", "band energy on the momentum grid");
  std::optional<double> x0;
  auto* free = app.add_subcommand("free-propagator", "closed-form g(x0, n) on the torus");
  free->add_option("--x0", x0, "imaginary time (default beta/4)");
  auto* flow = app.add_subcommand("flow", "second-order running couplings zeta_h, c_h");
  int frequencies = 2;
  std::string summary_path = "-";
  auto* self = app.add_subcommand("self-energy", "O(U^2) kernel on the grid with a symmetry summary");
  self->add_option("--frequencies", frequencies, "Matsubara indices -F..F-1")->capture_default_str();
  self->add_option("--summary", summary_path, "JSON summary path for csv output ('-' = stderr)")->capture_default_str();
  auto* two = app.add_subcommand("two-point", "assembled two-point function with Dirac fits");
  auto* edc = app.add_subcommand("ed", "exact diagonalization of the L x L cluster (L <= 2)");
  int n_max = 4, tree_h = -3;
  double theta = 0.5;
  auto* trees_cmd = app.add_subcommand("trees", "tree counts and geometric sums");
  trees_cmd->add_option("--n", n_max, "largest order")->capture_default_str();
  trees_cmd->add_option("--root-scale", tree_h, "root scale h")->capture_default_str();
  trees_cmd->add_option("--theta", theta, "theta")->capture_default_str();
  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "geometry | cutoffs | free | grassmann | trees | ed | relativistic | lemma2 | all; "
                  "ed runs the 2 x 2 cluster, lemma2 runs U = 1 when --U is 0")
      ->required();
  for (auto* s : app.get_subcommands({})) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    cfg.validate();
    if (*dispersion) return cmd_dispersion(cfg);
    if (*free) return cmd_free_propagator(cfg, x0.value_or(cfg.beta / 4));
    if (*flow) return cmd_flow(cfg, beta_given);
    if (*self) return cmd_self_energy(cfg, frequencies, summary_path);
    if (*two) return cmd_two_point(cfg);
    if (*edc) return cmd_ed(cfg);
    if (*trees_cmd) return cmd_trees(cfg, tree_h, n_max, theta);
    if (*verify) return cmd_verify(cfg, suite);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
