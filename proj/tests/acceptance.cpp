// Acceptance driver: one PASS/FAIL line per criterion. argv[1] is the CLI binary.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "t2m/t2m.hpp"

using namespace t2m;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream why;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      why << " [" << what << "]";
    }
  }
};

/// Largest entrywise deviation of k from the constant matrix m over the points.
double deviation(const VectorForm1& k, const Eigen::MatrixXd& m, const std::vector<Point>& pts) {
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, (k.evaluate(p) - m).cwiseAbs().maxCoeff());
  return worst;
}

Eigen::MatrixXd diag3(double a, double b, double c) { return Eigen::Vector3d(a, b, c).asDiagonal(); }

std::string fmt_res(double r) {
  std::ostringstream o;
  o << r;
  return o.str();
}

void identity_suite(Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 1; n <= 3; ++n) {
    const VerificationReport rep = verify_identity_suite(n, {.points = 25, .seed = 7}, {1e-9}, 5);
    for (const auto& c : rep.checks()) {
      const bool sampled = c.id.find(".type") != std::string::npos;
      out.require(c.pass, c.id + " residual " + fmt_res(c.max_residual));
      if (!sampled) out.require(c.max_residual == 0.0, c.id + " not exactly zero");
      if (sampled) out.require(c.points == 25, c.id + " sampled at " + std::to_string(c.points) + " points");
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.require(secs < 10.0, "runtime " + fmt_res(secs) + " s");
  out.why << " runtime " << secs << " s";
}

void regression_matrices(Outcome& out) {
  const Chart c(1);
  const Context ctx = Context::make(c, {.points = 25});
  const SemiSpray s = standard_semispray(c, 2);
  const VectorForm1 j1 = make_J1(c), j2 = make_J2(c);
  Eigen::MatrixXd j1s(3, 3);
  j1s << 0, 0, 0, 1, 0, 0, 0, -1, 0;
  const ConjugatePair cp = conjugate_pair(s, ctx);
  const std::vector<std::pair<std::string, double>> devs{
      {"[J2,S]", deviation(bracket(j2, s.field), diag3(1, 1, -2), ctx.points)},
      {"[J1,S]", deviation(bracket(j1, s.field), j1s, ctx.points)},
      {"[[J1,S],S]", deviation(bracket(bracket(j1, s.field), s.field), diag3(1, -2, 1), ctx.points)},
      {"G2", deviation(cp.gamma2.gamma, diag3(1, 1, -1), ctx.points)},
      {"G1", deviation(cp.gamma1.gamma, diag3(1, -1, -1), ctx.points)},
  };
  for (const auto& [name, d] : devs) out.require(d <= 1e-12, name + " off by " + fmt_res(d));
}

void connection_section(Outcome& out) {
  std::mt19937_64 rng(2024);
  int guarded = 0;
  for (int n = 1; n <= 2; ++n) {
    const Chart c(n);
    const Context ctx = Context::make(c, {.points = 25});
    for (int k = 0; k < 5; ++k) {
      const Connection con = make_connection(random_homogeneous_type1(c, rng), 1, ctx);
      const VectorForm1 def = strong_torsion(con, random_semispray(c, 1, rng));
      const double d = difference(def, strong_torsion_closed_form(con), ctx.points).max_abs;
      out.require(d < 1e-8, "closed form n=" + std::to_string(n) + " off by " + fmt_res(d));
      try {
        const double e = difference(eq17_form(con, ctx), def, ctx.points).max_abs;
        out.require(e < 1e-8, "J2G form off by " + fmt_res(e));
        ++guarded;
      } catch (const PreconditionFailed&) {
      }
      const Connection inv = make_connection(random_c1_invariant_type1(c, rng), 1, ctx);
      const VectorForm1 t = strong_torsion(inv, random_semispray(c, 1, rng));
      const double e = difference(eq17_form(inv, ctx), t, ctx.points).max_abs;
      out.require(e < 1e-8, "J2G form on a C1-invariant connection off by " + fmt_res(e));
      ++guarded;
    }
  }

  const Chart c(1);
  const Context ctx = Context::make(c, {.points = 25});
  const SemiSpray s = standard_semispray(c, 1);
  const Connection con = decompose_type1(s, VectorForm1(c), ctx);
  out.require(con.type == 1, "decomposition type");
  out.require(deviation(con.gamma, diag3(1, -1, -1), ctx.points) == 0.0, "decomposition matrix");
  out.require(difference(associated_semispray(con).field, s.field, ctx.points).max_abs == 0.0, "spray round trip");
  const VectorForm1 t = strong_torsion(con, s);
  out.require(max_abs(t, ctx.points).max_abs == 0.0, "torsion round trip");
  const double e = difference(eq17_form(con, ctx), t, ctx.points).max_abs;
  out.require(e < 1e-9, "J2G form on the decomposition off by " + fmt_res(e));
  out.why << " J2G form checked on " << guarded << " random connections";
}

void linear_section(Outcome& out) {
  const Chart c1(1), c2(2);
  const Context ctx1 = Context::make(c1, {.points = 25}), ctx2 = Context::make(c2, {.points = 25});

  const LinearConnection flat = flat_connection(c1);
  const ObstructionResult ob = prop3_obstruction(flat, ctx1);
  out.require(ob.phi_on_vertical.max_abs == 0.0, "flat phi not identically zero");
  out.require(!is_regular(flat, Regularity::J1, ctx1).verdict, "flat D reported J1-regular");

  const LinearConnection sample = sample_connection(c1);
  out.require(is_regular(sample, Regularity::J1, ctx1).verdict, "sample D not J1-regular");
  Eigen::MatrixXd want(3, 3);
  want << 1, 0, 0, 0, 1, 0, 0, -2, -1;
  const double d = deviation(induced_connection(sample, Regularity::J1, ctx1).gamma, want, ctx1.points);
  out.require(d <= 1e-10, "induced G2 off by " + fmt_res(d));

  std::vector<std::pair<LinearConnection, const Context*>> catalog{
      {flat, &ctx1}, {flat_connection(c2), &ctx2}, {sample, &ctx1}, {sample_connection(c2), &ctx2},
      {symmetrized(sample), &ctx1}};
  for (double a : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0})
    for (double b : {-2.0, -1.0, 0.5, 1.0}) catalog.emplace_back(family_connection(c1, a, b), &ctx1);
  int regular = 0;
  for (const auto& [dc, ctx] : catalog)
    for (Regularity kind : {Regularity::J1, Regularity::J2}) {
      if (!is_regular(dc, kind, *ctx).verdict) continue;
      ++regular;
      out.require(homogeneity_criterion(dc, kind, *ctx).agree(), std::string("biconditional fails for ") + to_string(kind));
    }
  out.require(regular >= 3, "too few regular catalog entries");

  out.require(is_regular(flat, Regularity::J2, ctx1).verdict, "flat D not J2-regular");
  const Connection g = induced_connection(flat, Regularity::J2, ctx1);
  out.require(g.type == 1, "induced connection from J2 is not type 1");
  const VerificationReport v = validate_connection(g.gamma, g.type, ctx1);
  for (const auto& chk : v.checks())
    out.require(chk.pass && chk.max_residual < 1e-9, chk.id + " residual " + fmt_res(chk.max_residual));
  out.why << " regular catalog cases " << regular;
}

void form_section(Outcome& out) {
  const Chart c(2);
  const Context ctx = Context::make(c, {.points = 25});
  const FinslerianForm f{finsler_witness(), "y nonzero"};

  int worst = c.dim();
  for (const auto& p : ctx.points) {
    Evaluator ev(p);
    worst = std::min(worst, detail::numeric_rank(f.omega.matrix(ev)));
  }
  out.require(worst == 6, "minimum rank " + std::to_string(worst));
  const double ij2 = max_abs(interior(make_J2(c), f.omega), ctx.points).max_abs;
  out.require(ij2 < 1e-9, "i_J2 Omega residual " + fmt_res(ij2));

  const CanonicalSpray cs = canonical_spray(f, ctx);
  const VectorField g = cs.spray.field;
  const double j2g = difference(make_J2(c)(g), make_C2(c), ctx.points).max_abs;
  const double hom = difference(lie_bracket(make_C2(c), g), g, ctx.points).max_abs;
  const ScalarPForm de = exterior_derivative(ScalarPForm::function(c, cs.energy));
  const double dge = max_abs(interior(g, de), ctx.points).max_abs;
  out.require(j2g < 1e-8, "J2G-C2 " + fmt_res(j2g));
  out.require(hom < 1e-8, "[C2,G]-G " + fmt_res(hom));
  out.require(dge < 1e-8, "d_G E " + fmt_res(dge));

  const CanonicalConnections cc = canonical_connections(cs.spray, ctx);
  out.require(cc.gamma2_torsion.max_abs < 1e-8, "G2 torsion " + fmt_res(cc.gamma2_torsion.max_abs));

  const OmegaDecomposition dec = decompose_omega(f.omega, ctx);
  out.require(dec.reconstruction.max_abs < 1e-8, "decomposition " + fmt_res(dec.reconstruction.max_abs));

  ScalarPForm taut(c, 1);
  for (int i = 0; i < c.n(); ++i) taut.set({c.index(Block::X, i)}, c.y(i));
  const ExactnessResult ex = homogeneous_exactness(taut, 1, standard_semispray(c, 2), Fibration::Pi1, ctx);
  out.require(ex.reconstruction.max_abs < 1e-10, "tautological reconstruction " + fmt_res(ex.reconstruction.max_abs));

  std::mt19937_64 rng(99);
  const VectorForm1 j2 = make_J2(c);
  double lemma = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const SemiSpray s = random_semispray(c, 2, rng);
    const VectorForm1 sj2 = bracket(s.field, j2);
    for (int p = 0; p <= 2; ++p) {
      const ScalarPForm w = random_form(c, p, rng);
      ScalarPForm lhs = interior(s.field, derivation(j2, w));
      ScalarPForm rhs = derivation(make_C2(c), w);
      if (p > 0) {
        lhs = lhs + derivation(j2, interior(s.field, w));
        rhs = rhs - interior(sj2, w);
      }
      lemma = std::max(lemma, difference(lhs, rhs, ctx.points).max_abs);
    }
  }
  out.require(lemma < 1e-9, "commutator identity " + fmt_res(lemma));
}

void negative_controls(Outcome& out) {
  const Chart c1(1);
  const Context ctx = Context::make(c1, {.points = 25});
  try {
    make_finslerian(closed_degenerate_form(c1), ctx);
    out.require(false, "odd-n form accepted");
  } catch (const InvalidForm& e) {
    out.require(std::string(e.what()).find("odd") != std::string::npos, std::string("diagnostic: ") + e.what());
  }
  const SemiSpray bad = make_semispray(c1, 2, {c1.x(0)});
  out.require(!is_spray(bad, ctx.points).holds, "non-spray completion passes is_spray");
  for (int type : {1, 2})
    out.require(!validate_connection(VectorForm1::identity(c1), type, ctx).all_pass(),
                "identity validates as type " + std::to_string(type));
}

/// Runs a command and returns (exit status, stdout).
std::pair<int, std::string> capture(const std::string& cmd) {
  std::string text;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {-1, text};
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) text.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

void determinism(Outcome& out, const std::string& cli) {
  if (cli.empty()) {
    out.require(false, "no CLI path given");
    return;
  }
  const std::string cmd = "\"" + cli + "\" run --scenario flat-n1 --seed 7";
  const auto [s1, a] = capture(cmd);
  const auto [s2, b] = capture(cmd);
  out.require(s1 == 0 && s2 == 0, "exit statuses " + std::to_string(s1) + ", " + std::to_string(s2));
  out.require(!a.empty(), "empty output");
  out.require(a == b, "outputs differ");
  out.why << " " << a.size() << " bytes";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"identity suite", identity_suite},
      {"regression matrices", regression_matrices},
      {"nonlinear connections", connection_section},
      {"linear connections", linear_section},
      {"Finslerian forms", form_section},
      {"negative controls", negative_controls},
      {"determinism", [&](Outcome& o) { determinism(o, cli); }},
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    try {
      criteria[k].second(out);
    } catch (const std::exception& e) {
      out.ok = false;
      out.why << " [exception: " << e.what() << "]";
    }
    all = all && out.ok;
    std::cout << (out.ok ? "PASS" : "FAIL") << " criterion " << (k + 1) << ": " << criteria[k].first << out.why.str()
              << std::endl;
  }
  return all ? 0 : 1;
}
